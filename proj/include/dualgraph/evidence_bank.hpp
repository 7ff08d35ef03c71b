#pragma once

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

namespace dualgraph {

/// Global evidence identifier. Rendered as "id_N" inside outlines.
using EvidenceId = std::int64_t;

std::string render_evidence_token(EvidenceId id);

struct EvidenceUnit {
  EvidenceId id = 0;
  std::string url;
  std::string title;
  std::string query;    // search query that produced this unit
  std::string summary;
  std::string content;  // salient spans from the original page
  int iteration = 0;

  bool operator==(const EvidenceUnit&) const = default;
};

/// Append-only store of citable units. URLs are deduplicated after
/// normalization across every query and iteration of a run.
class EvidenceBank {
 public:
  /// Returns the new id, or std::nullopt when the url was already seen.
  /// Throws Error{Input} on an empty url or query.
  std::optional<EvidenceId> add(const std::string& url, const std::string& title,
                                const std::string& query, const std::string& summary,
                                const std::string& content, int iteration);

  /// Throws Error{NotFound} for unknown ids.
  const EvidenceUnit& get(EvidenceId id) const;

  bool contains(EvidenceId id) const noexcept { return id >= 1 && id <= size(); }
  bool seen(const std::string& url) const;

  EvidenceId size() const noexcept { return static_cast<EvidenceId>(units_.size()); }
  bool empty() const noexcept { return units_.empty(); }
  const std::vector<EvidenceUnit>& units() const noexcept { return units_; }

  /// Units with id > after, in id order.
  std::vector<EvidenceUnit> since(EvidenceId after) const;

  bool operator==(const EvidenceBank&) const = default;

 private:
  std::vector<EvidenceUnit> units_;
  std::set<std::string> seen_urls_;
};

/// Structured-text form: {"units": [...], "seen_urls": [...]}.
std::string serialize_bank(const EvidenceBank& bank);
/// Replays the units through add(), so ids and dedup state are rebuilt and checked.
EvidenceBank deserialize_bank(std::string_view text);

}  // namespace dualgraph
