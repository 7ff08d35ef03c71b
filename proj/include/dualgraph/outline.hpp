#pragma once

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/evidence_bank.hpp"
#include "dualgraph/providers.hpp"

namespace dualgraph {

/// A heading ("2.1.3") or a lettered content point ("a") under the nearest
/// preceding heading. Content points never have children.
struct OutlineNode {
  std::vector<int> path;  // decimal components; empty for content points
  char letter = 0;        // 'a'..'z' for content points, 0 for headings
  std::string title;
  std::set<EvidenceId> citations;
  std::vector<OutlineNode> children;

  bool is_heading() const noexcept { return letter == 0; }
  /// "2.1.3" or "a"
  std::string label() const;

  bool operator==(const OutlineNode&) const = default;
};

struct OutlineGraph {
  std::string title;
  std::vector<OutlineNode> roots;

  bool operator==(const OutlineGraph&) const = default;
};

inline constexpr int kMaxHeadingDepth = 3;

/// Parse the plain-text outline format. Leading indentation and blank lines
/// are tolerated; numbering must be gap-free and at most three levels deep.
/// Throws ParseError naming the offending line.
OutlineGraph parse_outline(std::string_view text);

/// One line per node, no indentation, no blank lines. Headings at depth 1 keep
/// a trailing dot ("1. Intro"); deeper headings do not ("1.1 Scope").
std::string render_outline(const OutlineGraph& og, bool with_citations);

std::set<EvidenceId> all_citations(const OutlineGraph& og);

/// Nodes in document order, paired with their depth (content points sit one
/// level below their heading).
struct OutlineEntry {
  const OutlineNode* node;
  int depth;
};
std::vector<OutlineEntry> flatten(const OutlineGraph& og);

std::size_t count_nodes(const OutlineGraph& og);

/// Reattachment of one evidence id lost by a revision.
struct CitationMove {
  EvidenceId id;
  std::string from_label;
  std::string to_label;
  double similarity;
};

struct RevisionResult {
  OutlineGraph outline;
  std::vector<CitationMove> moves;
};

/// Parse a revised outline and restore every citation of `old_og` that the
/// revision dropped. A dropped id is attached to the revised node whose title
/// is most similar (embedding cosine) to the id's first former host; ties go
/// to the shallower node, then to the earlier one in document order.
///
/// Throws ParseError if the revision does not parse, Error{Validation} if the
/// revision cites ids missing from `bank` or has no node to host a lost id.
RevisionResult apply_revision(const OutlineGraph& old_og, std::string_view revised_text,
                              const EvidenceBank& bank, EmbeddingProvider& embedder);

}  // namespace dualgraph
