#pragma once

#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/knowledge_graph.hpp"

namespace dualgraph {

// Structured-output parsers. Each one accepts the bare payload, optionally
// wrapped in a ``` fence and surrounding whitespace, and nothing else. Every
// input yields a value or a typed Error:
//   Parse       - not JSON / not the expected top-level type
//   Schema      - wrong keys, types or id formats
//   Validation  - references that do not resolve
//   Budget      - lists longer than the allowed cap

/// When `kg` is given, edge endpoints and evidences_map entries may refer to
/// existing graph ids; otherwise only ids introduced in the payload resolve
/// for evidences_map, and endpoints are checked for format only.
ExtractionResult parse_extraction(std::string_view text, const KnowledgeGraph* kg = nullptr);
std::string render_extraction(const ExtractionResult& result);

/// Clusters of 2..5 concept node ids.
std::vector<MergeCluster> parse_merge(std::string_view text);
std::string render_merge(const std::vector<MergeCluster>& clusters);

struct ChainSelection {
  std::vector<std::string> chains;
  std::vector<std::string> search_queries;  // chain-aligned first, then outline-driven extras
  bool operator==(const ChainSelection&) const = default;
};
ChainSelection parse_chain_selection(std::string_view text, int chain_num);
std::string render_chain_selection(const ChainSelection& selection);

/// One query per line. Lines carrying list markers, quotes or fences count as
/// format violations (the marker is stripped), as do lines beyond `budget`.
struct QueryLines {
  std::vector<std::string> queries;
  int violations = 0;
};
QueryLines parse_query_lines(std::string_view text, int budget);

/// JSON array of candidate indices in [0, candidates).
std::vector<int> parse_url_filter(std::string_view text, int candidates);

struct EvidenceExtraction {
  bool useful = false;
  std::string summary;
  std::string content;
};
EvidenceExtraction parse_evidence_extraction(std::string_view text);

inline const std::vector<std::string>& early_stop_dimensions() {
  static const std::vector<std::string> dims{"instruction_following", "depth", "breadth",
                                             "balance", "support", "insightfulness"};
  return dims;
}
/// All six dimensions, each a number in [0, 100].
std::map<std::string, double> parse_early_stop(std::string_view text);

}  // namespace dualgraph
