#pragma once

#include <cstddef>
#include <limits>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "dualgraph/knowledge_graph.hpp"

namespace dualgraph {

enum class ChainKind { Enrich, ExploreSim, ExploreSBM, ExploreHole };
enum class ScoreBasis { Enrichment, Similarity, SbmProbability, SbmEntropy, StructuralHole };

const char* to_string(ChainKind kind);
const char* to_string(ScoreBasis basis);

struct SearchChain {
  ChainKind kind = ChainKind::Enrich;
  NodeId source = 0;
  NodeId target = 0;
  std::string relation_pattern;
  double score = 0.0;
  ScoreBasis score_basis = ScoreBasis::Enrichment;
  std::string chain_id;
  EdgeId edge = 0;  // enrich chains only

  bool operator==(const SearchChain&) const = default;
};

struct Quotas {
  int enrich = 0;
  int per_explore_type = 0;
  int leftover = 0;
  bool operator==(const Quotas&) const = default;
};

/// floor(N/4) per category, N - 4*floor(N/4) left over. Throws Error{Input} for N < 1.
Quotas allocate_quotas(int n);

/// Edges with at most `threshold` evidence ids.
std::set<EdgeId> enrich_pool(const KnowledgeGraph& kg, int threshold);

/// 1.0 both core, 0.5 exactly one, 0.0 neither.
double node_importance(const KnowledgeGraph& kg, NodeId u, NodeId v);
double cross_community(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId u, NodeId v);
double enrichment_score(const KnowledgeGraph& kg, const CommunityPartition& partition, EdgeId e);

inline constexpr std::size_t kAll = std::numeric_limits<std::size_t>::max();

/// Zero-evidence edges first, then by descending score; ties by edge id.
std::vector<SearchChain> rank_enrich(const KnowledgeGraph& kg, const CommunityPartition& partition,
                                     int threshold, std::size_t quota = kAll);

struct SbmBlockMatrix {
  std::vector<std::vector<double>> b;
  std::vector<std::size_t> sizes;
  double alpha = 0.1;

  double at(int ci, int cj) const { return b.at(ci).at(cj); }
};

SbmBlockMatrix sbm_block_matrix(const KnowledgeGraph& kg, const CommunityPartition& partition, double alpha);

/// Bits. Throws Error{Domain} outside (0,1).
double bernoulli_entropy(double p);

using NodePair = std::pair<NodeId, NodeId>;  // (min, max)
NodePair unordered(NodeId a, NodeId b);

/// Unconnected (core, concept) pairs by descending cosine of name embeddings.
/// Throws Error{Precondition} if a node involved lacks an embedding.
std::vector<SearchChain> explore_type1(const KnowledgeGraph& kg, std::size_t m = kAll);

/// Unconnected cross-community pairs minus `excluded`. The first ceil(m/2)
/// come by probability, the next floor(m/2) by entropy among the rest. With
/// m == kAll the whole pool is returned in probability order.
std::vector<SearchChain> explore_type2(const KnowledgeGraph& kg, const CommunityPartition& partition,
                                       const SbmBlockMatrix& sbm, std::size_t m = kAll,
                                       const std::set<NodePair>& excluded = {});

/// Bridge/hub of one community paired with the representative of another,
/// ranked by the bridge/hub's bridging score; unordered pairs deduplicated.
std::vector<SearchChain> explore_type3(const KnowledgeGraph& kg, const CommunityPartition& partition);

struct ChainConfig {
  int n = 10;
  int enrich_threshold = 1;
  double sbm_alpha = 0.1;
};

/// Quota-limited selection over the four categories. Explore pairs are unique
/// across types (priority I, III, II); leftover slots go round-robin
/// Enrich, I, II, III. Output is grouped by category with chain_1.. ids.
std::vector<SearchChain> build_search_chains(const KnowledgeGraph& kg, const CommunityPartition& partition,
                                             const ChainConfig& config);

/// "chain_3; type: explore; A → hypothesized link → B", one per line, as fed to
/// the chain selection prompt.
std::string render_chain_candidates(const KnowledgeGraph& kg, const std::vector<SearchChain>& chains);

std::string serialize_chains(const std::vector<SearchChain>& chains);

}  // namespace dualgraph
