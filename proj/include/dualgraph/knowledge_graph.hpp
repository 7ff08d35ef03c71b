#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "dualgraph/evidence_bank.hpp"
#include "dualgraph/providers.hpp"

namespace dualgraph {

/// Numeric part of "nK" / "eK".
using NodeId = std::int64_t;
using EdgeId = std::int64_t;

std::string render_node_id(NodeId id);
std::string render_edge_id(EdgeId id);
/// Parses "n12" / "e7"; std::nullopt when the text does not match.
std::optional<std::int64_t> parse_prefixed_id(std::string_view text, char prefix);

struct KnowledgeNode {
  NodeId id = 0;
  std::string name;
  bool is_core_entity = false;
  std::optional<int> cluster_id;
  std::optional<int> community_id;
  std::optional<Embedding> embedding;

  bool operator==(const KnowledgeNode&) const = default;
};

struct KnowledgeEdge {
  EdgeId id = 0;
  NodeId source = 0;
  NodeId target = 0;
  std::string relation;
  std::set<EvidenceId> evidence_ids;

  bool operator==(const KnowledgeEdge&) const = default;
};

/// Parsed output of the knowledge extraction prompt.
struct ExtractionResult {
  struct Node {
    NodeId id;
    std::string name;
    bool is_core_entity;
    bool operator==(const Node&) const = default;
  };
  struct Edge {
    EdgeId id;
    NodeId source;
    NodeId target;
    std::string relation;
    bool operator==(const Edge&) const = default;
  };
  std::vector<Node> new_nodes;
  std::vector<Edge> new_edges;
  std::map<std::string, std::vector<EdgeId>> evidences_map;  // "EN1" -> edges

  bool operator==(const ExtractionResult&) const = default;
};

/// One merge group from the node-merge prompt.
struct MergeCluster {
  std::string representative_concept;
  std::vector<NodeId> source_node_ids;
  bool operator==(const MergeCluster&) const = default;
};

struct MergeReport {
  std::map<NodeId, NodeId> redirected;       // merged-away node -> canonical node
  std::vector<EdgeId> dropped_self_loops;
  std::set<EvidenceId> dropped_evidence;     // ids no surviving edge references any more
  std::vector<EdgeId> collapsed_parallel;    // edges folded into an existing parallel edge
};

struct CommunityPartition {
  std::map<NodeId, int> assignment;
  std::uint64_t seed = 0;

  int community_of(NodeId v) const;
  int community_count() const;
  bool operator==(const CommunityPartition&) const = default;
};

/// Evidence-grounded directed multigraph over core-entity and concept nodes.
///
/// Edge identity is the exact (source, target, relation) triple: re-observing
/// a triple unions evidence into the existing edge. Ids retired by merges are
/// kept as aliases so that later extraction output referencing them resolves.
class KnowledgeGraph {
 public:
  /// Insert nodes and edges, grounding each edge with the evidence ids of the
  /// EN labels that map to it. Validation runs before any mutation; on error
  /// (Error{Schema} / Error{Input}) the graph is untouched.
  void apply_extraction(const ExtractionResult& result,
                        const std::map<std::string, EvidenceId>& en_to_evidence);

  /// Collapse each cluster into its lowest-id member, renamed to the
  /// representative concept. Redirected self-loops are dropped and reported.
  /// Throws Error{Protection} for core entities, Error{Input} for overlapping,
  /// unknown, or wrongly sized clusters; the graph is untouched on error.
  MergeReport merge_nodes(const std::vector<MergeCluster>& clusters);

  /// Semantic clusters: connected components of the cosine >= threshold graph.
  /// Labels are assigned in ascending order of each component's smallest id.
  std::map<NodeId, int> cluster_semantic(double threshold) const;
  void set_clusters(const std::map<NodeId, int>& labels);

  void set_partition(const CommunityPartition& partition);
  /// Partition reconstructed from stored community ids; empty assignment if
  /// any node lacks one.
  CommunityPartition partition() const;

  void set_embedding(NodeId id, Embedding embedding);
  /// Compute embeddings of node names for nodes that do not have one yet.
  void ensure_embeddings(EmbeddingProvider& embedder);

  const KnowledgeNode& node(NodeId id) const;
  const KnowledgeEdge& edge(EdgeId id) const;
  bool has_node(NodeId id) const { return nodes_.count(id) > 0; }
  bool has_edge(EdgeId id) const { return edges_.count(id) > 0; }
  /// Follows merge aliases; std::nullopt if unknown.
  std::optional<NodeId> resolve_node(NodeId id) const;
  std::optional<EdgeId> resolve_edge(EdgeId id) const;
  std::optional<NodeId> find_node_by_name(const std::string& name) const;

  const std::map<NodeId, KnowledgeNode>& nodes() const noexcept { return nodes_; }
  const std::map<EdgeId, KnowledgeEdge>& edges() const noexcept { return edges_; }
  std::size_t node_count() const noexcept { return nodes_.size(); }
  std::size_t edge_count() const noexcept { return edges_.size(); }
  bool empty() const noexcept { return nodes_.empty(); }

  /// Highest id ever issued (including aliases); new ids continue from here.
  NodeId max_node_id() const noexcept { return max_node_id_; }
  EdgeId max_edge_id() const noexcept { return max_edge_id_; }

  /// Undirected simple projection.
  const std::set<NodeId>& neighbors(NodeId v) const;
  std::size_t degree(NodeId v) const { return neighbors(v).size(); }
  bool connected(NodeId u, NodeId v) const;

  std::set<EvidenceId> all_evidence() const;

  const std::map<NodeId, NodeId>& node_aliases() const noexcept { return node_alias_; }
  const std::map<EdgeId, EdgeId>& edge_aliases() const noexcept { return edge_alias_; }

  bool operator==(const KnowledgeGraph&) const = default;

 private:
  void rebuild_adjacency();
  std::optional<EdgeId> find_edge(NodeId s, NodeId t, const std::string& relation) const;

  std::map<NodeId, KnowledgeNode> nodes_;
  std::map<EdgeId, KnowledgeEdge> edges_;
  std::map<NodeId, NodeId> node_alias_;
  std::map<EdgeId, EdgeId> edge_alias_;
  std::map<NodeId, std::set<NodeId>> adjacency_;
  NodeId max_node_id_ = 0;
  EdgeId max_edge_id_ = 0;

  friend KnowledgeGraph kg_from_parts(std::vector<KnowledgeNode>, std::vector<KnowledgeEdge>,
                                      std::map<NodeId, NodeId>, std::map<EdgeId, EdgeId>, NodeId, EdgeId);
};

/// Rebuild a graph from persisted parts (used by deserialization). Throws
/// Error{Schema} when the parts are inconsistent.
KnowledgeGraph kg_from_parts(std::vector<KnowledgeNode> nodes, std::vector<KnowledgeEdge> edges,
                             std::map<NodeId, NodeId> node_aliases, std::map<EdgeId, EdgeId> edge_aliases,
                             NodeId max_node_id, EdgeId max_edge_id);

/// cross_neighbors(v) / max(deg(v), 1) on the undirected view.
double bridging_score(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId v);
std::size_t cross_neighbors(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId v);
/// Neighbors sharing v's community.
std::size_t degree_in_community(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId v);

struct LeidenOptions {
  double resolution = 1.0;
  double randomness = 0.01;  // refinement temperature
  int max_levels = 64;
};

/// Leiden community detection on the undirected simple projection with unit
/// weights. Deterministic for a given (graph, seed). Communities are connected
/// and labelled 0..k-1 in order of their smallest node id.
CommunityPartition detect_communities(const KnowledgeGraph& kg, std::uint64_t seed,
                                      const LeidenOptions& options = {});

/// Newman modularity with resolution on the undirected simple projection.
double modularity(const KnowledgeGraph& kg, const CommunityPartition& partition,
                  double resolution = 1.0);

/// JSON document with "knowledge_nodes" / "knowledge_edges" entries; edges carry
/// the "Source - relation -> Target" representation and their evidence ids.
std::string serialize_kg(const KnowledgeGraph& kg);
KnowledgeGraph deserialize_kg(std::string_view text);

/// The compact view fed to prompts (node_id / knowledge / is_core_entity and
/// edge_id / representation), optionally with evidence counts.
std::string kg_prompt_view(const KnowledgeGraph& kg, bool with_evidence);

}  // namespace dualgraph
