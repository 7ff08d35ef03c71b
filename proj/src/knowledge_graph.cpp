#include "dualgraph/knowledge_graph.hpp"

#include <algorithm>
#include <numeric>
#include <tuple>

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"
#include "json_io.hpp"

namespace dualgraph {

std::string render_node_id(NodeId id) { return "n" + std::to_string(id); }
std::string render_edge_id(EdgeId id) { return "e" + std::to_string(id); }

std::optional<std::int64_t> parse_prefixed_id(std::string_view text, char prefix) {
  if (text.size() < 2 || text.size() > 16 || text[0] != prefix) return std::nullopt;
  std::int64_t value = 0;
  for (std::size_t i = 1; i < text.size(); ++i) {
    if (text[i] < '0' || text[i] > '9') return std::nullopt;
    value = value * 10 + (text[i] - '0');
  }
  if (value < 1) return std::nullopt;
  return value;
}

int CommunityPartition::community_of(NodeId v) const {
  auto it = assignment.find(v);
  if (it == assignment.end()) throw Error(ErrorKind::NotFound, "node " + render_node_id(v) + " is not in the partition");
  return it->second;
}

int CommunityPartition::community_count() const {
  int k = 0;
  for (const auto& [v, c] : assignment) k = std::max(k, c + 1);
  return k;
}

namespace {

const std::set<NodeId> kNoNeighbors;

struct TripleKey {
  NodeId s, t;
  std::string rel;
  bool operator<(const TripleKey& o) const { return std::tie(s, t, rel) < std::tie(o.s, o.t, o.rel); }
};

}  // namespace

const KnowledgeNode& KnowledgeGraph::node(NodeId id) const {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorKind::NotFound, "unknown node " + render_node_id(id));
  return it->second;
}

const KnowledgeEdge& KnowledgeGraph::edge(EdgeId id) const {
  auto it = edges_.find(id);
  if (it == edges_.end()) throw Error(ErrorKind::NotFound, "unknown edge " + render_edge_id(id));
  return it->second;
}

std::optional<NodeId> KnowledgeGraph::resolve_node(NodeId id) const {
  if (nodes_.count(id)) return id;
  if (auto it = node_alias_.find(id); it != node_alias_.end()) return it->second;
  return std::nullopt;
}

std::optional<EdgeId> KnowledgeGraph::resolve_edge(EdgeId id) const {
  if (edges_.count(id)) return id;
  if (auto it = edge_alias_.find(id); it != edge_alias_.end()) return it->second;
  return std::nullopt;
}

std::optional<NodeId> KnowledgeGraph::find_node_by_name(const std::string& name) const {
  for (const auto& [id, n] : nodes_) {
    if (n.name == name) return id;
  }
  return std::nullopt;
}

std::optional<EdgeId> KnowledgeGraph::find_edge(NodeId s, NodeId t, const std::string& relation) const {
  for (const auto& [id, e] : edges_) {
    if (e.source == s && e.target == t && e.relation == relation) return id;
  }
  return std::nullopt;
}

const std::set<NodeId>& KnowledgeGraph::neighbors(NodeId v) const {
  if (!nodes_.count(v)) throw Error(ErrorKind::NotFound, "unknown node " + render_node_id(v));
  auto it = adjacency_.find(v);
  return it == adjacency_.end() ? kNoNeighbors : it->second;
}

bool KnowledgeGraph::connected(NodeId u, NodeId v) const {
  auto it = adjacency_.find(u);
  return it != adjacency_.end() && it->second.count(v) > 0;
}

std::set<EvidenceId> KnowledgeGraph::all_evidence() const {
  std::set<EvidenceId> ids;
  for (const auto& [id, e] : edges_) ids.insert(e.evidence_ids.begin(), e.evidence_ids.end());
  return ids;
}

void KnowledgeGraph::rebuild_adjacency() {
  adjacency_.clear();
  for (const auto& [id, e] : edges_) {
    adjacency_[e.source].insert(e.target);
    adjacency_[e.target].insert(e.source);
  }
}

void KnowledgeGraph::apply_extraction(const ExtractionResult& result,
                                      const std::map<std::string, EvidenceId>& en_to_evidence) {
  // Pass 1: validate everything and plan the mutation.
  std::map<NodeId, NodeId> node_target;  // declared id -> graph id (existing or new)
  std::vector<KnowledgeNode> to_create_nodes;
  NodeId next_node = max_node_id_ + 1;

  for (const auto& n : result.new_nodes) {
    const auto label = render_node_id(n.id);
    if (n.id < 1) throw Error(ErrorKind::Schema, "invalid node id " + label);
    if (trim(n.name).empty()) throw Error(ErrorKind::Schema, "node " + label + " has an empty name");
    if (node_target.count(n.id)) throw Error(ErrorKind::Schema, "duplicate new node id " + label);
    if (auto existing = resolve_node(n.id)) {
      const auto& cur = nodes_.at(*existing);
      if (cur.name != n.name || cur.is_core_entity != n.is_core_entity) {
        throw Error(ErrorKind::Schema, "duplicate new node id " + label + " collides with existing node '" +
                                           cur.name + "'");
      }
      node_target[n.id] = *existing;
      continue;
    }
    if (n.id != next_node) {
      throw Error(ErrorKind::Schema, "non-sequential node id " + label + ", expected " + render_node_id(next_node));
    }
    node_target[n.id] = n.id;
    to_create_nodes.push_back({n.id, n.name, n.is_core_entity, std::nullopt, std::nullopt, std::nullopt});
    ++next_node;
  }

  auto endpoint = [&](NodeId declared, EdgeId edge) -> NodeId {
    if (auto it = node_target.find(declared); it != node_target.end()) return it->second;
    if (auto existing = resolve_node(declared)) return *existing;
    throw Error(ErrorKind::Schema, "dangling node reference " + render_node_id(declared) + " in edge " +
                                       render_edge_id(edge));
  };

  struct PlannedEdge {
    EdgeId id;
    TripleKey key;
    bool create;
  };
  std::map<EdgeId, EdgeId> edge_target;  // declared id -> graph id
  std::map<TripleKey, EdgeId> planned_triples;
  std::vector<KnowledgeEdge> to_create_edges;
  std::map<EdgeId, EdgeId> new_aliases;
  EdgeId next_edge = max_edge_id_ + 1;

  for (const auto& e : result.new_edges) {
    const auto label = render_edge_id(e.id);
    if (e.id < 1) throw Error(ErrorKind::Schema, "invalid edge id " + label);
    if (edge_target.count(e.id)) throw Error(ErrorKind::Schema, "duplicate new edge id " + label);
    if (trim(e.relation).empty()) throw Error(ErrorKind::Schema, "edge " + label + " has an empty relation");
    TripleKey key{endpoint(e.source, e.id), endpoint(e.target, e.id), e.relation};
    if (key.s == key.t) throw Error(ErrorKind::Schema, "edge " + label + " is a self-loop");

    auto known_triple = [&]() -> std::optional<EdgeId> {
      if (auto it = planned_triples.find(key); it != planned_triples.end()) return it->second;
      return find_edge(key.s, key.t, key.rel);
    };

    if (auto existing = resolve_edge(e.id)) {
      const auto& cur = edges_.at(*existing);
      if (cur.source != key.s || cur.target != key.t || cur.relation != key.rel) {
        throw Error(ErrorKind::Schema, "duplicate new edge id " + label + " collides with an existing edge");
      }
      edge_target[e.id] = *existing;
      continue;
    }
    if (e.id != next_edge) {
      throw Error(ErrorKind::Schema, "non-sequential edge id " + label + ", expected " + render_edge_id(next_edge));
    }
    ++next_edge;
    if (auto same = known_triple()) {
      edge_target[e.id] = *same;
      new_aliases[e.id] = *same;
      continue;
    }
    edge_target[e.id] = e.id;
    planned_triples[key] = e.id;
    to_create_edges.push_back({e.id, key.s, key.t, key.rel, {}});
  }

  std::map<EdgeId, std::set<EvidenceId>> grounding;
  for (const auto& [en, edge_ids] : result.evidences_map) {
    auto ev = en_to_evidence.find(en);
    if (ev == en_to_evidence.end()) throw Error(ErrorKind::Input, "evidence label " + en + " is not in this batch");
    for (auto declared : edge_ids) {
      EdgeId target = 0;
      if (auto it = edge_target.find(declared); it != edge_target.end()) {
        target = it->second;
      } else if (auto existing = resolve_edge(declared)) {
        target = *existing;
      } else {
        throw Error(ErrorKind::Schema, "dangling edge reference " + render_edge_id(declared) + " in " + en);
      }
      grounding[target].insert(ev->second);
    }
  }

  // Pass 2: commit.
  for (auto& n : to_create_nodes) {
    max_node_id_ = std::max(max_node_id_, n.id);
    nodes_.emplace(n.id, std::move(n));
  }
  for (auto& e : to_create_edges) {
    max_edge_id_ = std::max(max_edge_id_, e.id);
    edges_.emplace(e.id, std::move(e));
  }
  for (const auto& [alias, target] : new_aliases) {
    max_edge_id_ = std::max(max_edge_id_, alias);
    edge_alias_[alias] = target;
  }
  for (const auto& [edge_id, ids] : grounding) {
    edges_.at(edge_id).evidence_ids.insert(ids.begin(), ids.end());
  }
  rebuild_adjacency();
}

MergeReport KnowledgeGraph::merge_nodes(const std::vector<MergeCluster>& clusters) {
  std::set<NodeId> used;
  for (const auto& c : clusters) {
    if (c.source_node_ids.size() < 2 || c.source_node_ids.size() > 5) {
      throw Error(ErrorKind::Input, "merge cluster '" + c.representative_concept + "' must have 2..5 nodes");
    }
    if (trim(c.representative_concept).empty()) throw Error(ErrorKind::Input, "merge cluster needs a representative name");
    for (auto id : c.source_node_ids) {
      auto it = nodes_.find(id);
      if (it == nodes_.end()) throw Error(ErrorKind::Input, "merge references unknown node " + render_node_id(id));
      if (it->second.is_core_entity) {
        throw Error(ErrorKind::Protection, "core entity " + render_node_id(id) + " ('" + it->second.name +
                                               "') cannot be merged");
      }
      if (!used.insert(id).second) {
        throw Error(ErrorKind::Input, "node " + render_node_id(id) + " appears in more than one merge position");
      }
    }
  }

  MergeReport report;
  if (clusters.empty()) return report;

  std::map<NodeId, NodeId> redirect;
  for (const auto& c : clusters) {
    NodeId canonical = *std::min_element(c.source_node_ids.begin(), c.source_node_ids.end());
    auto& keep = nodes_.at(canonical);
    if (keep.name != c.representative_concept) {
      keep.name = c.representative_concept;
      keep.embedding.reset();
    }
    for (auto id : c.source_node_ids) {
      if (id == canonical) continue;
      redirect[id] = canonical;
      nodes_.erase(id);
      node_alias_[id] = canonical;
    }
  }
  for (auto& [alias, target] : node_alias_) {
    if (auto it = redirect.find(target); it != redirect.end()) target = it->second;
  }
  report.redirected = redirect;

  auto remap = [&](NodeId v) {
    auto it = redirect.find(v);
    return it == redirect.end() ? v : it->second;
  };

  std::set<EvidenceId> before = all_evidence();
  std::map<EdgeId, KnowledgeEdge> rebuilt;
  std::map<TripleKey, EdgeId> seen;
  for (auto& [id, e] : edges_) {
    e.source = remap(e.source);
    e.target = remap(e.target);
    if (e.source == e.target) {
      report.dropped_self_loops.push_back(id);
      continue;
    }
    TripleKey key{e.source, e.target, e.relation};
    if (auto it = seen.find(key); it != seen.end()) {
      rebuilt.at(it->second).evidence_ids.insert(e.evidence_ids.begin(), e.evidence_ids.end());
      edge_alias_[id] = it->second;
      report.collapsed_parallel.push_back(id);
      continue;
    }
    seen.emplace(key, id);
    rebuilt.emplace(id, std::move(e));
  }
  edges_ = std::move(rebuilt);
  for (auto& [alias, target] : edge_alias_) {
    if (auto r = resolve_edge(target); r && *r != target && edges_.count(*r)) target = *r;
  }

  auto after = all_evidence();
  std::set_difference(before.begin(), before.end(), after.begin(), after.end(),
                      std::inserter(report.dropped_evidence, report.dropped_evidence.end()));
  rebuild_adjacency();
  return report;
}

std::map<NodeId, int> KnowledgeGraph::cluster_semantic(double threshold) const {
  std::vector<NodeId> ids;
  for (const auto& [id, n] : nodes_) {
    if (!n.embedding) throw Error(ErrorKind::Precondition, "node " + render_node_id(id) + " has no embedding");
    ids.push_back(id);
  }
  std::vector<std::size_t> parent(ids.size());
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t i = 0; i < ids.size(); ++i) {
    for (std::size_t j = i + 1; j < ids.size(); ++j) {
      if (cosine_similarity(*nodes_.at(ids[i]).embedding, *nodes_.at(ids[j]).embedding) >= threshold) {
        auto a = find(i), b = find(j);
        if (a != b) parent[std::max(a, b)] = std::min(a, b);
      }
    }
  }
  std::map<std::size_t, int> label_of_root;
  std::map<NodeId, int> labels;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    auto root = find(i);
    auto [it, inserted] = label_of_root.emplace(root, static_cast<int>(label_of_root.size()));
    labels[ids[i]] = it->second;
  }
  return labels;
}

void KnowledgeGraph::set_clusters(const std::map<NodeId, int>& labels) {
  for (auto& [id, n] : nodes_) {
    auto it = labels.find(id);
    n.cluster_id = it == labels.end() ? std::nullopt : std::optional<int>(it->second);
  }
}

void KnowledgeGraph::set_partition(const CommunityPartition& partition) {
  for (auto& [id, n] : nodes_) {
    auto it = partition.assignment.find(id);
    n.community_id = it == partition.assignment.end() ? std::nullopt : std::optional<int>(it->second);
  }
}

CommunityPartition KnowledgeGraph::partition() const {
  CommunityPartition p;
  for (const auto& [id, n] : nodes_) {
    if (!n.community_id) return {};
    p.assignment[id] = *n.community_id;
  }
  return p;
}

void KnowledgeGraph::set_embedding(NodeId id, Embedding embedding) {
  auto it = nodes_.find(id);
  if (it == nodes_.end()) throw Error(ErrorKind::NotFound, "unknown node " + render_node_id(id));
  it->second.embedding = std::move(embedding);
}

void KnowledgeGraph::ensure_embeddings(EmbeddingProvider& embedder) {
  std::vector<NodeId> missing;
  std::vector<std::string> names;
  for (const auto& [id, n] : nodes_) {
    if (!n.embedding) {
      missing.push_back(id);
      names.push_back(n.name);
    }
  }
  if (missing.empty()) return;
  auto vecs = embedder.embed(names);
  for (std::size_t i = 0; i < missing.size(); ++i) nodes_.at(missing[i]).embedding = std::move(vecs[i]);
}

KnowledgeGraph kg_from_parts(std::vector<KnowledgeNode> nodes, std::vector<KnowledgeEdge> edges,
                             std::map<NodeId, NodeId> node_aliases, std::map<EdgeId, EdgeId> edge_aliases,
                             NodeId max_node_id, EdgeId max_edge_id) {
  KnowledgeGraph kg;
  for (auto& n : nodes) {
    if (n.id < 1 || !kg.nodes_.emplace(n.id, n).second) {
      throw Error(ErrorKind::Schema, "duplicate or invalid node " + render_node_id(n.id));
    }
    max_node_id = std::max(max_node_id, n.id);
  }
  for (auto& e : edges) {
    if (!kg.nodes_.count(e.source) || !kg.nodes_.count(e.target) || e.source == e.target) {
      throw Error(ErrorKind::Schema, "edge " + render_edge_id(e.id) + " has invalid endpoints");
    }
    if (e.id < 1 || !kg.edges_.emplace(e.id, e).second) {
      throw Error(ErrorKind::Schema, "duplicate or invalid edge " + render_edge_id(e.id));
    }
    max_edge_id = std::max(max_edge_id, e.id);
  }
  for (const auto& [a, t] : node_aliases) max_node_id = std::max(max_node_id, a);
  for (const auto& [a, t] : edge_aliases) max_edge_id = std::max(max_edge_id, a);
  kg.node_alias_ = std::move(node_aliases);
  kg.edge_alias_ = std::move(edge_aliases);
  kg.max_node_id_ = max_node_id;
  kg.max_edge_id_ = max_edge_id;
  kg.rebuild_adjacency();
  return kg;
}

std::size_t cross_neighbors(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId v) {
  const int own = partition.community_of(v);
  std::size_t n = 0;
  for (auto u : kg.neighbors(v)) n += partition.community_of(u) != own ? 1 : 0;
  return n;
}

double bridging_score(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId v) {
  const auto cross = cross_neighbors(kg, partition, v);
  const auto deg = kg.degree(v);
  return static_cast<double>(cross) / static_cast<double>(std::max<std::size_t>(deg, 1));
}

std::size_t degree_in_community(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId v) {
  const int own = partition.community_of(v);
  std::size_t n = 0;
  for (auto u : kg.neighbors(v)) n += partition.community_of(u) == own ? 1 : 0;
  return n;
}

double modularity(const KnowledgeGraph& kg, const CommunityPartition& partition, double resolution) {
  std::set<std::pair<NodeId, NodeId>> undirected;
  for (const auto& [id, e] : kg.edges()) undirected.emplace(std::min(e.source, e.target), std::max(e.source, e.target));
  const double m = static_cast<double>(undirected.size());
  if (m == 0) return 0.0;
  std::map<int, double> internal, degree_sum;
  for (const auto& [u, v] : undirected) {
    if (partition.community_of(u) == partition.community_of(v)) internal[partition.community_of(u)] += 1.0;
  }
  for (const auto& [id, n] : kg.nodes()) degree_sum[partition.community_of(id)] += static_cast<double>(kg.degree(id));
  double q = 0.0;
  for (const auto& [c, d] : degree_sum) {
    q += internal[c] / m - resolution * (d / (2.0 * m)) * (d / (2.0 * m));
  }
  return q;
}

namespace detail {

json kg_to_json(const KnowledgeGraph& kg) {
  json nodes = json::array();
  for (const auto& [id, n] : kg.nodes()) {
    json jn = {{"node_id", render_node_id(id)}, {"knowledge", n.name}, {"is_core_entity", n.is_core_entity}};
    jn["cluster_id"] = n.cluster_id ? json(*n.cluster_id) : json(nullptr);
    jn["community_id"] = n.community_id ? json(*n.community_id) : json(nullptr);
    if (n.embedding) jn["embedding"] = *n.embedding;
    nodes.push_back(std::move(jn));
  }
  json edges = json::array();
  for (const auto& [id, e] : kg.edges()) {
    edges.push_back({{"edge_id", render_edge_id(id)},
                     {"representation", kg.node(e.source).name + " - " + e.relation + " -> " + kg.node(e.target).name},
                     {"source_id", render_node_id(e.source)},
                     {"target_id", render_node_id(e.target)},
                     {"relation", e.relation},
                     {"evidence_ids", e.evidence_ids}});
  }
  json node_aliases = json::object();
  for (const auto& [a, t] : kg.node_aliases()) node_aliases[render_node_id(a)] = render_node_id(t);
  json edge_aliases = json::object();
  for (const auto& [a, t] : kg.edge_aliases()) edge_aliases[render_edge_id(a)] = render_edge_id(t);
  return {{"knowledge_nodes", nodes},
          {"knowledge_edges", edges},
          {"node_aliases", node_aliases},
          {"edge_aliases", edge_aliases},
          {"max_node_id", kg.max_node_id()},
          {"max_edge_id", kg.max_edge_id()}};
}

KnowledgeGraph kg_from_json(const json& j) {
  auto id_of = [](const json& v, char prefix) {
    auto parsed = v.is_string() ? parse_prefixed_id(v.get<std::string>(), prefix) : std::nullopt;
    if (!parsed) throw Error(ErrorKind::Schema, std::string("bad ") + prefix + "-id in knowledge graph document");
    return *parsed;
  };
  try {
    std::vector<KnowledgeNode> nodes;
    for (const auto& jn : j.at("knowledge_nodes")) {
      KnowledgeNode n;
      n.id = id_of(jn.at("node_id"), 'n');
      n.name = jn.at("knowledge").get<std::string>();
      n.is_core_entity = jn.at("is_core_entity").get<bool>();
      if (jn.contains("cluster_id") && !jn["cluster_id"].is_null()) n.cluster_id = jn["cluster_id"].get<int>();
      if (jn.contains("community_id") && !jn["community_id"].is_null()) n.community_id = jn["community_id"].get<int>();
      if (jn.contains("embedding")) n.embedding = jn["embedding"].get<Embedding>();
      nodes.push_back(std::move(n));
    }
    std::vector<KnowledgeEdge> edges;
    for (const auto& je : j.at("knowledge_edges")) {
      KnowledgeEdge e;
      e.id = id_of(je.at("edge_id"), 'e');
      e.source = id_of(je.at("source_id"), 'n');
      e.target = id_of(je.at("target_id"), 'n');
      e.relation = je.at("relation").get<std::string>();
      e.evidence_ids = je.at("evidence_ids").get<std::set<EvidenceId>>();
      edges.push_back(std::move(e));
    }
    const auto jn_aliases = j.value("node_aliases", json::object());
    const auto je_aliases = j.value("edge_aliases", json::object());
    std::map<NodeId, NodeId> node_aliases;
    for (const auto& [k, v] : jn_aliases.items()) {
      node_aliases[id_of(json(k), 'n')] = id_of(v, 'n');
    }
    std::map<EdgeId, EdgeId> edge_aliases;
    for (const auto& [k, v] : je_aliases.items()) {
      edge_aliases[id_of(json(k), 'e')] = id_of(v, 'e');
    }
    return kg_from_parts(std::move(nodes), std::move(edges), std::move(node_aliases), std::move(edge_aliases),
                         j.value("max_node_id", NodeId{0}), j.value("max_edge_id", EdgeId{0}));
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("knowledge graph document: ") + e.what());
  }
}

}  // namespace detail

std::string serialize_kg(const KnowledgeGraph& kg) { return detail::kg_to_json(kg).dump(2); }

KnowledgeGraph deserialize_kg(std::string_view text) {
  auto j = detail::parse_json_lenient(text);
  if (j.is_discarded()) throw Error(ErrorKind::Parse, "knowledge graph is not valid JSON");
  return detail::kg_from_json(j);
}

std::string kg_prompt_view(const KnowledgeGraph& kg, bool with_evidence) {
  using detail::json;
  json nodes = json::array();
  for (const auto& [id, n] : kg.nodes()) {
    nodes.push_back({{"node_id", render_node_id(id)}, {"knowledge", n.name}, {"is_core_entity", n.is_core_entity}});
  }
  json edges = json::array();
  for (const auto& [id, e] : kg.edges()) {
    json je = {{"edge_id", render_edge_id(id)},
               {"representation", kg.node(e.source).name + " - " + e.relation + " -> " + kg.node(e.target).name}};
    if (with_evidence) je["evidence_count"] = e.evidence_ids.size();
    edges.push_back(std::move(je));
  }
  return json{{"knowledge_nodes", nodes}, {"knowledge_edges", edges}}.dump(2);
}

}  // namespace dualgraph
