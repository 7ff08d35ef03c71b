#include "dualgraph/gap_discovery.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"
#include "json_io.hpp"

namespace dualgraph {

const char* to_string(ChainKind kind) {
  switch (kind) {
    case ChainKind::Enrich: return "enrich";
    case ChainKind::ExploreSim: return "explore_similarity";
    case ChainKind::ExploreSBM: return "explore_sbm";
    case ChainKind::ExploreHole: return "explore_structural_hole";
  }
  return "?";
}

const char* to_string(ScoreBasis basis) {
  switch (basis) {
    case ScoreBasis::Enrichment: return "enrichment";
    case ScoreBasis::Similarity: return "similarity";
    case ScoreBasis::SbmProbability: return "sbm_probability";
    case ScoreBasis::SbmEntropy: return "sbm_entropy";
    case ScoreBasis::StructuralHole: return "structural_hole";
  }
  return "?";
}

Quotas allocate_quotas(int n) {
  if (n < 1) throw Error(ErrorKind::Input, "chain budget must be at least 1");
  const int q = n / 4;
  return {q, q, n - 4 * q};
}

std::set<EdgeId> enrich_pool(const KnowledgeGraph& kg, int threshold) {
  std::set<EdgeId> pool;
  for (const auto& [id, e] : kg.edges()) {
    if (static_cast<long long>(e.evidence_ids.size()) <= threshold) pool.insert(id);
  }
  return pool;
}

double node_importance(const KnowledgeGraph& kg, NodeId u, NodeId v) {
  const int cores = (kg.node(u).is_core_entity ? 1 : 0) + (kg.node(v).is_core_entity ? 1 : 0);
  return cores == 2 ? 1.0 : cores == 1 ? 0.5 : 0.0;
}

double cross_community(const KnowledgeGraph& kg, const CommunityPartition& partition, NodeId u, NodeId v) {
  return 0.5 * (bridging_score(kg, partition, u) + bridging_score(kg, partition, v));
}

double enrichment_score(const KnowledgeGraph& kg, const CommunityPartition& partition, EdgeId id) {
  const auto& e = kg.edge(id);
  return (1.0 + node_importance(kg, e.source, e.target) + cross_community(kg, partition, e.source, e.target)) /
         (1.0 + static_cast<double>(e.evidence_ids.size()));
}

std::vector<SearchChain> rank_enrich(const KnowledgeGraph& kg, const CommunityPartition& partition, int threshold,
                                     std::size_t quota) {
  std::vector<SearchChain> out;
  for (auto id : enrich_pool(kg, threshold)) {
    const auto& e = kg.edge(id);
    SearchChain c;
    c.kind = ChainKind::Enrich;
    c.source = e.source;
    c.target = e.target;
    c.relation_pattern = e.relation;
    c.score = enrichment_score(kg, partition, id);
    c.score_basis = ScoreBasis::Enrichment;
    c.edge = id;
    out.push_back(std::move(c));
  }
  std::stable_sort(out.begin(), out.end(), [&](const SearchChain& a, const SearchChain& b) {
    const bool za = kg.edge(a.edge).evidence_ids.empty();
    const bool zb = kg.edge(b.edge).evidence_ids.empty();
    if (za != zb) return za;
    if (a.score != b.score) return a.score > b.score;
    return a.edge < b.edge;
  });
  if (out.size() > quota) out.resize(quota);
  return out;
}

SbmBlockMatrix sbm_block_matrix(const KnowledgeGraph& kg, const CommunityPartition& partition, double alpha) {
  if (!(alpha > 0.0)) throw Error(ErrorKind::Domain, "SBM smoothing constant must be positive");
  SbmBlockMatrix sbm;
  sbm.alpha = alpha;
  const int k = partition.community_count();
  sbm.sizes.assign(k, 0);
  for (const auto& [id, n] : kg.nodes()) ++sbm.sizes[partition.community_of(id)];

  std::vector<std::vector<double>> actual(k, std::vector<double>(k, 0.0));
  for (const auto& [v, nbrs] : kg.nodes()) {
    for (auto u : kg.neighbors(v)) {
      if (u <= v) continue;
      const int a = partition.community_of(u), b = partition.community_of(v);
      actual[a][b] += 1.0;
      if (a != b) actual[b][a] += 1.0;
    }
  }
  sbm.b.assign(k, std::vector<double>(k, 0.0));
  for (int i = 0; i < k; ++i) {
    for (int j = 0; j < k; ++j) {
      const double ni = static_cast<double>(sbm.sizes[i]), nj = static_cast<double>(sbm.sizes[j]);
      const double possible = i == j ? ni * (ni - 1.0) / 2.0 : ni * nj;
      sbm.b[i][j] = (actual[i][j] + alpha) / (possible + 2.0 * alpha);
    }
  }
  return sbm;
}

double bernoulli_entropy(double p) {
  if (!(p > 0.0 && p < 1.0)) throw Error(ErrorKind::Domain, "entropy needs 0 < p < 1");
  return -p * std::log2(p) - (1.0 - p) * std::log2(1.0 - p);
}

NodePair unordered(NodeId a, NodeId b) { return {std::min(a, b), std::max(a, b)}; }

std::vector<SearchChain> explore_type1(const KnowledgeGraph& kg, std::size_t m) {
  std::vector<NodeId> cores, concepts;
  for (const auto& [id, n] : kg.nodes()) (n.is_core_entity ? cores : concepts).push_back(id);

  std::vector<SearchChain> out;
  for (auto c : cores) {
    for (auto k : concepts) {
      if (kg.connected(c, k)) continue;
      const auto& ec = kg.node(c).embedding;
      const auto& ek = kg.node(k).embedding;
      if (!ec || !ek) {
        throw Error(ErrorKind::Precondition,
                    "similarity needs embeddings for " + render_node_id(c) + " and " + render_node_id(k));
      }
      SearchChain ch;
      ch.kind = ChainKind::ExploreSim;
      ch.source = c;
      ch.target = k;
      ch.relation_pattern = "hypothesized relation";
      ch.score = cosine_similarity(*ec, *ek);
      ch.score_basis = ScoreBasis::Similarity;
      out.push_back(std::move(ch));
    }
  }
  std::stable_sort(out.begin(), out.end(), [](const SearchChain& a, const SearchChain& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  if (out.size() > m) out.resize(m);
  return out;
}

namespace {

// Type II in full selection order: ceil(m/2) by probability, floor(m/2) by
// entropy, then everything left by probability.
std::vector<SearchChain> type2_ranked(const KnowledgeGraph& kg, const CommunityPartition& partition,
                                      const SbmBlockMatrix& sbm, std::size_t m, const std::set<NodePair>& excluded) {
  struct Cand {
    NodeId i, j;
    double p, h;
  };
  std::vector<Cand> pool;
  for (auto it = kg.nodes().begin(); it != kg.nodes().end(); ++it) {
    for (auto jt = std::next(it); jt != kg.nodes().end(); ++jt) {
      const NodeId i = it->first, j = jt->first;
      const int ci = partition.community_of(i), cj = partition.community_of(j);
      if (ci == cj || kg.connected(i, j) || excluded.count({i, j})) continue;
      const double p = sbm.at(ci, cj);
      pool.push_back({i, j, p, bernoulli_entropy(p)});
    }
  }
  auto by_p = [](const Cand& a, const Cand& b) {
    if (a.p != b.p) return a.p > b.p;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  };
  auto by_h = [](const Cand& a, const Cand& b) {
    if (a.h != b.h) return a.h > b.h;
    return std::tie(a.i, a.j) < std::tie(b.i, b.j);
  };
  std::stable_sort(pool.begin(), pool.end(), by_p);

  std::vector<SearchChain> out;
  auto emit = [&](const Cand& c, ScoreBasis basis) {
    SearchChain ch;
    ch.kind = ChainKind::ExploreSBM;
    ch.source = c.i;
    ch.target = c.j;
    ch.relation_pattern = "hypothesized cross-community relation";
    ch.score = basis == ScoreBasis::SbmEntropy ? c.h : c.p;
    ch.score_basis = basis;
    out.push_back(std::move(ch));
  };

  const std::size_t prob_half = m == kAll ? pool.size() : (m + 1) / 2;
  const std::size_t ent_half = m == kAll ? 0 : m / 2;
  const std::size_t first = std::min(prob_half, pool.size());
  for (std::size_t k = 0; k < first; ++k) emit(pool[k], ScoreBasis::SbmProbability);

  std::vector<Cand> rest(pool.begin() + static_cast<std::ptrdiff_t>(first), pool.end());
  std::vector<Cand> by_entropy = rest;
  std::stable_sort(by_entropy.begin(), by_entropy.end(), by_h);
  const std::size_t second = std::min(ent_half, by_entropy.size());
  std::set<NodePair> taken;
  for (std::size_t k = 0; k < second; ++k) {
    emit(by_entropy[k], ScoreBasis::SbmEntropy);
    taken.insert({by_entropy[k].i, by_entropy[k].j});
  }
  for (const auto& c : rest) {
    if (!taken.count({c.i, c.j})) emit(c, ScoreBasis::SbmProbability);
  }
  return out;
}

}  // namespace

std::vector<SearchChain> explore_type2(const KnowledgeGraph& kg, const CommunityPartition& partition,
                                       const SbmBlockMatrix& sbm, std::size_t m, const std::set<NodePair>& excluded) {
  auto out = type2_ranked(kg, partition, sbm, m, excluded);
  if (out.size() > m) out.resize(m);
  return out;
}

std::vector<SearchChain> explore_type3(const KnowledgeGraph& kg, const CommunityPartition& partition) {
  const int k = partition.community_count();
  std::vector<std::vector<NodeId>> members(k);
  for (const auto& [id, n] : kg.nodes()) members[partition.community_of(id)].push_back(id);

  std::vector<std::vector<NodeId>> sources(k);  // bridges then hubs
  std::vector<NodeId> rep(k, 0);
  for (int c = 0; c < k; ++c) {
    std::vector<NodeId> bridges;
    for (auto v : members[c]) {
      if (cross_neighbors(kg, partition, v) > 0) bridges.push_back(v);
    }
    std::stable_sort(bridges.begin(), bridges.end(), [&](NodeId a, NodeId b) {
      return bridging_score(kg, partition, a) > bridging_score(kg, partition, b);
    });
    if (bridges.size() > 3) bridges.resize(3);

    std::vector<NodeId> by_deg = members[c];
    std::stable_sort(by_deg.begin(), by_deg.end(), [&](NodeId a, NodeId b) {
      return degree_in_community(kg, partition, a) > degree_in_community(kg, partition, b);
    });
    rep[c] = by_deg.front();

    std::vector<NodeId> hubs;
    for (auto v : by_deg) {
      if (hubs.size() == 2) break;
      if (std::find(bridges.begin(), bridges.end(), v) == bridges.end()) hubs.push_back(v);
    }
    sources[c] = bridges;
    sources[c].insert(sources[c].end(), hubs.begin(), hubs.end());
  }

  std::vector<SearchChain> all;
  for (int c1 = 0; c1 < k; ++c1) {
    for (int c2 = 0; c2 < k; ++c2) {
      if (c1 == c2) continue;
      for (auto x : sources[c1]) {
        if (kg.connected(x, rep[c2])) continue;
        SearchChain ch;
        ch.kind = ChainKind::ExploreHole;
        ch.source = x;
        ch.target = rep[c2];
        ch.relation_pattern = "hypothesized bridging relation";
        ch.score = bridging_score(kg, partition, x);
        ch.score_basis = ScoreBasis::StructuralHole;
        all.push_back(std::move(ch));
      }
    }
  }
  std::stable_sort(all.begin(), all.end(), [](const SearchChain& a, const SearchChain& b) {
    if (a.score != b.score) return a.score > b.score;
    return std::tie(a.source, a.target) < std::tie(b.source, b.target);
  });
  std::vector<SearchChain> out;
  std::set<NodePair> seen;
  for (auto& ch : all) {
    if (seen.insert(unordered(ch.source, ch.target)).second) out.push_back(std::move(ch));
  }
  return out;
}

std::vector<SearchChain> build_search_chains(const KnowledgeGraph& kg, const CommunityPartition& partition,
                                             const ChainConfig& config) {
  const auto q = allocate_quotas(config.n);
  if (kg.empty()) return {};
  const std::size_t m = static_cast<std::size_t>(q.per_explore_type);

  auto enrich = rank_enrich(kg, partition, config.enrich_threshold);
  auto type1 = explore_type1(kg);
  auto type3 = explore_type3(kg, partition);

  // picked[c] holds selected chains per category: 0 enrich, 1 I, 2 II, 3 III
  std::vector<std::vector<SearchChain>> picked(4);
  std::vector<std::size_t> cursor(4, 0);
  std::set<NodePair> explore_pairs;

  auto take_from = [&](int cat, const std::vector<SearchChain>& list) {
    while (cursor[cat] < list.size()) {
      const auto& ch = list[cursor[cat]++];
      if (cat != 0 && !explore_pairs.insert(unordered(ch.source, ch.target)).second) continue;
      picked[cat].push_back(ch);
      return true;
    }
    return false;
  };

  for (std::size_t i = 0; i < static_cast<std::size_t>(q.enrich) && take_from(0, enrich); ++i) {}
  for (std::size_t i = 0; i < m && take_from(1, type1); ++i) {}
  for (std::size_t i = 0; i < m && take_from(3, type3); ++i) {}
  auto type2 = type2_ranked(kg, partition, sbm_block_matrix(kg, partition, config.sbm_alpha), m, explore_pairs);
  for (std::size_t i = 0; i < m && take_from(2, type2); ++i) {}

  std::size_t used = 0;
  for (const auto& p : picked) used += p.size();
  std::size_t leftover = static_cast<std::size_t>(config.n) - used;
  const std::vector<const std::vector<SearchChain>*> lists{&enrich, &type1, &type2, &type3};
  while (leftover > 0) {
    bool progressed = false;
    for (int cat = 0; cat < 4 && leftover > 0; ++cat) {
      if (take_from(cat, *lists[cat])) {
        --leftover;
        progressed = true;
      }
    }
    if (!progressed) break;
  }

  std::vector<SearchChain> out;
  for (auto& p : picked) {
    for (auto& ch : p) out.push_back(std::move(ch));
  }
  for (std::size_t i = 0; i < out.size(); ++i) out[i].chain_id = "chain_" + std::to_string(i + 1);
  return out;
}

std::string render_chain_candidates(const KnowledgeGraph& kg, const std::vector<SearchChain>& chains) {
  std::ostringstream out;
  for (const auto& ch : chains) {
    out << ch.chain_id << "; type: " << (ch.kind == ChainKind::Enrich ? "enrich" : "explore") << "; "
        << kg.node(ch.source).name << " → " << ch.relation_pattern << " → " << kg.node(ch.target).name
        << '\n';
  }
  return out.str();
}

namespace detail {

json chains_to_json(const std::vector<SearchChain>& chains) {
  json arr = json::array();
  for (const auto& ch : chains) {
    json j = {{"chain_id", ch.chain_id},
              {"kind", to_string(ch.kind)},
              {"source", render_node_id(ch.source)},
              {"target", render_node_id(ch.target)},
              {"relation_pattern", ch.relation_pattern},
              {"score", ch.score},
              {"score_basis", to_string(ch.score_basis)}};
    if (ch.kind == ChainKind::Enrich) j["edge"] = render_edge_id(ch.edge);
    arr.push_back(std::move(j));
  }
  return arr;
}

}  // namespace detail

std::string serialize_chains(const std::vector<SearchChain>& chains) { return detail::chains_to_json(chains).dump(2); }

}  // namespace dualgraph
