#include <algorithm>
#include <cmath>
#include <deque>
#include <map>
#include <numeric>
#include <vector>

#include "dualgraph/knowledge_graph.hpp"
#include "dualgraph/text_util.hpp"

namespace dualgraph {

namespace {

class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed ^ 0x6c656964656eULL) {}
  std::uint64_t next() { return splitmix64(state_); }
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  std::size_t below(std::size_t n) { return static_cast<std::size_t>(next() % n); }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[below(i)]);
  }

 private:
  std::uint64_t state_;
};

// Weighted undirected graph. adj excludes self loops; self[v] holds the weight
// of edges collapsed inside v by aggregation.
struct WGraph {
  int n = 0;
  std::vector<std::vector<std::pair<int, double>>> adj;
  std::vector<double> self;
  std::vector<double> strength;
  double m = 0.0;
};

std::vector<int> shuffled_order(int n, Rng& rng) {
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  rng.shuffle(order);
  return order;
}

int renumber(std::vector<int>& labels) {
  std::map<int, int> remap;
  for (auto& l : labels) {
    auto [it, inserted] = remap.emplace(l, static_cast<int>(remap.size()));
    l = it->second;
  }
  return static_cast<int>(remap.size());
}

// Fast local moving: greedy best move per node, revisiting neighbours of moved nodes.
void move_nodes(const WGraph& g, std::vector<int>& comm, double gamma, Rng& rng) {
  const int k = renumber(comm);
  std::vector<double> total(g.n, 0.0);
  std::vector<int> size(g.n, 0);
  for (int v = 0; v < g.n; ++v) {
    total[comm[v]] += g.strength[v];
    ++size[comm[v]];
  }
  std::vector<int> empty;
  for (int c = g.n - 1; c >= k; --c) empty.push_back(c);

  std::deque<int> queue;
  std::vector<char> queued(g.n, 1);
  for (int v : shuffled_order(g.n, rng)) queue.push_back(v);

  std::vector<double> w_to(g.n, 0.0);
  std::vector<int> touched;
  const double two_m = 2.0 * g.m;

  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    queued[v] = 0;
    const int cur = comm[v];
    const double kv = g.strength[v];

    touched.clear();
    for (auto [u, w] : g.adj[v]) {
      if (w_to[comm[u]] == 0.0) touched.push_back(comm[u]);
      w_to[comm[u]] += w;
    }
    total[cur] -= kv;
    --size[cur];
    if (size[cur] == 0) empty.push_back(cur);

    int best = cur;
    double best_gain = w_to[cur] - gamma * kv * total[cur] / two_m;
    for (int c : touched) {
      const double gain = w_to[c] - gamma * kv * total[c] / two_m;
      if (gain > best_gain + 1e-12) {
        best = c;
        best_gain = gain;
      }
    }
    if (size[cur] > 0 && 0.0 > best_gain + 1e-12) best = empty.back();
    for (int c : touched) w_to[c] = 0.0;

    if (size[best] == 0) empty.erase(std::find(empty.begin(), empty.end(), best));
    total[best] += kv;
    ++size[best];
    comm[v] = best;
    if (best != cur) {
      for (auto [u, w] : g.adj[v]) {
        if (comm[u] != best && !queued[u]) {
          queued[u] = 1;
          queue.push_back(u);
        }
      }
    }
  }
  renumber(comm);
}

// Refinement: inside each community, merge singletons into well-connected
// sub-communities, picking randomly with weight exp(gain / theta).
std::vector<int> refine(const WGraph& g, const std::vector<int>& comm, double gamma, double theta, Rng& rng) {
  std::vector<int> ref(g.n);
  std::iota(ref.begin(), ref.end(), 0);
  std::vector<double> ref_total(g.strength);
  std::vector<int> ref_size(g.n, 1);
  std::vector<double> comm_total(g.n, 0.0);
  for (int v = 0; v < g.n; ++v) comm_total[comm[v]] += g.strength[v];

  std::vector<double> inside(g.n, 0.0);  // weight from v to the rest of its community
  for (int v = 0; v < g.n; ++v) {
    for (auto [u, w] : g.adj[v]) {
      if (comm[u] == comm[v]) inside[v] += w;
    }
  }
  std::vector<double> ref_out(inside);  // weight from a refined set to the rest of its community

  const double two_m = 2.0 * g.m;
  std::vector<double> w_to(g.n, 0.0);
  std::vector<int> touched;
  std::vector<double> gains;

  for (int v : shuffled_order(g.n, rng)) {
    if (ref_size[ref[v]] != 1) continue;
    const int c = comm[v];
    const double kv = g.strength[v];
    if (inside[v] < gamma * kv * (comm_total[c] - kv) / two_m) continue;

    touched.clear();
    for (auto [u, w] : g.adj[v]) {
      if (comm[u] != c || ref[u] == ref[v]) continue;
      if (w_to[ref[u]] == 0.0) touched.push_back(ref[u]);
      w_to[ref[u]] += w;
    }
    std::vector<int> candidates{ref[v]};
    gains.assign(1, 0.0);
    for (int r : touched) {
      if (ref_out[r] < gamma * ref_total[r] * (comm_total[c] - ref_total[r]) / two_m) continue;
      const double gain = w_to[r] - gamma * kv * ref_total[r] / two_m;
      if (gain < 0.0) continue;
      candidates.push_back(r);
      gains.push_back(gain);
    }
    const double top = *std::max_element(gains.begin(), gains.end());
    std::vector<double> weight(gains.size());
    double sum = 0.0;
    for (std::size_t i = 0; i < gains.size(); ++i) sum += weight[i] = std::exp((gains[i] - top) / theta);
    double pick = rng.uniform() * sum;
    std::size_t chosen = 0;
    for (; chosen + 1 < weight.size(); ++chosen) {
      if (pick < weight[chosen]) break;
      pick -= weight[chosen];
    }
    const int target = candidates[chosen];
    if (target != ref[v]) {
      const int old = ref[v];
      ref_out[target] = ref_out[target] + ref_out[old] - 2.0 * w_to[target];
      ref_total[target] += kv;
      ++ref_size[target];
      ref_total[old] = 0.0;
      ref_size[old] = 0;
      ref[v] = target;
    }
    for (int r : touched) w_to[r] = 0.0;
  }
  renumber(ref);
  return ref;
}

WGraph aggregate(const WGraph& g, const std::vector<int>& groups, int count) {
  WGraph out;
  out.n = count;
  out.adj.resize(count);
  out.self.assign(count, 0.0);
  out.strength.assign(count, 0.0);
  out.m = g.m;
  std::vector<std::map<int, double>> acc(count);
  for (int v = 0; v < g.n; ++v) {
    const int a = groups[v];
    out.self[a] += g.self[v];
    out.strength[a] += g.strength[v];
    for (auto [u, w] : g.adj[v]) {
      const int b = groups[u];
      if (a == b) {
        out.self[a] += w / 2.0;
      } else {
        acc[a][b] += w;
      }
    }
  }
  for (int a = 0; a < count; ++a) out.adj[a].assign(acc[a].begin(), acc[a].end());
  return out;
}

// Splits every community into its connected components on the base graph.
std::vector<int> split_disconnected(const WGraph& g, const std::vector<int>& comm) {
  std::vector<int> out(g.n, -1);
  int next = 0;
  for (int s = 0; s < g.n; ++s) {
    if (out[s] != -1) continue;
    out[s] = next;
    std::vector<int> stack{s};
    while (!stack.empty()) {
      int v = stack.back();
      stack.pop_back();
      for (auto [u, w] : g.adj[v]) {
        if (out[u] == -1 && comm[u] == comm[s]) {
          out[u] = next;
          stack.push_back(u);
        }
      }
    }
    ++next;
  }
  return out;
}

}  // namespace

CommunityPartition detect_communities(const KnowledgeGraph& kg, std::uint64_t seed, const LeidenOptions& options) {
  CommunityPartition result;
  result.seed = seed;
  if (kg.empty()) return result;

  std::vector<NodeId> ids;
  std::map<NodeId, int> index;
  for (const auto& [id, n] : kg.nodes()) {
    index[id] = static_cast<int>(ids.size());
    ids.push_back(id);
  }

  WGraph base;
  base.n = static_cast<int>(ids.size());
  base.adj.resize(base.n);
  base.self.assign(base.n, 0.0);
  base.strength.assign(base.n, 0.0);
  for (int v = 0; v < base.n; ++v) {
    for (auto u : kg.neighbors(ids[v])) base.adj[v].emplace_back(index.at(u), 1.0);
    base.strength[v] = static_cast<double>(base.adj[v].size());
    base.m += base.strength[v];
  }
  base.m /= 2.0;

  std::vector<int> final_comm(base.n);
  std::iota(final_comm.begin(), final_comm.end(), 0);

  if (base.m > 0.0) {
    Rng rng(seed);
    WGraph g = base;
    std::vector<int> comm(g.n);
    std::iota(comm.begin(), comm.end(), 0);
    std::vector<int> member_of(base.n);  // base node -> node of the current level graph
    std::iota(member_of.begin(), member_of.end(), 0);

    for (int level = 0; level < options.max_levels; ++level) {
      move_nodes(g, comm, options.resolution, rng);
      const int k = *std::max_element(comm.begin(), comm.end()) + 1;
      if (k == g.n) break;

      auto ref = refine(g, comm, options.resolution, options.randomness, rng);
      int r = *std::max_element(ref.begin(), ref.end()) + 1;
      if (r == g.n) {
        ref = comm;
        r = k;
      }
      std::vector<int> next_comm(r);
      for (int v = 0; v < g.n; ++v) next_comm[ref[v]] = comm[v];
      for (auto& m : member_of) m = ref[m];
      g = aggregate(g, ref, r);
      comm = std::move(next_comm);
    }
    for (int v = 0; v < base.n; ++v) final_comm[v] = comm[member_of[v]];
    final_comm = split_disconnected(base, final_comm);
  }

  // ids are ascending, so first-seen order labels by smallest member id.
  std::map<int, int> label;
  for (int v = 0; v < base.n; ++v) {
    auto [it, inserted] = label.emplace(final_comm[v], static_cast<int>(label.size()));
    result.assignment[ids[v]] = it->second;
  }

  CommunityPartition singletons;
  for (int v = 0; v < base.n; ++v) singletons.assignment[ids[v]] = v;
  if (modularity(kg, result, options.resolution) < modularity(kg, singletons, options.resolution)) {
    singletons.seed = seed;
    return singletons;
  }
  return result;
}

}  // namespace dualgraph
