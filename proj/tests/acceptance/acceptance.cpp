#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <queue>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "dualgraph/errors.hpp"
#include "dualgraph/gap_discovery.hpp"
#include "dualgraph/mock_providers.hpp"
#include "dualgraph/orchestrator.hpp"
#include "dualgraph/outline.hpp"
#include "dualgraph/parsers.hpp"
#include "dualgraph/sim_harness.hpp"
#include "fuzz.hpp"
#include "oracles.hpp"
#include "outline_gen.hpp"
#include "raw_graph.hpp"
#include "test_common.hpp"

using namespace dualgraph;
using testsupport::RawGraph;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;
};

// Collects the first few mismatches of a criterion.
class Check {
 public:
  void expect(bool ok, const std::string& what) {
    if (ok) return;
    ++failures_;
    if (failures_ <= 3) notes_ += (notes_.empty() ? "" : "; ") + what;
  }
  bool near(double got, double want, double rel = 1e-9) {
    return std::abs(got - want) <= rel * std::max(1.0, std::abs(want));
  }
  Outcome outcome(const std::string& summary) const {
    if (failures_ == 0) return {true, summary};
    return {false, std::to_string(failures_) + " mismatches: " + notes_};
  }
  int failures() const { return failures_; }

 private:
  int failures_ = 0;
  std::string notes_;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

std::string fixed(double x, int digits = 2) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", digits, x);
  return buf;
}

RawGraph raw(int n, std::vector<int> community, std::vector<int> cores = {}) {
  RawGraph g;
  g.n = n;
  g.core.assign(n + 1, false);
  for (int c : cores) g.core[c] = true;
  g.embedding.assign(n + 1, {1.0, 0.0, 0.0});
  g.community.assign(n + 1, 0);
  for (int v = 1; v <= n; ++v) g.community[v] = community[v - 1];
  return g;
}

void add(RawGraph& g, int u, int v, int evidence = 0) { g.edges.push_back({u, v, "relates", evidence}); }

Outcome formula_oracles() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(101);
  int graphs = 0;
  for (; graphs < 150; ++graphs) {
    const auto g = testsupport::random_graph(rng);
    const auto kg = testsupport::to_kg(g);
    const auto p = testsupport::to_partition(g);
    for (std::size_t i = 0; i < g.edges.size(); ++i) {
      c.expect(c.near(enrichment_score(kg, p, static_cast<EdgeId>(i + 1)),
                      testsupport::oracle_enrichment(g, static_cast<int>(i))),
               "enrichment");
    }
    for (int v = 1; v <= g.n; ++v) {
      c.expect(c.near(bridging_score(kg, p, v), testsupport::oracle_bridging(g, v)), "bridging");
      c.expect(static_cast<int>(degree_in_community(kg, p, v)) == testsupport::oracle_deg_in(g, v), "deg_in");
    }
    if (g.n > 0) {
      const auto b = sbm_block_matrix(kg, p, 0.1).b;
      const auto want = testsupport::oracle_sbm(g, 0.1);
      c.expect(b.size() == want.size(), "sbm shape");
      for (std::size_t i = 0; i < std::min(b.size(), want.size()); ++i) {
        for (std::size_t j = 0; j < want[i].size(); ++j) c.expect(c.near(b[i][j], want[i][j]), "sbm");
      }
    }
    const double q = std::uniform_real_distribution<double>(1e-6, 1.0 - 1e-6)(rng);
    c.expect(c.near(bernoulli_entropy(q), testsupport::oracle_entropy(q)), "entropy");
  }

  // Hand-evaluated examples.
  {
    auto g = raw(2, {0, 0}, {1, 2});
    add(g, 1, 2, 0);
    c.expect(c.near(enrichment_score(testsupport::to_kg(g), testsupport::to_partition(g), 1), 2.0), "enrichment 2.0");
    auto h = raw(6, {0, 0, 1, 1, 1, 1}, {1});
    add(h, 1, 2, 1);
    for (int x = 3; x <= 6; ++x) add(h, 1, x);
    c.expect(c.near(enrichment_score(testsupport::to_kg(h), testsupport::to_partition(h), 1), 0.95), "enrichment 0.95");
    auto k = raw(2, {0, 0});
    add(k, 1, 2, 3);
    c.expect(c.near(enrichment_score(testsupport::to_kg(k), testsupport::to_partition(k), 1), 0.25), "enrichment 0.25");
  }
  {
    auto star = raw(6, {0, 0, 0, 0, 1, 1});
    for (int x = 2; x <= 6; ++x) add(star, 1, x);
    const auto kg = testsupport::to_kg(star);
    const auto p = testsupport::to_partition(star);
    c.expect(c.near(bridging_score(kg, p, 1), 0.4), "bridging 0.4");
    c.expect(degree_in_community(kg, p, 1) == 3, "deg_in 3");
    auto lone = raw(1, {0});
    c.expect(bridging_score(testsupport::to_kg(lone), testsupport::to_partition(lone), 1) == 0.0, "bridging 0");
    c.expect(degree_in_community(testsupport::to_kg(lone), testsupport::to_partition(lone), 1) == 0, "deg_in 0");
    auto s3 = raw(4, {0, 1, 1, 2});
    for (int x = 2; x <= 4; ++x) add(s3, 1, x);
    c.expect(c.near(bridging_score(testsupport::to_kg(s3), testsupport::to_partition(s3), 1), 1.0), "bridging 1.0");
    auto s4 = raw(5, {0, 0, 0, 0, 0});
    for (int x = 2; x <= 5; ++x) add(s4, 1, x);
    c.expect(degree_in_community(testsupport::to_kg(s4), testsupport::to_partition(s4), 1) == 4, "deg_in 4");
  }
  {
    auto g = raw(7, {0, 0, 0, 1, 1, 1, 1});
    add(g, 1, 4);
    add(g, 2, 5);
    const double b = sbm_block_matrix(testsupport::to_kg(g), testsupport::to_partition(g), 0.1).at(0, 1);
    c.expect(c.near(b, 2.1 / 12.2), "sbm 2.1/12.2");
    c.expect(std::abs(b - 0.172131) < 5e-7, "sbm 0.172131");
    auto h = raw(3, {0, 0, 0});
    add(h, 1, 2);
    c.expect(c.near(sbm_block_matrix(testsupport::to_kg(h), testsupport::to_partition(h), 0.1).at(0, 0), 0.34375),
             "sbm 0.34375");
    const auto e = raw(4, {0, 0, 1, 1});
    c.expect(c.near(sbm_block_matrix(testsupport::to_kg(e), testsupport::to_partition(e), 0.1).at(0, 1), 0.1 / 4.2),
             "sbm 0.1/4.2");
  }
  c.expect(c.near(bernoulli_entropy(0.5), 1.0), "H(0.5)");
  c.expect(std::abs(bernoulli_entropy(0.25) - 0.811278) < 5e-7, "H(0.25)");
  c.expect(c.near(bernoulli_entropy(0.25), 2.0 - 0.75 * std::log2(3.0)), "H(0.25) closed form");
  c.expect(c.near(bernoulli_entropy(0.1), bernoulli_entropy(0.9)), "H symmetry");

  const double secs = seconds_since(start);
  c.expect(secs < 5.0, "runtime " + fixed(secs) + " s");
  return c.outcome(std::to_string(graphs) + " graphs, " + fixed(secs) + " s");
}

Outcome pipeline_equivalence() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  std::mt19937_64 rng(202);
  int graphs = 0;
  for (int trial = 0; trial < 700; ++trial) {
    testsupport::RandomGraphOptions opts;
    opts.max_nodes = 12;
    opts.edge_probability = std::uniform_real_distribution<double>(0.1, 0.6)(rng);
    opts.max_communities = std::uniform_int_distribution<int>(1, 5)(rng);
    const auto g = testsupport::random_graph(rng, opts);
    if (g.n > 12) continue;
    ++graphs;
    const int n = std::uniform_int_distribution<int>(1, 30)(rng);
    const int threshold = std::uniform_int_distribution<int>(0, 3)(rng);
    const auto got = build_search_chains(testsupport::to_kg(g), testsupport::to_partition(g), {n, threshold, 0.1});
    const auto want = testsupport::oracle_chains(g, n, threshold, 0.1);
    bool same = got.size() == want.size();
    for (std::size_t i = 0; same && i < got.size(); ++i) {
      same = to_string(got[i].kind) == want[i].kind && to_string(got[i].score_basis) == want[i].basis &&
             got[i].source == want[i].source && got[i].target == want[i].target && got[i].edge == want[i].edge &&
             got[i].chain_id == want[i].chain_id && c.near(got[i].score, want[i].score);
    }
    c.expect(same, "graph " + std::to_string(trial) + " (n=" + std::to_string(g.n) + ", N=" + std::to_string(n) + ")");
  }
  const double secs = seconds_since(start);
  c.expect(graphs >= 500, "only " + std::to_string(graphs) + " graphs");
  c.expect(secs < 60.0, "runtime " + fixed(secs) + " s");
  return c.outcome(std::to_string(graphs) + " graphs, " + fixed(secs) + " s");
}

Outcome quota_law() {
  Check c;
  // An abundant graph: every category has at least 17 candidates after cross-type exclusion.
  std::mt19937_64 rng(303);
  testsupport::RandomGraphOptions opts;
  opts.min_nodes = 90;
  opts.max_nodes = 90;
  opts.core_probability = 0.3;
  opts.edge_probability = 0.06;
  opts.max_evidence = 1;
  opts.max_communities = 8;
  std::optional<RawGraph> found;
  for (int attempt = 0; attempt < 200 && !found; ++attempt) {
    auto g = testsupport::random_graph(rng, opts);
    const auto kg = testsupport::to_kg(g);
    const auto p = testsupport::to_partition(g);
    if (rank_enrich(kg, p, 1).size() < 17 || explore_type1(kg).size() < 40) continue;
    std::set<NodePair> taken;
    for (const auto& ch : explore_type1(kg, 17)) taken.insert(unordered(ch.source, ch.target));
    std::size_t hole = 0;
    for (const auto& ch : explore_type3(kg, p)) hole += taken.insert(unordered(ch.source, ch.target)).second ? 1 : 0;
    if (hole < 17) continue;
    if (explore_type2(kg, p, sbm_block_matrix(kg, p, 0.1), kAll, taken).size() < 17) continue;
    found = g;
  }
  if (!found) return {false, "no abundant graph generated"};
  const auto kg = testsupport::to_kg(*found);
  const auto p = testsupport::to_partition(*found);
  for (int n = 1; n <= 64; ++n) {
    const auto chains = build_search_chains(kg, p, {n, 1, 0.1});
    const int q = n / 4;
    const int l = n - 4 * q;
    std::map<ChainKind, int> k;
    for (const auto& ch : chains) ++k[ch.kind];
    const std::string at = "N=" + std::to_string(n);
    c.expect(k[ChainKind::Enrich] == q + (l >= 1), at + " enrich " + std::to_string(k[ChainKind::Enrich]));
    c.expect(k[ChainKind::ExploreSim] == q + (l >= 2), at + " type I " + std::to_string(k[ChainKind::ExploreSim]));
    c.expect(k[ChainKind::ExploreSBM] == q + (l >= 3), at + " type II " + std::to_string(k[ChainKind::ExploreSBM]));
    c.expect(k[ChainKind::ExploreHole] == q, at + " type III " + std::to_string(k[ChainKind::ExploreHole]));
    c.expect(static_cast<int>(chains.size()) == n, at + " total");
  }
  // Total never exceeds N on scarce graphs either.
  std::mt19937_64 scarce(304);
  for (int trial = 0; trial < 300; ++trial) {
    const auto g = testsupport::random_graph(scarce);
    const auto gk = testsupport::to_kg(g);
    const auto gp = testsupport::to_partition(g);
    const int n = std::uniform_int_distribution<int>(1, 64)(scarce);
    c.expect(static_cast<int>(build_search_chains(gk, gp, {n, 1, 0.1}).size()) <= n, "total > N");
  }
  return c.outcome("N = 1..64 on a " + std::to_string(found->n) + "-node graph, 300 scarce graphs");
}

Outcome citation_persistence() {
  Check c;
  std::mt19937_64 rng(404);
  HashEmbedder embed(32, 4);
  EvidenceBank bank;
  const EvidenceId max_id = 40;
  for (EvidenceId i = 1; i <= max_id; ++i) {
    bank.add("https://evidence.example/" + std::to_string(i), "t", "q", "s", "c", 0);
  }
  int sequences = 0, steps = 0;
  for (; sequences < 250; ++sequences) {
    auto og = testsupport::random_outline(rng, 5, max_id, 0.4);
    const int length = std::uniform_int_distribution<int>(1, 6)(rng);
    for (int s = 0; s < length; ++s, ++steps) {
      const auto before = all_citations(og);
      const auto revision = testsupport::random_revision(rng, og, max_id);
      const auto next = apply_revision(og, revision, bank, embed).outline;
      const auto after = all_citations(next);
      c.expect(std::includes(after.begin(), after.end(), before.begin(), before.end()),
               "sequence " + std::to_string(sequences) + " step " + std::to_string(s));
      og = next;
    }
  }
  return c.outcome(std::to_string(sequences) + " sequences, " + std::to_string(steps) + " revisions");
}

std::string score_doc(const std::vector<double>& s) {
  std::string out = "{";
  const auto& dims = early_stop_dimensions();
  for (std::size_t i = 0; i < dims.size(); ++i) {
    out += (i ? ", " : "") + ("\"" + dims[i] + "\": ") + fixed(s[i], 0);
  }
  return out + "}";
}

// Outlines of every checkpoint of the bundled fixture run.
std::vector<OutlineGraph> fixture_outlines() {
  const auto fixture = testsupport::investors_fixture();
  const auto config = testsupport::investors_config();
  Orchestrator o(config, make_fixture_providers(fixture, config.seed));
  auto state = o.init_run(fixture.root_query);
  std::vector<OutlineGraph> out{state.og};
  while (o.should_continue(state)) {
    o.run_iteration(state);
    out.push_back(state.og);
  }
  return out;
}

Outcome support_rule() {
  Check c;
  std::vector<OutlineGraph> outlines = fixture_outlines();
  const std::size_t from_fixture = outlines.size();
  std::mt19937_64 rng(505);
  for (int i = 0; i < 60; ++i) outlines.push_back(testsupport::random_outline(rng, 5, 30, 0.6));

  std::vector<std::vector<double>> vectors;
  for (double v : {0.0, 50.0, 74.0, 75.0, 90.0, 100.0}) vectors.push_back(std::vector<double>(6, v));
  for (int i = 0; i < 20; ++i) {
    std::vector<double> v;
    for (int d = 0; d < 6; ++d) v.push_back(std::uniform_int_distribution<int>(0, 100)(rng));
    vectors.push_back(v);
  }
  int evaluations = 0;
  for (const auto& og : outlines) {
    const auto stripped = testsupport::strip_citations(og);
    for (const auto& v : vectors) {
      Orchestrator o({}, {std::make_shared<ScriptedChat>(std::vector<ScriptEntry>{{"early_stop", {}, score_doc(v), 1}}),
                          std::make_shared<FixtureSearch>(), std::make_shared<FixtureFetch>(),
                          std::make_shared<HashEmbedder>()});
      const auto r = o.evaluate_early_stop("q", stripped, 2);
      ++evaluations;
      c.expect(r.scores.count("support") && r.scores.at("support") == 0.0, "support not zeroed");
      c.expect(!r.stop, "stopped without citations");
    }
  }
  return c.outcome(std::to_string(outlines.size()) + " outlines (" + std::to_string(from_fixture) +
                   " from the fixture run), " + std::to_string(evaluations) + " evaluations");
}

std::vector<TraceEvent> expected_dual_trace(int iterations, int stop_checks_from, bool early_stop) {
  std::vector<TraceEvent> t{{0, "CreateOutline"}, {0, "GenFromOG"}, {0, "Search"}, {0, "BuildKG"}};
  for (int i = 0; i < iterations; ++i) {
    t.push_back({i, "GenFromKG"});
    if (i > 0) t.push_back({i, "GenFromOG"});
    for (const char* s : {"Dedup", "Search", "UpdateKG", "UpdateOG"}) t.push_back({i, s});
    if (early_stop && i >= stop_checks_from) t.push_back({i, "EarlyStop"});
  }
  t.push_back({iterations, "WriteReport"});
  return t;
}

Outcome algorithm_fidelity() {
  Check c;
  std::size_t outline_only_runs = 0;
  // Outline-only on simulated worlds.
  for (std::uint64_t seed = 1; seed <= 6; ++seed) {
    const auto world = sim::generate_world(seed, sim::WorldParams{});
    RunConfig config;
    config.seed = seed;
    config.variant = Variant::OutlineOnly;
    Orchestrator o(config, sim::simulated_providers(world, {}, seed));
    auto state = o.init_run(world.root_query);
    while (o.should_continue(state)) o.run_iteration(state);
    o.write_report(state);
    c.expect(o.kg_operations() == 0, "outline-only seed " + std::to_string(seed) + " ran KG operations");
    c.expect(!state.kg.has_value(), "outline-only built a KG");
    for (const auto& e : o.trace()) {
      c.expect(e.step != "BuildKG" && e.step != "GenFromKG" && e.step != "UpdateKG", "outline-only step " + e.step);
    }
    ++outline_only_runs;
  }

  // Dual-graph trace on the bundled fixture.
  const auto fixture = testsupport::investors_fixture();
  const auto config = testsupport::investors_config();
  Orchestrator o(config, make_fixture_providers(fixture, config.seed));
  auto state = o.init_run(fixture.root_query);
  while (o.should_continue(state)) o.run_iteration(state);
  o.write_report(state);
  const auto want = expected_dual_trace(state.iteration, 1, config.early_stop);
  c.expect(o.trace() == want, "dual-graph trace differs (" + std::to_string(o.trace().size()) + " vs " +
                                  std::to_string(want.size()) + " steps)");
  c.expect(o.kg_operations() > 0, "dual-graph ran no KG operations");
  return c.outcome(std::to_string(outline_only_runs) + " outline-only runs with 0 KG operations; fixture trace of " +
                   std::to_string(want.size()) + " steps over " + std::to_string(state.iteration) + " iterations");
}

Outcome determinism() {
  Check c;
  const auto fixture = testsupport::investors_fixture();
  const auto config = testsupport::investors_config();
  std::vector<std::map<std::string, std::string>> trees;
  for (int i = 0; i < 3; ++i) {
    const auto dir = testsupport::scratch_dir("acceptance_determinism_" + std::to_string(i));
    execute_run(dir, fixture.root_query, config, make_fixture_providers(fixture, config.seed), false);
    trees.push_back(testsupport::read_tree(dir));
  }
  c.expect(trees[0] == trees[1] && trees[1] == trees[2], "run directories differ");

  sim::AblationConfig ablation;
  ablation.world.n_concepts = 27;
  std::vector<std::string> outputs;
  for (int parallelism : {1, 3, 0}) {
    ablation.parallelism = parallelism;
    const auto r = sim::run_ablation({1, 2, 3, 4, 5, 6}, ablation);
    outputs.push_back(sim::metrics_tsv(r) + sim::plot_data_tsv(r) + sim::summary_json(r));
  }
  c.expect(outputs[0] == outputs[1] && outputs[1] == outputs[2], "ablation output differs");
  return c.outcome("3 run directories of " + std::to_string(trees[0].size()) + " files identical; ablation identical");
}

Outcome directional_ablation() {
  const auto start = std::chrono::steady_clock::now();
  Check c;
  sim::AblationConfig config;
  std::vector<std::uint64_t> seeds;
  for (std::uint64_t s = 1; s <= 10; ++s) seeds.push_back(s);
  const auto r = sim::run_ablation(seeds, config);
  const double dual = r.mean_termination(Variant::DualGraph);
  const double outline = r.mean_termination(Variant::OutlineOnly);
  const int ahead = r.pairs_dual_ahead(2);
  const double secs = seconds_since(start);
  c.expect(config.world.n_communities >= 3, "fewer than 3 communities");
  c.expect(dual <= outline, "mean termination " + fixed(dual) + " > " + fixed(outline));
  c.expect(ahead >= 7, "dual-graph ahead at iteration 2 in " + std::to_string(ahead) + "/10 pairs");
  c.expect(secs < 300.0, "runtime " + fixed(secs) + " s");
  return c.outcome("termination " + fixed(dual) + " vs " + fixed(outline) + ", coverage@2 " +
                   fixed(r.mean_coverage_at(Variant::DualGraph, 2), 3) + " vs " +
                   fixed(r.mean_coverage_at(Variant::OutlineOnly, 2), 3) + ", ahead in " + std::to_string(ahead) +
                   "/10 pairs, " + fixed(secs) + " s");
}

Outcome parser_totality() {
  Check c;
  const std::size_t per = 3334;
  std::size_t documents = 0, values = 0, typed = 0;
  auto run = [&](const std::vector<std::string>& seeds, std::uint64_t seed,
                 const std::function<void(const std::string&)>& parse) {
    const auto o = testsupport::run_fuzz(testsupport::mutate_documents(seeds, per, seed), parse);
    documents += per;
    values += o.values;
    typed += o.typed_errors;
    for (const auto& f : o.failures) c.expect(false, f);
  };
  run(testsupport::extraction_seeds(), 901, [](const std::string& d) { parse_extraction(d); });
  run(testsupport::merge_seeds(), 902, [](const std::string& d) { parse_merge(d); });
  run(testsupport::chain_selection_seeds(), 903, [](const std::string& d) { parse_chain_selection(d, 10); });
  c.expect(documents >= 10000, "fewer than 10,000 documents");
  c.expect(values + typed == documents, "unaccounted documents");
  return c.outcome(std::to_string(documents) + " documents: " + std::to_string(values) + " values, " +
                   std::to_string(typed) + " typed errors");
}

bool connected(const KnowledgeGraph& kg) {
  if (kg.empty()) return true;
  std::set<NodeId> seen{kg.nodes().begin()->first};
  std::queue<NodeId> todo;
  todo.push(kg.nodes().begin()->first);
  while (!todo.empty()) {
    const auto v = todo.front();
    todo.pop();
    for (auto u : kg.neighbors(v)) {
      if (seen.insert(u).second) todo.push(u);
    }
  }
  return seen.size() == kg.node_count();
}

Outcome completeness() {
  Check c;
  std::mt19937_64 rng(1010);
  int worlds = 0, max_iterations = 0;
  for (std::uint64_t seed = 1; seed <= 40; ++seed) {
    sim::WorldParams p;
    p.n_core = std::uniform_int_distribution<int>(1, 4)(rng);
    p.n_concepts = std::uniform_int_distribution<int>(5, 45)(rng);
    p.n_communities = std::uniform_int_distribution<int>(1, 5)(rng);
    p.docs_per_edge = std::uniform_int_distribution<int>(1, 2)(rng);
    p.p_in = std::uniform_real_distribution<double>(0.05, 0.3)(rng);
    p.p_out = std::uniform_real_distribution<double>(0.0, 0.05)(rng);
    const auto world = sim::generate_world(seed, p);
    if (!connected(world.truth_kg)) continue;
    ++worlds;
    RunConfig config;
    config.seed = seed;
    config.max_iter = 1000;
    config.early_stop = false;
    const auto m = sim::simulate_run(world, config, {}, true);
    max_iterations = std::max(max_iterations, m.termination_iteration);
    c.expect(m.coverage_curve.back() == 1.0,
             "world " + std::to_string(seed) + " stalled at " + fixed(m.coverage_curve.back(), 3));
  }
  c.expect(worlds >= 30, "only " + std::to_string(worlds) + " connected worlds");
  return c.outcome(std::to_string(worlds) + " connected worlds complete within " + std::to_string(max_iterations) +
                   " iterations");
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"formula oracles", formula_oracles},
      {"chain pipeline equals brute force", pipeline_equivalence},
      {"quota law", quota_law},
      {"citation persistence", citation_persistence},
      {"early-stop support rule", support_rule},
      {"algorithm fidelity", algorithm_fidelity},
      {"determinism", determinism},
      {"directional ablation", directional_ablation},
      {"parser totality", parser_totality},
      {"completeness under ideal extraction", completeness},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    std::cout << (o.pass ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << ": " << o.detail
              << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
