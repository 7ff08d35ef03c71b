#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "dualgraph/knowledge_graph.hpp"
#include "dualgraph/orchestrator.hpp"
#include "dualgraph/providers.hpp"

namespace dualgraph::sim {

struct WorldParams {
  int n_core = 3;
  int n_concepts = 57;
  int n_communities = 4;
  int docs_per_edge = 1;
  double p_in = 0.15;   // extra intra-community edge probability (on top of a spanning path)
  double p_out = 0.01;  // extra inter-community edge probability (on top of a ring of bridges)
  double topic_weight = 1.0;  // pull of a node name's embedding toward its community direction
};

struct Document {
  std::string url;
  std::string title;
  std::string text;
  std::vector<EdgeId> edges;  // truth edges stated on the page, 1..3
};

/// Ground-truth knowledge world with a document collection.
struct SyntheticWorld {
  KnowledgeGraph truth_kg;
  std::vector<Document> documents;
  std::map<std::string, std::vector<std::size_t>> query_index;  // lowercase node name -> documents
  std::map<NodeId, int> planted_community;
  std::size_t planted_intra = 0;
  std::size_t planted_inter = 0;
  std::uint64_t seed = 0;
  double topic_weight = 1.0;
  std::string root_query;  // names every core entity
};

inline const std::vector<std::string>& relation_vocabulary() {
  static const std::vector<std::string> r{"supports", "shapes", "enables", "constrains", "extends", "informs"};
  return r;
}

/// Planted-partition truth graph: nodes are dealt round-robin into
/// communities, each community gets a spanning path plus extra edges with
/// probability p_in, consecutive communities are joined by one bridge edge
/// (a ring when there are more than two) plus extra edges with probability
/// p_out. Node ids: cores first, then concepts. Deterministic per seed.
/// Throws Error{Input} on sizes < 1 or more communities than nodes.
SyntheticWorld generate_world(std::uint64_t seed, const WorldParams& params);
SyntheticWorld generate_world(std::uint64_t seed, int n_core, int n_concepts, int n_communities, int docs_per_edge);

/// "subject relation object" facts stated on a page ("FACT: A | rel | B" lines).
struct Fact {
  std::string source;
  std::string relation;
  std::string target;
  auto operator<=>(const Fact&) const = default;
};
std::vector<Fact> page_facts(const std::string& text);

/// Knobs of the rule-based chat.
///
/// Rubric: score = base + coverage_weight * coverage + density_weight * density,
/// clipped to [0, 100]. Coverage is the share of truth edges the outline states;
/// density is the share of outline headings with a cited subtree.
///
/// Outline shape: headings for the core entities and for concepts within
/// `outline_hops` of a core (in the facts gathered so far); other facts become
/// plain points under "Further findings". When the update prompt carries a
/// knowledge graph, every known concept gets a heading.
struct SimBehavior {
  double base = 20.0;
  double coverage_weight = 70.0;
  double density_weight = 10.0;
  int outline_hops = 1;
};

/// Search ranks pages by how many distinct node names of the query they
/// mention, ties broken by a hash of (query, url). Fetch serves page text.
/// The chat is a rule-based stand-in for every prompt the workflow issues;
/// its knowledge extraction is perfect. The embedder hashes tokens like
/// HashEmbedder but adds a per-community direction for node names, so names
/// from one community are topically closer than unrelated ones.
Providers simulated_providers(const SyntheticWorld& world, const SimBehavior& behavior = {}, std::uint64_t embed_seed = 0);

/// Share of truth edges present in `kg`, matched by unordered endpoint-name
/// pair. 1.0 for an empty truth graph.
double coverage(const KnowledgeGraph& kg, const KnowledgeGraph& truth);
/// Knowledge graph a perfect extractor would build from every banked page.
KnowledgeGraph extract_all(const EvidenceBank& bank);
/// The same over the whole document collection.
KnowledgeGraph extract_all(const SyntheticWorld& world);

struct RunMetrics {
  std::uint64_t seed = 0;
  Variant variant = Variant::DualGraph;
  int termination_iteration = 0;  // loop iterations executed
  bool stopped_early = false;
  std::vector<double> coverage_curve;  // [0] after init, [t] after t iterations
  std::size_t kg_operations = 0;

  double coverage_at(int t) const;
};

/// One run on `world`. With `stop_when_complete`, the loop also ends as soon as
/// coverage reaches 1.0.
RunMetrics simulate_run(const SyntheticWorld& world, RunConfig config, const SimBehavior& behavior,
                        bool stop_when_complete = false);

struct AblationConfig {
  WorldParams world;
  RunConfig run;
  SimBehavior behavior;
  int parallelism = 0;  // 0: hardware concurrency
};

struct AblationResult {
  std::vector<RunMetrics> runs;  // per seed: DualGraph then OutlineOnly

  double mean_termination(Variant v) const;
  double mean_coverage_at(Variant v, int t) const;
  /// Paired seeds where DualGraph coverage at t is strictly higher.
  int pairs_dual_ahead(int t) const;
};

/// Requires at least 5 seeds (Error{Input}).
AblationResult run_ablation(const std::vector<std::uint64_t>& seeds, const AblationConfig& config);

/// seed, variant, termination_iteration, stopped_early, coverage_at_2, final_coverage
std::string metrics_tsv(const AblationResult& result);
/// variant, seed, iteration, coverage
std::string plot_data_tsv(const AblationResult& result);
std::string summary_json(const AblationResult& result);

}  // namespace dualgraph::sim
