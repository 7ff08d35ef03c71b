#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/evidence_bank.hpp"
#include "dualgraph/gap_discovery.hpp"
#include "dualgraph/knowledge_graph.hpp"
#include "dualgraph/outline.hpp"
#include "dualgraph/parsers.hpp"
#include "dualgraph/prompts.hpp"
#include "dualgraph/providers.hpp"

namespace dualgraph {

enum class Variant { DualGraph, OutlineOnly };

const char* to_string(Variant v);
/// "dualgraph" | "outline-only"; throws Error{Input}.
Variant parse_variant(std::string_view text);

struct RunConfig {
  int max_iter = 5;
  int og_query_budget = 10;
  int kg_query_budget = 10;  // CHAIN_NUM
  int urls_per_query = 5;
  int enrich_threshold = 1;
  double sbm_alpha = 0.1;
  std::map<std::string, double> early_stop_thresholds;  // missing dimensions default to 75
  bool early_stop = true;
  std::uint64_t seed = 0;
  Variant variant = Variant::DualGraph;
  std::string language = "en";
  double leiden_resolution = 1.0;
  double cluster_threshold = 0.85;
  double near_duplicate_threshold = 0.95;
  int retry_budget = 2;  // re-asks for malformed structured output
  std::string providers = "mock";  // "mock" | "live"
  std::string fixture;             // scripted scenario for mock providers

  double threshold(const std::string& dimension) const;
  /// Throws Error{Input} when a value is out of range.
  void validate() const;
  bool operator==(const RunConfig&) const = default;
};

/// Flat JSON object with the field names above; `early_stop_thresholds` is the
/// only nested value. Unknown keys are rejected.
RunConfig parse_config(std::string_view text);
std::string serialize_config(const RunConfig& config);

struct EarlyStopReport {
  int iteration = 0;
  std::map<std::string, double> scores;
  bool stop = false;
  bool parsed = true;  // false when the scorer never produced valid output
  bool operator==(const EarlyStopReport&) const = default;
};

struct RunState {
  std::string root_query;
  int iteration = 0;
  OutlineGraph og;
  std::optional<KnowledgeGraph> kg;  // absent for the outline-only variant
  EvidenceBank bank;
  std::vector<std::string> executed_queries;
  std::vector<std::string> pending_queries;
  std::vector<EarlyStopReport> early_stop_history;
  EvidenceId outline_seen = 0;  // evidence ids <= this were already offered to the outline
  bool stopped_early = false;

  // What the last step produced, kept for the per-iteration artifacts.
  std::vector<SearchChain> last_chains;
  std::vector<std::string> last_queries;
};

std::string serialize_state(const RunState& state);
RunState deserialize_state(std::string_view text);

/// One executed step of the workflow, for auditing the call order.
struct TraceEvent {
  int iteration;
  std::string step;  // CreateOutline, GenFromOG, Search, BuildKG, GenFromKG, Dedup, UpdateKG, UpdateOG, EarlyStop, WriteReport
  bool operator==(const TraceEvent&) const = default;
};

class Orchestrator {
 public:
  Orchestrator(RunConfig config, Providers providers, PromptLibrary prompts = PromptLibrary::builtin());

  /// CreateOutline, GenFromOG, Search and (dual-graph only) BuildKG.
  RunState init_run(const std::string& root_query);
  /// One loop body of the selected variant; increments state.iteration.
  void run_iteration(RunState& state);
  bool should_continue(const RunState& state) const;
  std::string write_report(const RunState& state);

  std::vector<std::string> gen_queries_from_og(const OutlineGraph& og, const std::vector<std::string>& executed,
                                               const std::vector<std::string>& pending, int budget);
  std::pair<std::vector<SearchChain>, ChainSelection> gen_queries_from_kg(const RunState& state);
  std::vector<std::string> dedup_queries(const std::vector<std::string>& fresh,
                                         const std::vector<std::string>& executed,
                                         const std::vector<std::string>& pending);
  /// The retrieval pipeline; returns ids of accepted units.
  std::vector<EvidenceId> search(RunState& state, const std::vector<std::string>& queries, int iteration);
  void update_kg(RunState& state, const std::vector<EvidenceId>& fresh);
  void update_og(RunState& state);
  EarlyStopReport evaluate_early_stop(const std::string& root_query, const OutlineGraph& og, int iteration);

  const RunConfig& config() const noexcept { return config_; }
  const std::vector<TraceEvent>& trace() const noexcept { return trace_; }
  /// Knowledge-graph operations performed so far (extraction, merge,
  /// clustering, community detection, chain construction).
  std::size_t kg_operations() const noexcept { return kg_ops_; }
  /// Human-readable log of notable events (merges, dropped evidence, skipped pages).
  const std::vector<std::string>& notes() const noexcept { return notes_; }

 private:
  std::string ask(const std::string& task, const std::map<std::string, std::string>& vars);
  template <class Parse>
  auto ask_parsed(const std::string& task, std::map<std::string, std::string> vars, int reasks, Parse parse)
      -> decltype(parse(std::string()));
  void record(int iteration, const char* step) { trace_.push_back({iteration, step}); }
  void refresh_structure(KnowledgeGraph& kg, int iteration);

  RunConfig config_;
  Providers providers_;
  PromptLibrary prompts_;
  std::vector<TraceEvent> trace_;
  std::size_t kg_ops_ = 0;
  std::vector<std::string> notes_;
};

/// Run directory handling.
///
///   config.json  state.json  outline.txt  kg.json  bank.json  prompts.log
///   iter_N/{outline.txt, kg.json, chains.json, queries.txt, early_stop.json}
///   report.md
struct RunOutcome {
  RunState state;
  std::filesystem::path report;
};

/// Creates `dir` (refusing an existing non-empty one unless `force`) and runs
/// to completion, checkpointing after initialization and every iteration.
RunOutcome execute_run(const std::filesystem::path& dir, const std::string& root_query, const RunConfig& config,
                       Providers providers, bool force, const PromptLibrary& prompts = PromptLibrary::builtin());
/// Continues from the last checkpoint in `dir`.
RunOutcome resume_run(const std::filesystem::path& dir, Providers providers,
                      const PromptLibrary& prompts = PromptLibrary::builtin());

RunConfig load_run_config(const std::filesystem::path& dir);
/// Checkpointed state; Error{NotFound} when `dir` is not a run directory.
RunState load_run_state(const std::filesystem::path& dir);

}  // namespace dualgraph
