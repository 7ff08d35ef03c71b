#include <fstream>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "dualgraph/mock_providers.hpp"
#include "dualgraph/orchestrator.hpp"
#include "json_io.hpp"

namespace dualgraph {

namespace fs = std::filesystem;
using detail::json;

namespace {

const std::set<std::string> kConfigKeys = {
    "max_iter",       "og_query_budget",  "kg_query_budget",   "urls_per_query",
    "enrich_threshold", "sbm_alpha",      "early_stop_thresholds", "early_stop",
    "seed",           "variant",          "language",          "leiden_resolution",
    "cluster_threshold", "near_duplicate_threshold", "retry_budget", "providers",
    "fixture"};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  fs::create_directories(p.parent_path());
  auto tmp = p;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorKind::Input, "cannot write " + p.string());
    out << text;
  }
  fs::rename(tmp, p);
}

void append_file(const fs::path& p, const std::string& text) {
  std::ofstream out(p, std::ios::binary | std::ios::app);
  out << text;
}

json report_to_json(const EarlyStopReport& r) {
  return {{"iteration", r.iteration}, {"scores", r.scores}, {"stop", r.stop}, {"parsed", r.parsed}};
}

EarlyStopReport report_from_json(const json& j) {
  return {j.at("iteration").get<int>(), j.at("scores").get<std::map<std::string, double>>(), j.at("stop").get<bool>(),
          j.value("parsed", true)};
}

std::string lines_text(const std::vector<std::string>& lines) {
  std::string out;
  for (const auto& l : lines) out += l + "\n";
  return out;
}

}  // namespace

RunConfig parse_config(std::string_view text) {
  auto j = detail::parse_json_lenient(text);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Parse, "config is not a JSON object");
  for (const auto& [k, v] : j.items()) {
    if (!kConfigKeys.count(k)) throw Error(ErrorKind::Input, "config: unknown key '" + k + "'");
  }
  RunConfig c;
  try {
    c.max_iter = j.value("max_iter", c.max_iter);
    c.og_query_budget = j.value("og_query_budget", c.og_query_budget);
    c.kg_query_budget = j.value("kg_query_budget", c.kg_query_budget);
    c.urls_per_query = j.value("urls_per_query", c.urls_per_query);
    c.enrich_threshold = j.value("enrich_threshold", c.enrich_threshold);
    c.sbm_alpha = j.value("sbm_alpha", c.sbm_alpha);
    c.early_stop_thresholds = j.value("early_stop_thresholds", c.early_stop_thresholds);
    c.early_stop = j.value("early_stop", c.early_stop);
    c.seed = j.value("seed", c.seed);
    if (j.contains("variant")) c.variant = parse_variant(j["variant"].get<std::string>());
    c.language = j.value("language", c.language);
    c.leiden_resolution = j.value("leiden_resolution", c.leiden_resolution);
    c.cluster_threshold = j.value("cluster_threshold", c.cluster_threshold);
    c.near_duplicate_threshold = j.value("near_duplicate_threshold", c.near_duplicate_threshold);
    c.retry_budget = j.value("retry_budget", c.retry_budget);
    c.providers = j.value("providers", c.providers);
    c.fixture = j.value("fixture", c.fixture);
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Input, std::string("config: ") + e.what());
  }
  c.validate();
  return c;
}

std::string serialize_config(const RunConfig& c) {
  json j = {{"max_iter", c.max_iter},
            {"og_query_budget", c.og_query_budget},
            {"kg_query_budget", c.kg_query_budget},
            {"urls_per_query", c.urls_per_query},
            {"enrich_threshold", c.enrich_threshold},
            {"sbm_alpha", c.sbm_alpha},
            {"early_stop_thresholds", c.early_stop_thresholds},
            {"early_stop", c.early_stop},
            {"seed", c.seed},
            {"variant", to_string(c.variant)},
            {"language", c.language},
            {"leiden_resolution", c.leiden_resolution},
            {"cluster_threshold", c.cluster_threshold},
            {"near_duplicate_threshold", c.near_duplicate_threshold},
            {"retry_budget", c.retry_budget},
            {"providers", c.providers},
            {"fixture", c.fixture}};
  return j.dump(2) + "\n";
}

namespace {

json state_to_json(const RunState& s) {
  json history = json::array();
  for (const auto& r : s.early_stop_history) history.push_back(report_to_json(r));
  return {{"root_query", s.root_query},
          {"iteration", s.iteration},
          {"outline", render_outline(s.og, true)},
          {"knowledge_graph", s.kg ? detail::kg_to_json(*s.kg) : json(nullptr)},
          {"evidence_bank", detail::bank_to_json(s.bank)},
          {"executed_queries", s.executed_queries},
          {"pending_queries", s.pending_queries},
          {"early_stop_history", history},
          {"outline_seen", s.outline_seen},
          {"stopped_early", s.stopped_early}};
}

RunState state_from_json(const json& j) {
  try {
    RunState s;
    s.root_query = j.at("root_query").get<std::string>();
    s.iteration = j.at("iteration").get<int>();
    auto outline = j.at("outline").get<std::string>();
    if (!outline.empty()) s.og = parse_outline(outline);
    if (!j.at("knowledge_graph").is_null()) s.kg = detail::kg_from_json(j["knowledge_graph"]);
    s.bank = detail::bank_from_json(j.at("evidence_bank"));
    s.executed_queries = j.at("executed_queries").get<std::vector<std::string>>();
    s.pending_queries = j.at("pending_queries").get<std::vector<std::string>>();
    for (const auto& r : j.at("early_stop_history")) s.early_stop_history.push_back(report_from_json(r));
    s.outline_seen = j.at("outline_seen").get<EvidenceId>();
    s.stopped_early = j.at("stopped_early").get<bool>();
    if (s.iteration < 0 || s.outline_seen < 0 || s.outline_seen > s.bank.size()) {
      throw Error(ErrorKind::Consistency, "run state counters are out of range");
    }
    for (auto id : all_citations(s.og)) {
      if (!s.bank.contains(id)) {
        throw Error(ErrorKind::Consistency, "outline cites " + render_evidence_token(id) + " missing from the bank");
      }
    }
    return s;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("run state: ") + e.what());
  }
}

}  // namespace

std::string serialize_state(const RunState& state) { return state_to_json(state).dump(2) + "\n"; }

RunState deserialize_state(std::string_view text) {
  auto j = detail::parse_json_lenient(text);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Parse, "run state is not a JSON object");
  return state_from_json(j);
}

namespace {

class RunDir {
 public:
  RunDir(fs::path dir, const RunConfig& config) : dir_(std::move(dir)), config_(config) {}

  void checkpoint(const RunState& s, const std::string& phase, const Orchestrator& orch) {
    auto j = state_to_json(s);
    j["phase"] = phase;
    write_file(dir_ / "state.json", j.dump(2) + "\n");
    if (phase == "created") {
      flush_notes(orch);
      return;
    }
    write_file(dir_ / "outline.txt", render_outline(s.og, true));
    write_file(dir_ / "bank.json", serialize_bank(s.bank) + "\n");
    if (s.kg) write_file(dir_ / "kg.json", serialize_kg(*s.kg) + "\n");

    const auto iter = dir_ / ("iter_" + std::to_string(s.iteration));
    write_file(iter / "outline.txt", render_outline(s.og, true));
    write_file(iter / "queries.txt", lines_text(s.last_queries));
    if (s.kg) {
      write_file(iter / "kg.json", serialize_kg(*s.kg) + "\n");
      auto chains = s.kg->empty() ? std::vector<SearchChain>{}
                                  : build_search_chains(*s.kg, s.kg->partition(),
                                                        {config_.kg_query_budget, config_.enrich_threshold,
                                                         config_.sbm_alpha});
      write_file(iter / "chains.json", serialize_chains(chains) + "\n");
    }
    if (!s.early_stop_history.empty() && s.early_stop_history.back().iteration == s.iteration) {
      write_file(iter / "early_stop.json", report_to_json(s.early_stop_history.back()).dump(2) + "\n");
    }
    flush_notes(orch);
  }

  void flush_notes(const Orchestrator& orch) {
    const auto& notes = orch.notes();
    std::string text;
    for (; notes_written_ < notes.size(); ++notes_written_) text += notes[notes_written_] + "\n";
    if (!text.empty()) append_file(dir_ / "events.log", text);
  }

  void event(const std::string& line) { append_file(dir_ / "events.log", line + "\n"); }

 private:
  fs::path dir_;
  RunConfig config_;
  std::size_t notes_written_ = 0;
};

RunOutcome drive(const fs::path& dir, RunState* state, const std::string& root_query, const RunConfig& config,
                 Providers providers, const PromptLibrary& prompts) {
  std::ofstream log(dir / "prompts.log", std::ios::binary | std::ios::app);
  providers.chat = std::make_shared<RecordingChat>(providers.chat, &log);
  Orchestrator orch(config, providers, prompts);
  RunDir run(dir, config);

  RunState s;
  try {
    if (state) {
      s = std::move(*state);
    } else {
      s = orch.init_run(root_query);
      run.checkpoint(s, "iterating", orch);
    }
    while (orch.should_continue(s)) {
      orch.run_iteration(s);
      run.checkpoint(s, "iterating", orch);
    }
    auto report = orch.write_report(s);
    write_file(dir / "report.md", report);
    run.checkpoint(s, "reported", orch);
  } catch (const Error& e) {
    run.flush_notes(orch);
    run.event(std::string("aborted (") + to_string(e.kind()) + "): " + e.what());
    throw;
  }
  return {std::move(s), dir / "report.md"};
}

}  // namespace

RunOutcome execute_run(const fs::path& dir, const std::string& root_query, const RunConfig& config,
                       Providers providers, bool force, const PromptLibrary& prompts) {
  config.validate();
  if (root_query.find_first_not_of(" \t\r\n") == std::string::npos) {
    throw Error(ErrorKind::Input, "root query must not be empty");
  }
  if (fs::exists(dir)) {
    if (!fs::is_directory(dir)) throw Error(ErrorKind::Input, dir.string() + " exists and is not a directory");
    if (!fs::is_empty(dir)) {
      if (!force) throw Error(ErrorKind::Input, "run directory " + dir.string() + " is not empty (use --force)");
      fs::remove_all(dir);
    }
  }
  fs::create_directories(dir);
  write_file(dir / "config.json", serialize_config(config));
  json created = {{"phase", "created"}, {"root_query", root_query}};
  write_file(dir / "state.json", created.dump(2) + "\n");
  return drive(dir, nullptr, root_query, config, std::move(providers), prompts);
}

RunConfig load_run_config(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "config.json")) {
    throw Error(ErrorKind::NotFound, dir.string() + " is not a run directory (no config.json)");
  }
  return parse_config(read_file(dir / "config.json"));
}

RunState load_run_state(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "state.json")) {
    throw Error(ErrorKind::NotFound, dir.string() + " is not a run directory (no state.json)");
  }
  auto j = detail::parse_json_lenient(read_file(dir / "state.json"));
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Parse, "state.json is not a JSON object");
  if (j.value("phase", "") == "created") {
    RunState s;
    s.root_query = j.value("root_query", "");
    return s;
  }
  return state_from_json(j);
}

RunOutcome resume_run(const fs::path& dir, Providers providers, const PromptLibrary& prompts) {
  auto config = load_run_config(dir);
  auto j = detail::parse_json_lenient(read_file(dir / "state.json"));
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Parse, "state.json is not a JSON object");
  const auto phase = j.value("phase", "");
  if (phase == "created") {
    return drive(dir, nullptr, j.value("root_query", ""), config, std::move(providers), prompts);
  }
  auto state = state_from_json(j);
  if (phase == "reported") return {std::move(state), dir / "report.md"};
  if (phase != "iterating") throw Error(ErrorKind::Schema, "state.json has unknown phase '" + phase + "'");
  return drive(dir, &state, state.root_query, config, std::move(providers), prompts);
}

}  // namespace dualgraph
