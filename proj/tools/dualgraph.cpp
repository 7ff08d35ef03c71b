#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "dualgraph/errors.hpp"
#include "dualgraph/mock_providers.hpp"
#include "dualgraph/orchestrator.hpp"
#include "dualgraph/sim_harness.hpp"

namespace fs = std::filesystem;
using namespace dualgraph;
using nlohmann::json;

namespace {

struct Usage : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  if (!in) throw Error(ErrorKind::NotFound, "cannot read " + p.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& p, const std::string& text) {
  if (p.has_parent_path()) fs::create_directories(p.parent_path());
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorKind::Input, "cannot write " + p.string());
  out << text;
}

Providers providers_for(const RunConfig& config) {
  if (config.providers == "live") {
    return {std::make_shared<UnavailableChat>(), std::make_shared<UnavailableSearch>(),
            std::make_shared<UnavailableFetch>(), std::make_shared<HashEmbedder>(64, config.seed)};
  }
  if (config.fixture.empty()) throw Usage("mock providers need a fixture (--fixture or the \"fixture\" config key)");
  return make_fixture_providers(load_fixture(config.fixture), config.seed);
}

fs::path iter_dir(const fs::path& run_dir, int iter) {
  auto p = run_dir / ("iter_" + std::to_string(iter));
  if (!fs::is_directory(p)) throw Error(ErrorKind::NotFound, "no checkpoint for iteration " + std::to_string(iter));
  return p;
}

void require_run_dir(const fs::path& dir) {
  if (!fs::is_regular_file(dir / "state.json")) {
    throw Error(ErrorKind::NotFound, dir.string() + " is not a run directory");
  }
}

int exit_code(ErrorKind k) {
  switch (k) {
    case ErrorKind::Input:
    case ErrorKind::NotFound:
      return 1;
    case ErrorKind::Provider:
    case ErrorKind::ScriptExhausted:
    case ErrorKind::UnmatchedPrompt:
      return 2;
    default:
      return 3;
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Dual-graph deep research runner"};
  app.require_subcommand(1);

  std::string query, config_path, variant, providers, fixture, prompts_dir;
  fs::path run_dir = "run";
  bool force = false;
  auto* run = app.add_subcommand("run", "Execute a research run and write its run directory");
  run->add_option("--query", query, "Root research question (defaults to the fixture's)");
  run->add_option("--config", config_path, "Run configuration (JSON)");
  run->add_option("--variant", variant, "dualgraph | outline-only")->check(CLI::IsMember({"dualgraph", "outline-only"}));
  run->add_option("--providers", providers, "mock | live")->check(CLI::IsMember({"mock", "live"}));
  run->add_option("--fixture", fixture, "Scripted scenario for mock providers");
  run->add_option("--run-dir", run_dir, "Output directory")->capture_default_str();
  run->add_option("--prompts", prompts_dir, "Directory with prompt overrides");
  run->add_flag("--force", force, "Replace an existing run directory");

  auto* resume = app.add_subcommand("resume", "Continue a run from its last checkpoint");
  resume->add_option("--run-dir", run_dir, "Run directory")->required();
  resume->add_option("--prompts", prompts_dir, "Directory with prompt overrides");

  int iter = -1;
  bool plain = false;
  auto* inspect_kg = app.add_subcommand("inspect-kg", "Print the knowledge graph of a run");
  inspect_kg->add_option("--run-dir", run_dir, "Run directory")->required();
  inspect_kg->add_option("--iter", iter, "Iteration checkpoint (default: latest)");
  auto* inspect_og = app.add_subcommand("inspect-og", "Print the outline of a run");
  inspect_og->add_option("--run-dir", run_dir, "Run directory")->required();
  inspect_og->add_option("--iter", iter, "Iteration checkpoint (default: latest)");
  inspect_og->add_flag("--no-citations", plain, "Strip citation markers");

  auto* chains = app.add_subcommand("chains", "Print the search chain candidates built from an iteration's graph");
  chains->add_option("--run-dir", run_dir, "Run directory")->required();
  chains->add_option("--iter", iter, "Iteration checkpoint")->required();

  int seeds = 10;
  std::uint64_t first_seed = 1;
  fs::path out;
  int parallel = 0;
  sim::AblationConfig ablation;
  auto* simulate = app.add_subcommand("simulate", "Run the synthetic-world ablation of both variants");
  simulate->add_option("--seeds", seeds, "Number of paired seeds (>= 5)")->capture_default_str();
  simulate->add_option("--first-seed", first_seed, "First seed; seeds are consecutive")->capture_default_str();
  simulate->add_option("--out", out, "Metrics table path (.tsv)")->required();
  simulate->add_option("--config", config_path, "Run configuration (JSON)");
  simulate->add_option("--parallel", parallel, "Worker threads (0: all cores)")->capture_default_str();
  simulate->add_option("--core", ablation.world.n_core, "Core entities per world")->capture_default_str();
  simulate->add_option("--concepts", ablation.world.n_concepts, "Concept nodes per world")->capture_default_str();
  simulate->add_option("--communities", ablation.world.n_communities, "Planted communities")->capture_default_str();
  simulate->add_option("--docs-per-edge", ablation.world.docs_per_edge, "Documents per truth edge")->capture_default_str();
  simulate->add_option("--p-in", ablation.world.p_in, "Extra intra-community edge probability")->capture_default_str();
  simulate->add_option("--p-out", ablation.world.p_out, "Extra inter-community edge probability")->capture_default_str();
  simulate->add_option("--topic-weight", ablation.world.topic_weight, "Community pull on name embeddings")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  try {
    auto prompts = prompts_dir.empty() ? PromptLibrary::builtin() : PromptLibrary::with_overrides(prompts_dir);

    if (*run) {
      RunConfig config = config_path.empty() ? RunConfig{} : parse_config(read_file(config_path));
      if (!variant.empty()) config.variant = parse_variant(variant);
      if (!providers.empty()) config.providers = providers;
      if (!fixture.empty()) config.fixture = fixture;
      config.validate();
      if (query.empty() && config.providers == "mock" && !config.fixture.empty()) {
        query = load_fixture(config.fixture).root_query;
      }
      if (query.empty()) throw Usage("--query is required");
      auto outcome = execute_run(run_dir, query, config, providers_for(config), force, prompts);
      std::cout << outcome.report.string() << "\n";
    } else if (*resume) {
      auto outcome = resume_run(run_dir, providers_for(load_run_config(run_dir)), prompts);
      std::cout << outcome.report.string() << "\n";
    } else if (*inspect_kg) {
      require_run_dir(run_dir);
      auto path = iter >= 0 ? iter_dir(run_dir, iter) / "kg.json" : run_dir / "kg.json";
      if (!fs::is_regular_file(path)) throw Error(ErrorKind::NotFound, "this run has no knowledge graph");
      std::cout << read_file(path);
    } else if (*inspect_og) {
      require_run_dir(run_dir);
      auto path = iter >= 0 ? iter_dir(run_dir, iter) / "outline.txt" : run_dir / "outline.txt";
      auto og = parse_outline(read_file(path));
      std::cout << render_outline(og, !plain) << "\n";
    } else if (*chains) {
      require_run_dir(run_dir);
      auto dir = iter_dir(run_dir, iter);
      if (!fs::is_regular_file(dir / "chains.json")) throw Error(ErrorKind::NotFound, "this run has no search chains");
      auto kg = deserialize_kg(read_file(dir / "kg.json"));
      auto list = json::parse(read_file(dir / "chains.json"));
      for (const auto& c : list) {
        auto name = [&](const std::string& id) {
          auto n = std::stoll(id.substr(1));
          return kg.has_node(n) ? kg.node(n).name : id;
        };
        char score[32];
        std::snprintf(score, sizeof score, "%.6f", c.at("score").get<double>());
        std::cout << c.at("chain_id").get<std::string>() << "\t" << c.at("kind").get<std::string>() << "\t" << score
                  << "\t" << c.at("score_basis").get<std::string>() << "\t" << name(c.at("source").get<std::string>())
                  << " -> " << c.at("relation_pattern").get<std::string>() << " -> "
                  << name(c.at("target").get<std::string>()) << "\n";
      }
    } else if (*simulate) {
      if (seeds < 5) throw Usage("--seeds must be at least 5");
      if (!config_path.empty()) ablation.run = parse_config(read_file(config_path));
      ablation.parallelism = parallel;
      std::vector<std::uint64_t> list;
      for (int i = 0; i < seeds; ++i) list.push_back(first_seed + static_cast<std::uint64_t>(i));
      auto result = sim::run_ablation(list, ablation);
      write_file(out, sim::metrics_tsv(result));
      auto stem = out;
      stem.replace_extension();
      write_file(stem.string() + ".summary.json", sim::summary_json(result));
      write_file(stem.string() + ".plot.tsv", sim::plot_data_tsv(result));
      std::cout << sim::summary_json(result);
    }
  } catch (const Usage& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const Error& e) {
    std::cerr << "error (" << to_string(e.kind()) << "): " << e.what() << "\n";
    return exit_code(e.kind());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
