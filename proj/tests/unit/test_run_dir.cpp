#include <gtest/gtest.h>

#include <atomic>
#include <fstream>
#include <functional>

#include "dualgraph/errors.hpp"
#include "dualgraph/orchestrator.hpp"
#include "dualgraph/sim_harness.hpp"
#include "test_common.hpp"

using namespace dualgraph;
namespace fs = std::filesystem;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorKind::Consistency;
}

// Fails with a provider error once `budget` calls have gone through.
class FailingChat : public ChatProvider {
 public:
  FailingChat(std::shared_ptr<ChatProvider> inner, int budget) : inner_(std::move(inner)), budget_(budget) {}
  std::string complete(const ChatRequest& r) override {
    if (budget_-- <= 0) throw Error(ErrorKind::Provider, "connection reset");
    return inner_->complete(r);
  }

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::atomic<int> budget_;
};

RunOutcome run_investors(const fs::path& dir, bool force = false) {
  const auto fixture = testsupport::investors_fixture();
  const auto config = testsupport::investors_config();
  return execute_run(dir, fixture.root_query, config, make_fixture_providers(fixture, config.seed), force);
}

}  // namespace

TEST(RunDir, LayoutAfterFixtureRun) {
  const auto dir = testsupport::scratch_dir("layout");
  const auto out = run_investors(dir);
  EXPECT_EQ(out.report, dir / "report.md");
  for (const char* f : {"config.json", "state.json", "outline.txt", "kg.json", "bank.json", "prompts.log",
                        "report.md", "iter_0/outline.txt", "iter_0/kg.json", "iter_0/chains.json",
                        "iter_1/queries.txt", "iter_1/chains.json", "iter_2/early_stop.json"}) {
    EXPECT_TRUE(fs::is_regular_file(dir / f)) << f;
  }
  EXPECT_FALSE(fs::exists(dir / "iter_3"));
  EXPECT_EQ(testsupport::read_file(dir / "outline.txt"), testsupport::read_file(dir / "iter_2/outline.txt"));
  EXPECT_EQ(load_run_config(dir), testsupport::investors_config());
  EXPECT_EQ(serialize_state(load_run_state(dir)), serialize_state(out.state));
  EXPECT_NE(testsupport::read_file(dir / "prompts.log").find("create_outline"), std::string::npos);
}

TEST(RunDir, RefusesNonEmptyDirectoryWithoutForce) {
  const auto dir = testsupport::scratch_dir("refuse");
  std::ofstream(dir / "keep.txt") << "x";
  EXPECT_EQ(kind_of([&] { run_investors(dir); }), ErrorKind::Input);
  EXPECT_TRUE(fs::exists(dir / "keep.txt"));
  EXPECT_NO_THROW(run_investors(dir, true));
  EXPECT_FALSE(fs::exists(dir / "keep.txt"));
}

TEST(RunDir, NotARunDirectory) {
  const auto dir = testsupport::scratch_dir("empty");
  EXPECT_EQ(kind_of([&] { load_run_state(dir); }), ErrorKind::NotFound);
  EXPECT_EQ(kind_of([&] { load_run_config(dir); }), ErrorKind::NotFound);
}

TEST(RunDir, ResumeAfterInterruptionMatchesUninterruptedRun) {
  sim::WorldParams params;
  params.n_concepts = 17;
  params.n_communities = 2;
  const auto world = sim::generate_world(5, params);
  RunConfig config;
  config.max_iter = 3;
  config.seed = 5;

  const auto full_dir = testsupport::scratch_dir("resume_full");
  const auto full = execute_run(full_dir, world.root_query, config, sim::simulated_providers(world), false);

  const auto cut_dir = testsupport::scratch_dir("resume_cut");
  auto failing = sim::simulated_providers(world);
  failing.chat = std::make_shared<FailingChat>(failing.chat, 25);
  EXPECT_EQ(kind_of([&] { execute_run(cut_dir, world.root_query, config, failing, false); }), ErrorKind::Provider);
  EXPECT_NE(testsupport::read_file(cut_dir / "events.log").find("aborted (provider)"), std::string::npos);

  const auto resumed = resume_run(cut_dir, sim::simulated_providers(world));
  EXPECT_EQ(serialize_state(resumed.state), serialize_state(full.state));
  EXPECT_EQ(testsupport::read_file(cut_dir / "report.md"), testsupport::read_file(full_dir / "report.md"));
  EXPECT_EQ(testsupport::read_file(cut_dir / "state.json"), testsupport::read_file(full_dir / "state.json"));

  // A finished run resumes to itself without new calls.
  auto unused = sim::simulated_providers(world);
  unused.chat = std::make_shared<FailingChat>(unused.chat, 0);
  EXPECT_EQ(serialize_state(resume_run(cut_dir, unused).state), serialize_state(full.state));
}
