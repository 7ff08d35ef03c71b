#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "dualgraph/mock_providers.hpp"
#include "dualgraph/prompts.hpp"
#include "test_common.hpp"

using namespace dualgraph;

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

}  // namespace

TEST(Prompts, LiteralSubstitution) {
  EXPECT_EQ(render_template("N=${QUERY_NUM}", {{"QUERY_NUM", "10"}}), "N=10");
  EXPECT_EQ(render_template("plain text $ {x}", {}), "plain text $ {x}");
  EXPECT_EQ(render_template("${A}", {{"A", "${B}"}}), "${B}");
  EXPECT_EQ(kind_of([] { render_template("${X}", {}); }), ErrorKind::Render);
}

TEST(Prompts, BuiltinLibraryHasEveryTask) {
  const auto lib = PromptLibrary::builtin();
  for (const char* name : {"create_outline", "generate_search_queries", "kg_chain_selection", "write_section",
                           "extract_knowledge_nodes", "merge_knowledge_nodes", "update_outline", "filter_urls",
                           "extract_evidence", "early_stop"}) {
    const auto& t = lib.get(name);
    EXPECT_FALSE(t.system.empty()) << name;
    EXPECT_FALSE(t.user.empty()) << name;
  }
  EXPECT_EQ(kind_of([&] { lib.get("nope"); }), ErrorKind::NotFound);
}

TEST(Prompts, OverridesReplaceOneFile) {
  const auto dir = testsupport::scratch_dir("prompt_override");
  {
    std::ofstream(dir / "create_outline.user.txt") << "Q=${ROOT_QUERY}";
  }
  const auto lib = PromptLibrary::with_overrides(dir);
  EXPECT_EQ(lib.get("create_outline").user, "Q=${ROOT_QUERY}");
  EXPECT_EQ(lib.get("create_outline").system, PromptLibrary::builtin().get("create_outline").system);
}

TEST(ScriptedChat, FirstUnconsumedMatchWins) {
  ScriptedChat chat({{"t", {"alpha"}, "one", 1}, {"t", {}, "two", 1}, {"", {"beta"}, "three", 0}});
  EXPECT_EQ(chat.complete({"t", "sys", "alpha here"}), "one");
  EXPECT_EQ(chat.complete({"t", "sys", "alpha again"}), "two");
  EXPECT_EQ(chat.complete({"other", "beta", "x"}), "three");
  EXPECT_EQ(chat.complete({"other", "beta", "x"}), "three");
  EXPECT_EQ(chat.calls(), 4u);
}

TEST(ScriptedChat, UnmatchedAndExhausted) {
  ScriptedChat chat({{"t", {}, "only", 1}});
  EXPECT_EQ(chat.complete({"t", "s", "u"}), "only");
  EXPECT_EQ(kind_of([&] { chat.complete({"t", "s", "u"}); }), ErrorKind::ScriptExhausted);

  ScriptedChat picky({{"t", {"needle"}, "x", 1}, {"t", {}, "y", 1}});
  picky.complete({"t", "s", "u"});
  try {
    picky.complete({"t", "s", "no match here"});
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.kind(), ErrorKind::UnmatchedPrompt);
    EXPECT_NE(std::string(e.what()).find("no match"), std::string::npos);
  }
}

TEST(HashEmbedder, DeterministicUnitNorm) {
  HashEmbedder embed(64, 5);
  std::mt19937_64 rng(51);
  std::vector<std::string> texts;
  for (int i = 0; i < 1000; ++i) {
    std::string s;
    const int n = std::uniform_int_distribution<int>(0, 40)(rng);
    for (int k = 0; k < n; ++k) s.push_back(static_cast<char>(std::uniform_int_distribution<int>(32, 126)(rng)));
    texts.push_back(s);
  }
  const auto vecs = embed.embed(texts);
  for (std::size_t i = 0; i < vecs.size(); ++i) {
    double norm = 0.0;
    for (double x : vecs[i]) norm += x * x;
    EXPECT_NEAR(std::sqrt(norm), 1.0, 1e-9) << '"' << texts[i] << '"';
  }
  EXPECT_EQ(embed.embed_one("value investing"), embed.embed_one("value investing"));
  EXPECT_NE(embed.embed_one("value investing"), HashEmbedder(64, 6).embed_one("value investing"));
}

TEST(FixtureProviders, SearchAndFetch) {
  FixtureSearch search;
  search.add("Value Investing", {{"https://a.org/1", "A", "s", 0}, {"https://a.org/2", "B", "s", 0}});
  const auto r = search.search("value investing ", 5);
  ASSERT_EQ(r.size(), 2u);
  EXPECT_EQ(r[0].rank, 1);
  EXPECT_EQ(r[1].rank, 2);
  EXPECT_EQ(search.search("value investing", 1).size(), 1u);
  EXPECT_TRUE(search.search("unknown", 5).empty());

  FixtureFetch fetch;
  fetch.add("https://a.org/1", "page text");
  EXPECT_EQ(fetch.fetch("https://a.org/1"), "page text");
  EXPECT_EQ(kind_of([&] { fetch.fetch("https://a.org/404"); }), ErrorKind::Provider);
}

TEST(FixtureProviders, UnavailableLiveProvidersExplainThemselves) {
  UnavailableChat chat;
  EXPECT_EQ(kind_of([&] { chat.complete({"t", "s", "u"}); }), ErrorKind::Provider);
  UnavailableSearch search;
  EXPECT_EQ(kind_of([&] { search.search("q", 1); }), ErrorKind::Provider);
}

TEST(FixtureProviders, RecordingChatLogsExchanges) {
  std::ostringstream log;
  RecordingChat chat(std::make_shared<ScriptedChat>(std::vector<ScriptEntry>{{"t", {}, "reply", 1}}), &log);
  EXPECT_EQ(chat.complete({"t", "sys", "user"}), "reply");
  EXPECT_NE(log.str().find("reply"), std::string::npos);
  EXPECT_NE(log.str().find("user"), std::string::npos);
}

TEST(FixtureProviders, InvestorsFixtureLoads) {
  const auto f = testsupport::investors_fixture();
  EXPECT_NE(f.root_query.find("Duan Yongping"), std::string::npos);
  EXPECT_FALSE(f.script.empty());
  EXPECT_FALSE(f.search.empty());
  EXPECT_FALSE(f.pages.empty());
  EXPECT_EQ(kind_of([] { parse_fixture("{\"script\": 3}"); }), ErrorKind::Schema);
}
