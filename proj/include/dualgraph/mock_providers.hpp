#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/providers.hpp"

namespace dualgraph {

/// One canned response. It fires for a request whose task equals `task` (or
/// any task when empty) and whose system+user text contains every string in
/// `contains`. `uses` = 0 means unlimited.
struct ScriptEntry {
  std::string task;
  std::vector<std::string> contains;
  std::string response;
  int uses = 1;
};

/// Replays canned responses, first unconsumed match wins. Calls are
/// serialized. Throws Error{ScriptExhausted} once every entry is used up and
/// Error{UnmatchedPrompt} (carrying the prompt head) when nothing matches.
class ScriptedChat : public ChatProvider {
 public:
  explicit ScriptedChat(std::vector<ScriptEntry> entries);
  std::string complete(const ChatRequest& request) override;
  std::size_t calls() const;

 private:
  mutable std::mutex mutex_;
  std::vector<ScriptEntry> entries_;
  std::vector<int> used_;
  std::size_t calls_ = 0;
};

/// Feature-hashing embedder: each word token maps to a seeded pseudo-random
/// direction, the text vector is their normalized sum.
class HashEmbedder : public EmbeddingProvider {
 public:
  explicit HashEmbedder(int dim = 64, std::uint64_t seed = 0) : dim_(dim), seed_(seed) {}
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override;

 private:
  int dim_;
  std::uint64_t seed_;
};

struct FixturePage {
  std::string url;
  std::string title;
  std::string snippet;
  std::string content;
};

/// Results keyed by normalized query; unknown queries return nothing.
class FixtureSearch : public SearchProvider {
 public:
  void add(const std::string& query, std::vector<SearchResult> results);
  std::vector<SearchResult> search(const std::string& query, int top_n) override;

 private:
  std::map<std::string, std::vector<SearchResult>> results_;
};

class FixtureFetch : public FetchProvider {
 public:
  void add(const std::string& url, std::string content);
  /// Throws Error{Provider} for unknown urls.
  std::string fetch(const std::string& url) override;

 private:
  std::map<std::string, std::string> pages_;
};

/// Stand-ins for network-backed providers. Every call throws Error{Provider}
/// explaining that no live backend is compiled in.
class UnavailableChat : public ChatProvider {
 public:
  std::string complete(const ChatRequest& request) override;
};
class UnavailableSearch : public SearchProvider {
 public:
  std::vector<SearchResult> search(const std::string& query, int top_n) override;
};
class UnavailableFetch : public FetchProvider {
 public:
  std::string fetch(const std::string& url) override;
};

/// Wraps a chat provider and appends every exchange to a stream.
class RecordingChat : public ChatProvider {
 public:
  RecordingChat(std::shared_ptr<ChatProvider> inner, std::ostream* log) : inner_(std::move(inner)), log_(log) {}
  std::string complete(const ChatRequest& request) override;

 private:
  std::shared_ptr<ChatProvider> inner_;
  std::ostream* log_;
  std::mutex mutex_;
  std::size_t n_ = 0;
};

/// A bundled offline scenario: root query, chat script and web pages.
///
///   {"root_query": "...",
///    "script": [{"task": "...", "contains": ["..."], "response": "...", "uses": 1}],
///    "search": {"<query>": [{"url": "...", "title": "...", "snippet": "..."}]},
///    "pages": {"<url>": "<page text>"}}
struct Fixture {
  std::string root_query;
  std::vector<ScriptEntry> script;
  std::map<std::string, std::vector<SearchResult>> search;
  std::map<std::string, std::string> pages;
};

Fixture parse_fixture(std::string_view text);
Fixture load_fixture(const std::filesystem::path& path);
/// Scripted chat, fixture search/fetch and a HashEmbedder.
Providers make_fixture_providers(const Fixture& fixture, std::uint64_t embed_seed = 0);

}  // namespace dualgraph
