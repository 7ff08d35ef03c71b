#include "dualgraph/mock_providers.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"
#include "json_io.hpp"

namespace dualgraph {

ScriptedChat::ScriptedChat(std::vector<ScriptEntry> entries)
    : entries_(std::move(entries)), used_(entries_.size(), 0) {}

std::string ScriptedChat::complete(const ChatRequest& request) {
  std::lock_guard lock(mutex_);
  ++calls_;
  bool any_left = false;
  const std::string haystack = request.system + "\n" + request.user;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const auto& e = entries_[i];
    if (e.uses > 0 && used_[i] >= e.uses) continue;
    any_left = true;
    if (!e.task.empty() && e.task != request.task) continue;
    bool ok = true;
    for (const auto& needle : e.contains) {
      if (haystack.find(needle) == std::string::npos) {
        ok = false;
        break;
      }
    }
    if (!ok) continue;
    ++used_[i];
    return e.response;
  }
  if (!any_left) {
    throw Error(ErrorKind::ScriptExhausted, "chat script exhausted at call " + std::to_string(calls_) +
                                                " (task " + request.task + ")");
  }
  std::string head = request.user.substr(0, 160);
  for (auto& c : head) {
    if (c == '\n') c = ' ';
  }
  throw Error(ErrorKind::UnmatchedPrompt, "no script entry matches task " + request.task + ": " + head);
}

std::size_t ScriptedChat::calls() const {
  std::lock_guard lock(mutex_);
  return calls_;
}

std::vector<Embedding> HashEmbedder::embed(const std::vector<std::string>& texts) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    auto tokens = word_tokens(text);
    if (tokens.empty()) tokens.push_back("\x01" + text);
    Embedding v(static_cast<std::size_t>(dim_), 0.0);
    for (const auto& tok : tokens) {
      std::uint64_t state = hash_string(tok, seed_);
      for (auto& x : v) x += static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
    }
    double norm = 0.0;
    for (double x : v) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : v) x /= norm;
    out.push_back(std::move(v));
  }
  return out;
}

void FixtureSearch::add(const std::string& query, std::vector<SearchResult> results) {
  results_[normalize_query(query)] = std::move(results);
}

std::vector<SearchResult> FixtureSearch::search(const std::string& query, int top_n) {
  auto it = results_.find(normalize_query(query));
  if (it == results_.end() || top_n <= 0) return {};
  std::vector<SearchResult> out(it->second.begin(),
                                it->second.begin() + std::min<std::ptrdiff_t>(top_n, it->second.size()));
  for (std::size_t i = 0; i < out.size(); ++i) out[i].rank = static_cast<int>(i) + 1;
  return out;
}

void FixtureFetch::add(const std::string& url, std::string content) { pages_[normalize_url(url)] = std::move(content); }

std::string FixtureFetch::fetch(const std::string& url) {
  auto it = pages_.find(normalize_url(url));
  if (it == pages_.end()) throw Error(ErrorKind::Provider, "fetch failed: " + url);
  return it->second;
}

std::string UnavailableChat::complete(const ChatRequest&) {
  throw Error(ErrorKind::Provider, "no live chat backend is built in; use --providers mock with a fixture");
}
std::vector<SearchResult> UnavailableSearch::search(const std::string&, int) {
  throw Error(ErrorKind::Provider, "no live search backend is built in; use --providers mock with a fixture");
}
std::string UnavailableFetch::fetch(const std::string&) {
  throw Error(ErrorKind::Provider, "no live fetch backend is built in; use --providers mock with a fixture");
}

std::string RecordingChat::complete(const ChatRequest& request) {
  auto response = inner_->complete(request);
  std::lock_guard lock(mutex_);
  if (log_) {
    *log_ << "===== call " << ++n_ << " task=" << request.task << " =====\n"
          << "----- system -----\n" << request.system << "\n"
          << "----- user -----\n" << request.user << "\n"
          << "----- response -----\n" << response << "\n";
  }
  return response;
}

Fixture parse_fixture(std::string_view text) {
  using detail::json;
  auto j = detail::parse_json_lenient(text);
  if (j.is_discarded() || !j.is_object()) throw Error(ErrorKind::Parse, "fixture is not a JSON object");
  try {
    Fixture f;
    f.root_query = j.value("root_query", "");
    for (const auto& e : j.value("script", json::array())) {
      ScriptEntry s;
      s.task = e.value("task", "");
      s.contains = e.value("contains", std::vector<std::string>{});
      s.response = e.at("response").get<std::string>();
      s.uses = e.value("uses", 1);
      f.script.push_back(std::move(s));
    }
    const auto search = j.value("search", json::object());
    for (const auto& [query, results] : search.items()) {
      auto& list = f.search[query];
      for (const auto& r : results) {
        list.push_back({r.at("url").get<std::string>(), r.value("title", ""), r.value("snippet", ""),
                        static_cast<int>(list.size()) + 1});
      }
    }
    const auto pages = j.value("pages", json::object());
    for (const auto& [url, page] : pages.items()) f.pages[url] = page.get<std::string>();
    return f;
  } catch (const json::exception& e) {
    throw Error(ErrorKind::Schema, std::string("fixture: ") + e.what());
  }
}

Fixture load_fixture(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorKind::Input, "cannot read fixture " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_fixture(ss.str());
}

Providers make_fixture_providers(const Fixture& fixture, std::uint64_t embed_seed) {
  auto search = std::make_shared<FixtureSearch>();
  for (const auto& [q, r] : fixture.search) search->add(q, r);
  auto fetch = std::make_shared<FixtureFetch>();
  for (const auto& [u, p] : fixture.pages) fetch->add(u, p);
  return {std::make_shared<ScriptedChat>(fixture.script), search, fetch, std::make_shared<HashEmbedder>(64, embed_seed)};
}

}  // namespace dualgraph
