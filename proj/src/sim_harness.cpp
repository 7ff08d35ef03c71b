#include "dualgraph/sim_harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <regex>
#include <sstream>
#include <thread>

#include "dualgraph/errors.hpp"
#include "dualgraph/mock_providers.hpp"
#include "dualgraph/parsers.hpp"
#include "dualgraph/prompts.hpp"
#include "dualgraph/text_util.hpp"
#include "json_io.hpp"

namespace dualgraph::sim {

using detail::json;

namespace {

double uniform(std::uint64_t& state) { return static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-53; }

std::size_t pick(std::uint64_t& state, std::size_t n) { return static_cast<std::size_t>(splitmix64(state) % n); }

// Words the workflow itself puts into prompts; generated names must not collide.
const std::set<std::string>& reserved_words() {
  static const std::set<std::string> words = [] {
    std::set<std::string> out;
    auto lib = PromptLibrary::builtin();
    for (const auto& name : lib.names()) {
      const auto& t = lib.get(name);
      for (auto& w : word_tokens(t.system + " " + t.user)) out.insert(w);
    }
    for (const auto& r : relation_vocabulary()) out.insert(r);
    for (auto& w : word_tokens("map the concepts connected to and notes on fact related findings angle hypothesized "
                               "relation cross community bridging summary original content")) {
      out.insert(w);
    }
    return out;
  }();
  return words;
}

std::string make_name(std::uint64_t& state) {
  static const std::string consonants = "bdfgklmnprstvz";
  static const std::string vowels = "aeiou";
  std::string s;
  for (int i = 0; i < 3; ++i) {
    s += consonants[pick(state, consonants.size())];
    s += vowels[pick(state, vowels.size())];
  }
  s[0] = static_cast<char>(s[0] - 'a' + 'A');
  return s;
}

std::string join_names(const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (i > 0) out += (i + 1 == names.size()) ? " and " : ", ";
    out += names[i];
  }
  return out;
}

std::pair<std::string, std::string> name_pair(const std::string& a, const std::string& b) {
  auto x = to_lower_ascii(a);
  auto y = to_lower_ascii(b);
  return x < y ? std::pair{x, y} : std::pair{y, x};
}

std::set<std::pair<std::string, std::string>> pair_set(const KnowledgeGraph& kg) {
  std::set<std::pair<std::string, std::string>> out;
  for (const auto& [id, e] : kg.edges()) out.insert(name_pair(kg.node(e.source).name, kg.node(e.target).name));
  return out;
}

KnowledgeGraph kg_from_facts(const std::vector<Fact>& facts) {
  ExtractionResult r;
  std::map<std::string, NodeId> ids;
  std::set<std::tuple<NodeId, NodeId, std::string>> seen;
  auto node = [&](const std::string& name) {
    auto it = ids.find(name);
    if (it != ids.end()) return it->second;
    NodeId id = static_cast<NodeId>(ids.size()) + 1;
    ids[name] = id;
    r.new_nodes.push_back({id, name, false});
    return id;
  };
  for (const auto& f : facts) {
    auto s = node(f.source);
    auto t = node(f.target);
    if (s == t || !seen.insert({s, t, f.relation}).second) continue;
    r.new_edges.push_back({static_cast<EdgeId>(r.new_edges.size()) + 1, s, t, f.relation});
  }
  KnowledgeGraph kg;
  kg.apply_extraction(r, {});
  return kg;
}

// Text between `start` and the next `end` (or the end of text).
std::string between(const std::string& text, const std::string& start, const std::string& end = {}) {
  auto b = text.find(start);
  if (b == std::string::npos) return {};
  b += start.size();
  auto e = end.empty() ? std::string::npos : text.find(end, b);
  return trim(text.substr(b, e == std::string::npos ? std::string::npos : e - b));
}

std::vector<std::string> list_section(const std::string& text) {
  std::vector<std::string> out;
  if (text == "(none)") return out;
  for (const auto& l : split_lines(text)) {
    if (!trim(l).empty()) out.push_back(trim(l));
  }
  return out;
}

std::optional<Fact> fact_from_phrase(const std::string& phrase) {
  std::istringstream in(trim(phrase));
  Fact f;
  std::string extra;
  if (!(in >> f.source >> f.relation >> f.target) || (in >> extra)) return std::nullopt;
  return f;
}

std::vector<Fact> facts_from_summary(const std::string& summary) {
  std::vector<Fact> out;
  std::string s = summary;
  if (!s.empty() && s.back() == '.') s.pop_back();
  std::size_t pos = 0;
  while (pos <= s.size()) {
    auto next = s.find("; ", pos);
    auto part = s.substr(pos, next == std::string::npos ? std::string::npos : next - pos);
    if (auto f = fact_from_phrase(part)) out.push_back(*f);
    if (next == std::string::npos) break;
    pos = next + 2;
  }
  return out;
}

std::string phrase(const Fact& f) { return f.source + " " + f.relation + " " + f.target; }

bool subtree_cited(const OutlineNode& n) {
  if (!n.citations.empty()) return true;
  return std::any_of(n.children.begin(), n.children.end(), subtree_cited);
}

void collect_points(const OutlineNode& n, std::vector<std::pair<Fact, std::set<EvidenceId>>>& out) {
  if (!n.is_heading()) {
    if (auto f = fact_from_phrase(n.title)) out.emplace_back(*f, n.citations);
  }
  for (const auto& c : n.children) collect_points(c, out);
}

int budget_from(const std::string& system, const std::string& pattern) {
  std::smatch m;
  if (std::regex_search(system, m, std::regex(pattern))) return std::stoi(m[1].str());
  return 10;
}

class World {
 public:
  explicit World(const SyntheticWorld& w) : truth_pairs(pair_set(w.truth_kg)) {
    for (const auto& [id, n] : w.truth_kg.nodes()) names[to_lower_ascii(n.name)] = n.name;
    for (const auto& d : w.documents) {
      DocEntry e{d.url, d.title, d.text, {}};
      for (const auto& f : page_facts(d.text)) {
        e.mentions.insert(to_lower_ascii(f.source));
        e.mentions.insert(to_lower_ascii(f.target));
      }
      docs.push_back(std::move(e));
    }
    index = w.query_index;
  }

  // Node names in order of first appearance.
  std::vector<std::string> names_in(const std::string& text) const {
    std::vector<std::string> out;
    std::set<std::string> seen;
    for (const auto& tok : word_tokens(text)) {
      auto it = names.find(tok);
      if (it != names.end() && seen.insert(tok).second) out.push_back(it->second);
    }
    return out;
  }

  struct DocEntry {
    std::string url;
    std::string title;
    std::string text;
    std::set<std::string> mentions;
  };
  std::map<std::string, std::string> names;  // lowercase -> display
  std::vector<DocEntry> docs;
  std::map<std::string, std::vector<std::size_t>> index;
  std::set<std::pair<std::string, std::string>> truth_pairs;
};

class SimEmbedder : public EmbeddingProvider {
 public:
  SimEmbedder(const SyntheticWorld& w, std::uint64_t seed) : seed_(seed), weight_(w.topic_weight) {
    for (const auto& [id, n] : w.truth_kg.nodes()) community_[to_lower_ascii(n.name)] = w.planted_community.at(id);
  }
  std::vector<Embedding> embed(const std::vector<std::string>& texts) override {
    std::vector<Embedding> out;
    for (const auto& text : texts) {
      auto tokens = word_tokens(text);
      if (tokens.empty()) tokens.push_back("\x01" + text);
      Embedding v(kDim, 0.0);
      for (const auto& tok : tokens) {
        add(v, hash_string(tok, seed_), 1.0);
        auto it = community_.find(tok);
        if (it != community_.end()) add(v, hash_string("community/" + std::to_string(it->second), seed_), weight_);
      }
      double norm = 0.0;
      for (double x : v) norm += x * x;
      norm = std::sqrt(norm);
      for (auto& x : v) x /= norm;
      out.push_back(std::move(v));
    }
    return out;
  }

 private:
  static constexpr std::size_t kDim = 64;
  static void add(Embedding& v, std::uint64_t state, double scale) {
    Embedding d(kDim);
    double norm = 0.0;
    for (auto& x : d) {
      x = static_cast<double>(splitmix64(state) >> 11) * 0x1.0p-52 - 1.0;
      norm += x * x;
    }
    norm = std::sqrt(norm);
    for (std::size_t i = 0; i < kDim; ++i) v[i] += scale * d[i] / norm;
  }
  std::uint64_t seed_;
  double weight_;
  std::map<std::string, int> community_;
};

class SimSearch : public SearchProvider {
 public:
  explicit SimSearch(std::shared_ptr<const World> w) : w_(std::move(w)) {}
  std::vector<SearchResult> search(const std::string& query, int top_n) override {
    std::set<std::string> matched;
    for (const auto& tok : word_tokens(query)) {
      if (w_->index.count(tok)) matched.insert(tok);
    }
    std::set<std::size_t> pool;
    for (const auto& m : matched) pool.insert(w_->index.at(m).begin(), w_->index.at(m).end());
    const auto nq = normalize_query(query);
    struct Scored {
      std::size_t score;
      std::uint64_t tie;
      std::size_t doc;
    };
    std::vector<Scored> scored;
    for (auto d : pool) {
      std::size_t s = 0;
      for (const auto& m : matched) s += w_->docs[d].mentions.count(m);
      scored.push_back({s, hash_string(nq + "|" + w_->docs[d].url), d});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
      return a.score != b.score ? a.score > b.score : a.tie != b.tie ? a.tie < b.tie : a.doc < b.doc;
    });
    std::vector<SearchResult> out;
    for (const auto& s : scored) {
      if (static_cast<int>(out.size()) >= top_n) break;
      const auto& d = w_->docs[s.doc];
      out.push_back({d.url, d.title, split_lines(d.text).size() > 1 ? split_lines(d.text)[1] : d.title,
                     static_cast<int>(out.size()) + 1});
    }
    return out;
  }

 private:
  std::shared_ptr<const World> w_;
};

class SimFetch : public FetchProvider {
 public:
  explicit SimFetch(std::shared_ptr<const World> w) : w_(std::move(w)) {
    for (const auto& d : w_->docs) by_url_[normalize_url(d.url)] = d.text;
  }
  std::string fetch(const std::string& url) override {
    auto it = by_url_.find(normalize_url(url));
    if (it == by_url_.end()) throw Error(ErrorKind::Provider, "simulated fetch: unknown url " + url);
    return it->second;
  }

 private:
  std::shared_ptr<const World> w_;
  std::map<std::string, std::string> by_url_;
};

class SimChat : public ChatProvider {
 public:
  SimChat(std::shared_ptr<const World> w, SimBehavior behavior) : w_(std::move(w)), behavior_(behavior) {}

  std::string complete(const ChatRequest& r) override {
    if (r.task == "create_outline") return create_outline(r);
    if (r.task == "generate_search_queries") return og_queries(r);
    if (r.task == "filter_urls") return filter_urls(r);
    if (r.task == "extract_evidence") return extract_evidence(r);
    if (r.task == "extract_knowledge_nodes") return extract_nodes(r);
    if (r.task == "merge_knowledge_nodes") return R"({"clusters": []})";
    if (r.task == "kg_chain_selection") return select_chains(r);
    if (r.task == "update_outline") return update_outline(r);
    if (r.task == "early_stop") return early_stop(r);
    if (r.task == "write_section") return write_section(r);
    throw Error(ErrorKind::UnmatchedPrompt, "simulated chat has no rule for task " + r.task);
  }

 private:
  std::string create_outline(const ChatRequest& r) const {
    auto cores = w_->names_in(r.user);
    std::string out = "Concept map for " + join_names(cores);
    for (std::size_t i = 0; i < cores.size(); ++i) out += "\n" + std::to_string(i + 1) + ". " + cores[i];
    return out;
  }

  // Uncited headings first, then the least-queried ones; each entity gets the
  // first phrasing not yet used.
  std::string og_queries(const ChatRequest& r) const {
    const int budget = budget_from(r.system, R"(formulate (\d+) new)");
    auto og = parse_outline(between(r.user, "Current Outline:\n", "\n\nHistorical Search Queries"));
    auto executed = list_section(between(r.user, "Historical Search Queries (executed):\n", "\n\nPending Search"));
    auto pending = list_section(between(r.user, "Pending Search Queries (planned, NOT executed yet):\n"));

    std::set<std::string> used;
    std::map<std::string, int> asked;
    for (const auto* list : {&executed, &pending}) {
      for (const auto& q : *list) {
        used.insert(normalize_query(q));
        for (const auto& n : w_->names_in(q)) ++asked[n];
      }
    }
    struct Entity {
      std::string name;
      bool cited;
      std::size_t order;
    };
    std::vector<Entity> entities;
    for (const auto& e : flatten(og)) {
      if (!e.node->is_heading()) continue;
      auto it = w_->names.find(to_lower_ascii(e.node->title));
      if (it == w_->names.end()) continue;
      entities.push_back({it->second, subtree_cited(*e.node), entities.size()});
    }
    std::stable_sort(entities.begin(), entities.end(), [&](const Entity& a, const Entity& b) {
      if (a.cited != b.cited) return !a.cited;
      return asked[a.name] < asked[b.name];
    });

    std::vector<std::string> out;
    for (int round = 0; round < budget && static_cast<int>(out.size()) < budget; ++round) {
      bool any = false;
      for (const auto& e : entities) {
        if (static_cast<int>(out.size()) >= budget) break;
        for (int k = asked[e.name];; ++k) {
          auto q = k == 0 ? e.name : e.name + " angle " + std::to_string(k);
          if (used.insert(normalize_query(q)).second) {
            out.push_back(q);
            asked[e.name] = k + 1;
            any = true;
            break;
          }
        }
      }
      if (!any) break;
    }
    std::string text;
    for (const auto& q : out) text += q + "\n";
    return text;
  }

  std::string filter_urls(const ChatRequest& r) const {
    static const std::regex line(R"(^\[(\d+)\])");
    json picks = json::array();
    for (const auto& l : split_lines(between(r.user, "Candidates:\n"))) {
      std::smatch m;
      if (std::regex_search(l, m, line)) picks.push_back(std::stoi(m[1].str()));
    }
    return picks.dump();
  }

  std::string extract_evidence(const ChatRequest& r) const {
    auto facts = page_facts(between(r.user, "Page Content:\n"));
    std::string summary, content;
    for (const auto& f : facts) {
      summary += (summary.empty() ? "" : "; ") + phrase(f);
      content += "FACT: " + f.source + " | " + f.relation + " | " + f.target + "\n";
    }
    if (!summary.empty()) summary += ".";
    return json{{"useful", !facts.empty()}, {"summary", summary}, {"content", trim(content)}}.dump();
  }

  std::string extract_nodes(const ChatRequest& r) const {
    std::set<std::string> cores;
    for (const auto& n : w_->names_in(between(r.user, "Root Query: ", "\n"))) cores.insert(n);
    std::map<std::string, NodeId> node_ids;
    std::map<std::tuple<std::string, std::string, std::string>, EdgeId> edge_ids;
    auto view = between(r.user, "Current Knowledge Graph:\n", "\n\nNext node id: ");
    if (!view.empty() && view[0] == '{') {
      auto j = json::parse(view);
      for (const auto& n : j.at("knowledge_nodes")) {
        node_ids[n.at("knowledge").get<std::string>()] = std::stoll(n.at("node_id").get<std::string>().substr(1));
      }
      static const std::regex rep(R"(^(\S+) - (.+) -> (\S+)$)");
      for (const auto& e : j.at("knowledge_edges")) {
        std::smatch m;
        auto text = e.at("representation").get<std::string>();
        if (std::regex_match(text, m, rep)) {
          edge_ids[{m[1].str(), m[2].str(), m[3].str()}] = std::stoll(e.at("edge_id").get<std::string>().substr(1));
        }
      }
    }
    NodeId next_node = std::stoll(between(r.user, "Next node id: n", "\n"));
    EdgeId next_edge = std::stoll(between(r.user, "Next edge id: e"));

    ExtractionResult out;
    auto node = [&](const std::string& name) {
      auto it = node_ids.find(name);
      if (it != node_ids.end()) return it->second;
      out.new_nodes.push_back({next_node, name, cores.count(name) > 0});
      node_ids[name] = next_node;
      return next_node++;
    };
    static const std::regex en(R"(^(EN\d+): (.*)$)");
    for (const auto& line : split_lines(r.user)) {
      std::smatch m;
      if (!std::regex_match(line, m, en)) continue;
      auto& edges = out.evidences_map[m[1].str()];
      for (const auto& f : facts_from_summary(m[2].str())) {
        auto s = node(f.source);
        auto t = node(f.target);
        if (s == t) continue;
        auto key = std::tuple{f.source, f.relation, f.target};
        auto it = edge_ids.find(key);
        EdgeId id;
        if (it != edge_ids.end()) {
          id = it->second;
        } else {
          id = next_edge++;
          edge_ids[key] = id;
          out.new_edges.push_back({id, s, t, f.relation});
        }
        if (std::find(edges.begin(), edges.end(), id) == edges.end()) edges.push_back(id);
      }
    }
    return render_extraction(out);
  }

  std::string select_chains(const ChatRequest& r) const {
    const int cap = budget_from(r.system, R"(select up to (\d+) chains)");
    ChainSelection s;
    for (const auto& line : split_lines(between(r.user, "Candidate Explore Chains:\n"))) {
      if (static_cast<int>(s.chains.size()) >= cap) break;
      auto first = line.find("; ");
      auto second = line.find("; ", first + 2);
      if (first == std::string::npos || second == std::string::npos) continue;
      const bool explore = line.compare(first + 2, 13, "type: explore") == 0;
      auto body = line.substr(second + 2);
      static const std::string arrow = " \xE2\x86\x92 ";
      auto a = body.find(arrow);
      auto b = body.rfind(arrow);
      if (a == std::string::npos || a == b) continue;
      auto src = body.substr(0, a);
      auto rel = body.substr(a + arrow.size(), b - a - arrow.size());
      auto tgt = body.substr(b + arrow.size());
      s.chains.push_back(line.substr(0, first));
      s.search_queries.push_back(explore ? src + " " + tgt : src + " " + rel + " " + tgt);
    }
    return render_chain_selection(s);
  }

  std::string update_outline(const ChatRequest& r) const {
    auto cores = w_->names_in(between(r.user, "Root Query: ", "\n"));
    auto old_og = parse_outline(between(r.user, "Current Outline:\n", "\n\nNew Evidence:\n"));

    std::vector<Fact> order;
    std::map<Fact, std::set<EvidenceId>> cites;
    auto add = [&](const Fact& f, const std::set<EvidenceId>& ids) {
      auto [it, fresh] = cites.try_emplace(f);
      if (fresh) order.push_back(f);
      it->second.insert(ids.begin(), ids.end());
    };
    std::vector<std::pair<Fact, std::set<EvidenceId>>> old_points;
    for (const auto& root : old_og.roots) collect_points(root, old_points);
    for (const auto& [f, ids] : old_points) add(f, ids);

    static const std::regex id_line(R"(^id_(\d+)$)");
    EvidenceId current = 0;
    for (const auto& line : split_lines(between(r.user, "New Evidence:\n", "\n\nKnowledge Graph:\n"))) {
      std::smatch m;
      if (std::regex_match(line, m, id_line)) {
        current = std::stoll(m[1].str());
      } else if (current > 0 && line.rfind("Summary: ", 0) == 0) {
        for (const auto& f : facts_from_summary(line.substr(9))) add(f, {current});
      }
    }

    const bool kg_context = between(r.user, "Knowledge Graph:\n").rfind("(not available)", 0) != 0;
    std::map<std::string, int> hops;
    std::vector<std::string> frontier;
    for (const auto& c : cores) {
      hops[c] = 0;
      frontier.push_back(c);
    }
    for (int d = 1; !frontier.empty(); ++d) {
      std::vector<std::string> next;
      for (const auto& f : order) {
        for (auto [a, b] : {std::pair{f.source, f.target}, std::pair{f.target, f.source}}) {
          if (hops.count(a) && hops[a] == d - 1 && !hops.count(b)) {
            hops[b] = d;
            next.push_back(b);
          }
        }
      }
      frontier = std::move(next);
    }
    std::vector<std::string> concepts;
    std::set<std::string> headed(cores.begin(), cores.end());
    for (const auto& f : order) {
      for (const auto& n : {f.source, f.target}) {
        if (headed.count(n)) continue;
        if (!kg_context && !(hops.count(n) && hops[n] <= behavior_.outline_hops)) continue;
        headed.insert(n);
        concepts.push_back(n);
      }
    }
    std::map<std::string, std::vector<Fact>> owned;
    std::vector<Fact> further;
    for (const auto& f : order) {
      if (headed.count(f.source)) {
        owned[f.source].push_back(f);
      } else if (headed.count(f.target)) {
        owned[f.target].push_back(f);
      } else {
        further.push_back(f);
      }
    }

    auto attach_points = [&](OutlineNode& heading, const std::vector<Fact>& facts) {
      std::vector<OutlineNode> points;
      for (const auto& f : facts) {
        OutlineNode p;
        p.title = phrase(f);
        p.citations = cites[f];
        points.push_back(std::move(p));
      }
      auto letter = [](std::vector<OutlineNode>& pts, std::size_t from, std::size_t to) {
        std::vector<OutlineNode> out;
        for (std::size_t i = from; i < to; ++i) {
          pts[i].letter = static_cast<char>('a' + (i - from));
          out.push_back(std::move(pts[i]));
        }
        return out;
      };
      if (points.size() <= 26 || heading.path.size() >= static_cast<std::size_t>(kMaxHeadingDepth)) {
        heading.children = letter(points, 0, std::min<std::size_t>(points.size(), 26));
        return;
      }
      for (std::size_t from = 0, part = 1; from < points.size(); from += 26, ++part) {
        OutlineNode chunk;
        chunk.path = heading.path;
        chunk.path.push_back(static_cast<int>(part));
        chunk.title = "Findings " + std::to_string(part);
        chunk.children = letter(points, from, std::min(points.size(), from + 26));
        heading.children.push_back(std::move(chunk));
      }
    };

    OutlineGraph og;
    og.title = old_og.title;
    for (const auto& c : cores) {
      OutlineNode h;
      h.path = {static_cast<int>(og.roots.size()) + 1};
      h.title = c;
      attach_points(h, owned[c]);
      og.roots.push_back(std::move(h));
    }
    if (!concepts.empty()) {
      OutlineNode related;
      related.path = {static_cast<int>(og.roots.size()) + 1};
      related.title = "Related concepts";
      for (const auto& c : concepts) {
        OutlineNode h;
        h.path = related.path;
        h.path.push_back(static_cast<int>(related.children.size()) + 1);
        h.title = c;
        attach_points(h, owned[c]);
        related.children.push_back(std::move(h));
      }
      og.roots.push_back(std::move(related));
    }
    if (!further.empty()) {
      OutlineNode rest;
      rest.path = {static_cast<int>(og.roots.size()) + 1};
      rest.title = "Further findings";
      attach_points(rest, further);
      og.roots.push_back(std::move(rest));
    }
    return render_outline(og, true);
  }

  std::string early_stop(const ChatRequest& r) const {
    auto og = parse_outline(between(r.user, "Current Outline:\n"));
    std::vector<std::pair<Fact, std::set<EvidenceId>>> points;
    for (const auto& root : og.roots) collect_points(root, points);
    std::set<std::pair<std::string, std::string>> stated;
    for (const auto& [f, ids] : points) {
      auto p = name_pair(f.source, f.target);
      if (w_->truth_pairs.count(p)) stated.insert(p);
    }
    const double cov = w_->truth_pairs.empty() ? 1.0
                                               : static_cast<double>(stated.size()) / w_->truth_pairs.size();
    std::size_t headings = 0, cited = 0;
    for (const auto& e : flatten(og)) {
      if (!e.node->is_heading()) continue;
      ++headings;
      cited += subtree_cited(*e.node) ? 1 : 0;
    }
    const double density = headings == 0 ? 0.0 : static_cast<double>(cited) / headings;
    double score = behavior_.base + behavior_.coverage_weight * cov + behavior_.density_weight * density;
    score = std::clamp(std::round(score * 100.0) / 100.0, 0.0, 100.0);
    json out = json::object();
    for (const auto& d : early_stop_dimensions()) out[d] = score;
    return out.dump();
  }

  std::string write_section(const ChatRequest& r) const {
    std::vector<std::string> ids;
    static const std::regex ev(R"(^\[(\d+)\] )");
    for (const auto& l : split_lines(between(r.user, "Supporting Evidence:\n"))) {
      std::smatch m;
      if (std::regex_search(l, m, ev)) ids.push_back(m[1].str());
    }
    static const std::regex heading(R"(^(\d+(?:\.\d+)*)\.? (.*)$)");
    std::string out;
    for (const auto& l : split_lines(between(r.user, "Current Section Outline:\n", "\n\nSupporting Evidence:"))) {
      std::smatch m;
      if (std::regex_match(l, m, heading)) {
        const auto label = m[1].str();
        const auto depth = static_cast<std::size_t>(std::count(label.begin(), label.end(), '.')) + 1;
        out += std::string(depth + 1, '#') + " " + label + (depth == 1 ? ". " : " ") + m[2].str() + "\n\n";
      } else if (l.size() > 3 && l[1] == '.') {
        out += trim(l.substr(2)) + (ids.empty() ? "" : " [" + ids.front() + "]") + ".\n\n";
      }
    }
    return trim(out);
  }

  std::shared_ptr<const World> w_;
  SimBehavior behavior_;
};

}  // namespace

std::vector<Fact> page_facts(const std::string& text) {
  std::vector<Fact> out;
  for (const auto& line : split_lines(text)) {
    if (line.rfind("FACT: ", 0) != 0) continue;
    auto body = line.substr(6);
    auto a = body.find(" | ");
    auto b = body.rfind(" | ");
    if (a == std::string::npos || a == b) continue;
    out.push_back({trim(body.substr(0, a)), trim(body.substr(a + 3, b - a - 3)), trim(body.substr(b + 3))});
  }
  return out;
}

SyntheticWorld generate_world(std::uint64_t seed, const WorldParams& p) {
  if (p.n_core < 1 || p.n_concepts < 1 || p.n_communities < 1 || p.docs_per_edge < 1) {
    throw Error(ErrorKind::Input, "world parameters must be >= 1");
  }
  const int total = p.n_core + p.n_concepts;
  if (p.n_communities > total) throw Error(ErrorKind::Input, "more communities than nodes");
  if (!(p.p_in >= 0.0 && p.p_in <= 1.0 && p.p_out >= 0.0 && p.p_out <= 1.0)) {
    throw Error(ErrorKind::Input, "edge probabilities must lie in [0, 1]");
  }

  std::uint64_t rng = seed ^ 0x5eedf00dULL;
  SyntheticWorld w;
  w.seed = seed;

  ExtractionResult r;
  std::set<std::string> taken;
  std::vector<std::vector<NodeId>> members(static_cast<std::size_t>(p.n_communities));
  std::vector<std::string> core_names;
  for (int k = 0; k < total; ++k) {
    std::string name;
    do {
      name = make_name(rng);
    } while (taken.count(to_lower_ascii(name)) || reserved_words().count(to_lower_ascii(name)));
    taken.insert(to_lower_ascii(name));
    const NodeId id = k + 1;
    const bool core = k < p.n_core;
    if (core) core_names.push_back(name);
    r.new_nodes.push_back({id, name, core});
    const int c = k % p.n_communities;
    w.planted_community[id] = c;
    members[static_cast<std::size_t>(c)].push_back(id);
  }

  std::set<std::pair<NodeId, NodeId>> present;
  auto add_edge = [&](NodeId u, NodeId v) {
    if (u > v) std::swap(u, v);
    if (!present.insert({u, v}).second) return false;
    const bool flip = splitmix64(rng) & 1;
    const auto& rel = relation_vocabulary()[pick(rng, relation_vocabulary().size())];
    r.new_edges.push_back({static_cast<EdgeId>(r.new_edges.size()) + 1, flip ? v : u, flip ? u : v, rel});
    return true;
  };

  for (const auto& m : members) {
    for (std::size_t i = 0; i + 1 < m.size(); ++i) w.planted_intra += add_edge(m[i], m[i + 1]) ? 1 : 0;
  }
  for (const auto& m : members) {
    for (std::size_t i = 0; i < m.size(); ++i) {
      for (std::size_t j = i + 2; j < m.size(); ++j) {
        if (uniform(rng) < p.p_in) w.planted_intra += add_edge(m[i], m[j]) ? 1 : 0;
      }
    }
  }
  if (p.n_communities >= 2) {
    const int bridges = p.n_communities == 2 ? 1 : p.n_communities;
    for (int c = 0; c < bridges; ++c) {
      const auto& a = members[static_cast<std::size_t>(c)];
      const auto& b = members[static_cast<std::size_t>((c + 1) % p.n_communities)];
      w.planted_inter += add_edge(a[pick(rng, a.size())], b[pick(rng, b.size())]) ? 1 : 0;
    }
    for (NodeId u = 1; u <= total; ++u) {
      for (NodeId v = u + 1; v <= total; ++v) {
        if (w.planted_community[u] == w.planted_community[v]) continue;
        if (uniform(rng) < p.p_out) w.planted_inter += add_edge(u, v) ? 1 : 0;
      }
    }
  }
  w.truth_kg.apply_extraction(r, {});
  w.topic_weight = p.topic_weight;
  w.root_query = "Map the concepts connected to " + join_names(core_names) + ".";

  const auto& kg = w.truth_kg;
  for (const auto& [eid, e] : kg.edges()) {
    std::vector<EdgeId> adjacent;
    for (const auto& [oid, o] : kg.edges()) {
      if (oid != eid && (o.source == e.source || o.source == e.target || o.target == e.source || o.target == e.target)) {
        adjacent.push_back(oid);
      }
    }
    for (int d = 0; d < p.docs_per_edge; ++d) {
      Document doc;
      doc.edges.push_back(eid);
      const std::size_t extra = std::min(pick(rng, 3), adjacent.size());
      auto pool = adjacent;
      for (std::size_t x = 0; x < extra; ++x) {
        auto i = pick(rng, pool.size());
        doc.edges.push_back(pool[i]);
        pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(i));
      }
      const auto& a = kg.node(e.source).name;
      const auto& b = kg.node(e.target).name;
      doc.url = "https://sim.example/w" + std::to_string(seed) + "/doc" + std::to_string(w.documents.size() + 1);
      doc.title = "Notes on " + a + " and " + b;
      doc.text = doc.title + "\nRelated findings about " + a + " and " + b + ".\n";
      for (auto id : doc.edges) {
        const auto& f = kg.edge(id);
        doc.text += "FACT: " + kg.node(f.source).name + " | " + f.relation + " | " + kg.node(f.target).name + "\n";
      }
      std::set<std::string> mentioned;
      for (const auto& f : page_facts(doc.text)) {
        mentioned.insert(to_lower_ascii(f.source));
        mentioned.insert(to_lower_ascii(f.target));
      }
      for (const auto& m : mentioned) w.query_index[m].push_back(w.documents.size());
      w.documents.push_back(std::move(doc));
    }
  }
  return w;
}

SyntheticWorld generate_world(std::uint64_t seed, int n_core, int n_concepts, int n_communities, int docs_per_edge) {
  WorldParams p;
  p.n_core = n_core;
  p.n_concepts = n_concepts;
  p.n_communities = n_communities;
  p.docs_per_edge = docs_per_edge;
  return generate_world(seed, p);
}

Providers simulated_providers(const SyntheticWorld& world, const SimBehavior& behavior, std::uint64_t embed_seed) {
  auto w = std::make_shared<const World>(world);
  return {std::make_shared<SimChat>(w, behavior), std::make_shared<SimSearch>(w), std::make_shared<SimFetch>(w),
          std::make_shared<SimEmbedder>(world, embed_seed)};
}

double coverage(const KnowledgeGraph& kg, const KnowledgeGraph& truth) {
  auto t = pair_set(truth);
  if (t.empty()) return 1.0;
  auto have = pair_set(kg);
  std::size_t hit = 0;
  for (const auto& p : t) hit += have.count(p);
  return static_cast<double>(hit) / static_cast<double>(t.size());
}

KnowledgeGraph extract_all(const EvidenceBank& bank) {
  std::vector<Fact> facts;
  for (const auto& u : bank.units()) {
    auto f = page_facts(u.content);
    facts.insert(facts.end(), f.begin(), f.end());
  }
  return kg_from_facts(facts);
}

KnowledgeGraph extract_all(const SyntheticWorld& world) {
  std::vector<Fact> facts;
  for (const auto& d : world.documents) {
    auto f = page_facts(d.text);
    facts.insert(facts.end(), f.begin(), f.end());
  }
  return kg_from_facts(facts);
}

double RunMetrics::coverage_at(int t) const {
  if (coverage_curve.empty()) return 0.0;
  const auto i = std::min<std::size_t>(static_cast<std::size_t>(std::max(t, 0)), coverage_curve.size() - 1);
  return coverage_curve[i];
}

RunMetrics simulate_run(const SyntheticWorld& world, RunConfig config, const SimBehavior& behavior,
                        bool stop_when_complete) {
  config.providers = "mock";
  config.fixture.clear();
  Orchestrator orch(config, simulated_providers(world, behavior, config.seed));
  RunMetrics m;
  m.seed = world.seed;
  m.variant = config.variant;
  auto state = orch.init_run(world.root_query);
  m.coverage_curve.push_back(coverage(extract_all(state.bank), world.truth_kg));
  while (orch.should_continue(state)) {
    if (stop_when_complete && m.coverage_curve.back() >= 1.0) break;
    orch.run_iteration(state);
    m.coverage_curve.push_back(coverage(extract_all(state.bank), world.truth_kg));
  }
  m.termination_iteration = state.iteration;
  m.stopped_early = state.stopped_early;
  m.kg_operations = orch.kg_operations();
  return m;
}

double AblationResult::mean_termination(Variant v) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : runs) {
    if (r.variant != v) continue;
    sum += r.termination_iteration;
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

double AblationResult::mean_coverage_at(Variant v, int t) const {
  double sum = 0.0;
  int n = 0;
  for (const auto& r : runs) {
    if (r.variant != v) continue;
    sum += r.coverage_at(t);
    ++n;
  }
  return n == 0 ? 0.0 : sum / n;
}

int AblationResult::pairs_dual_ahead(int t) const {
  int ahead = 0;
  for (std::size_t i = 0; i + 1 < runs.size(); i += 2) {
    if (runs[i].coverage_at(t) > runs[i + 1].coverage_at(t)) ++ahead;
  }
  return ahead;
}

AblationResult run_ablation(const std::vector<std::uint64_t>& seeds, const AblationConfig& config) {
  if (seeds.size() < 5) throw Error(ErrorKind::Input, "the ablation needs at least 5 seeds");
  config.run.validate();
  const std::size_t jobs = seeds.size() * 2;
  AblationResult result;
  result.runs.resize(jobs);
  std::vector<std::exception_ptr> errors(jobs);
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t j; (j = next.fetch_add(1)) < jobs;) {
      try {
        auto world = generate_world(seeds[j / 2], config.world);
        auto rc = config.run;
        rc.seed = seeds[j / 2];
        rc.variant = j % 2 == 0 ? Variant::DualGraph : Variant::OutlineOnly;
        result.runs[j] = simulate_run(world, rc, config.behavior);
      } catch (...) {
        errors[j] = std::current_exception();
      }
    }
  };
  std::size_t threads = config.parallelism > 0 ? static_cast<std::size_t>(config.parallelism)
                                               : std::max(1u, std::thread::hardware_concurrency());
  threads = std::min(threads, jobs);
  std::vector<std::thread> pool;
  for (std::size_t i = 0; i < threads; ++i) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
  return result;
}

namespace {
std::string fmt(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", x);
  return buf;
}
}  // namespace

std::string metrics_tsv(const AblationResult& result) {
  std::string out = "seed\tvariant\ttermination_iteration\tstopped_early\tcoverage_at_2\tfinal_coverage\n";
  for (const auto& r : result.runs) {
    out += std::to_string(r.seed) + "\t" + to_string(r.variant) + "\t" + std::to_string(r.termination_iteration) +
           "\t" + (r.stopped_early ? "1" : "0") + "\t" + fmt(r.coverage_at(2)) + "\t" +
           fmt(r.coverage_curve.empty() ? 0.0 : r.coverage_curve.back()) + "\n";
  }
  return out;
}

std::string plot_data_tsv(const AblationResult& result) {
  std::string out = "variant\tseed\titeration\tcoverage\n";
  for (const auto& r : result.runs) {
    for (std::size_t t = 0; t < r.coverage_curve.size(); ++t) {
      out += std::string(to_string(r.variant)) + "\t" + std::to_string(r.seed) + "\t" + std::to_string(t) + "\t" +
             fmt(r.coverage_curve[t]) + "\n";
    }
  }
  return out;
}

std::string summary_json(const AblationResult& result) {
  json j;
  j["seeds"] = result.runs.size() / 2;
  for (auto v : {Variant::DualGraph, Variant::OutlineOnly}) {
    j[to_string(v)] = {{"mean_termination_iteration", result.mean_termination(v)},
                       {"mean_coverage_at_2", result.mean_coverage_at(v, 2)}};
  }
  j["pairs_dualgraph_ahead_at_2"] = result.pairs_dual_ahead(2);
  return j.dump(2) + "\n";
}

}  // namespace dualgraph::sim
