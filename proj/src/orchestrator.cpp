#include "dualgraph/orchestrator.hpp"

#include <algorithm>
#include <regex>
#include <set>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"

namespace dualgraph {

namespace {

constexpr std::size_t kMaxPageChars = 12000;

std::string join_lines(const std::vector<std::string>& items) {
  if (items.empty()) return "(none)";
  std::string out;
  for (const auto& s : items) out += s + "\n";
  out.pop_back();
  return out;
}

bool retryable(ErrorKind k) {
  return k != ErrorKind::Provider && k != ErrorKind::ScriptExhausted && k != ErrorKind::UnmatchedPrompt &&
         k != ErrorKind::Render && k != ErrorKind::NotFound;
}

void clear_citations(OutlineNode& n) {
  n.citations.clear();
  for (auto& c : n.children) clear_citations(c);
}

std::string evidence_block(const EvidenceUnit& u) {
  return render_evidence_token(u.id) + "\nTitle: " + u.title + "\nURL: " + u.url + "\nQuery: " + u.query +
         "\nSummary: " + u.summary;
}

std::string heading_line(const OutlineNode& n, int depth) {
  return std::string(static_cast<std::size_t>(depth) + 1, '#') + " " + n.label() + (depth == 1 ? "." : "") + " " +
         n.title;
}

void section_lines(const OutlineNode& n, int depth, std::ostringstream& out, std::set<EvidenceId>& cites,
                   std::vector<std::string>& headings) {
  if (n.is_heading()) {
    out << n.label() << (depth == 1 ? "." : "") << ' ' << n.title << '\n';
    headings.push_back(heading_line(n, depth));
  } else {
    out << n.letter << ". " << n.title << '\n';
  }
  cites.insert(n.citations.begin(), n.citations.end());
  for (const auto& c : n.children) section_lines(c, depth + 1, out, cites, headings);
}

// Keeps bracketed numeric citations that point at allowed ids; drops the rest.
std::string sanitize_citations(const std::string& text, const std::set<EvidenceId>& allowed) {
  static const std::regex bracket(R"( ?\[(\d+(?:\s*,\s*\d+)*)\])");
  std::string out;
  auto begin = std::sregex_iterator(text.begin(), text.end(), bracket);
  std::size_t last = 0;
  for (auto it = begin; it != std::sregex_iterator(); ++it) {
    const auto& m = *it;
    out += text.substr(last, static_cast<std::size_t>(m.position()) - last);
    last = static_cast<std::size_t>(m.position() + m.length());
    std::set<EvidenceId> keep;
    std::stringstream ss(m[1].str());
    std::string tok;
    while (std::getline(ss, tok, ',')) {
      tok = trim(tok);
      if (tok.size() > 12) continue;
      auto id = std::stoll(tok);
      if (allowed.count(id)) keep.insert(id);
    }
    if (keep.empty()) continue;
    out += m.str()[0] == ' ' ? " [" : "[";
    bool first = true;
    for (auto id : keep) {
      if (!first) out += ",";
      out += std::to_string(id);
      first = false;
    }
    out += "]";
  }
  out += text.substr(last);
  return out;
}

}  // namespace

const char* to_string(Variant v) { return v == Variant::DualGraph ? "dualgraph" : "outline-only"; }

Variant parse_variant(std::string_view text) {
  if (text == "dualgraph") return Variant::DualGraph;
  if (text == "outline-only") return Variant::OutlineOnly;
  throw Error(ErrorKind::Input, "unknown variant '" + std::string(text) + "' (expected dualgraph or outline-only)");
}

double RunConfig::threshold(const std::string& dimension) const {
  auto it = early_stop_thresholds.find(dimension);
  return it == early_stop_thresholds.end() ? 75.0 : it->second;
}

void RunConfig::validate() const {
  auto fail = [](const std::string& m) { throw Error(ErrorKind::Input, "config: " + m); };
  if (max_iter < 0) fail("max_iter must be >= 0");
  if (og_query_budget < 1 || kg_query_budget < 1 || urls_per_query < 1) fail("budgets must be >= 1");
  if (enrich_threshold < 0) fail("enrich_threshold must be >= 0");
  if (!(sbm_alpha > 0.0)) fail("sbm_alpha must be > 0");
  if (!(leiden_resolution > 0.0)) fail("leiden_resolution must be > 0");
  if (!(cluster_threshold >= -1.0 && cluster_threshold <= 1.0)) fail("cluster_threshold must lie in [-1, 1]");
  if (!(near_duplicate_threshold >= -1.0 && near_duplicate_threshold <= 1.0)) {
    fail("near_duplicate_threshold must lie in [-1, 1]");
  }
  if (retry_budget < 0) fail("retry_budget must be >= 0");
  if (providers != "mock" && providers != "live") fail("providers must be mock or live");
  const auto& dims = early_stop_dimensions();
  for (const auto& [dim, value] : early_stop_thresholds) {
    if (std::find(dims.begin(), dims.end(), dim) == dims.end()) fail("unknown early-stop dimension '" + dim + "'");
    if (!(value >= 0.0 && value <= 100.0)) fail("threshold for " + dim + " must lie in [0, 100]");
  }
}

Orchestrator::Orchestrator(RunConfig config, Providers providers, PromptLibrary prompts)
    : config_(std::move(config)), providers_(std::move(providers)), prompts_(std::move(prompts)) {
  config_.validate();
  if (!providers_.chat || !providers_.search || !providers_.fetch || !providers_.embed) {
    throw Error(ErrorKind::Input, "all four providers are required");
  }
}

std::string Orchestrator::ask(const std::string& task, const std::map<std::string, std::string>& vars) {
  return providers_.chat->complete(render_prompt(prompts_.get(task), vars));
}

template <class Parse>
auto Orchestrator::ask_parsed(const std::string& task, std::map<std::string, std::string> vars, int reasks,
                              Parse parse) -> decltype(parse(std::string())) {
  auto request = render_prompt(prompts_.get(task), vars);
  const std::string base_user = request.user;
  for (int attempt = 0;; ++attempt) {
    auto response = providers_.chat->complete(request);
    try {
      return parse(response);
    } catch (const Error& e) {
      if (!retryable(e.kind()) || attempt >= reasks) throw;
      notes_.push_back(task + ": re-asking after " + to_string(e.kind()) + " error: " + e.what());
      request.user = base_user + "\n\nYour previous output was rejected (" + e.what() +
                     "). Reply again and follow the required output format exactly.";
    }
  }
}

RunState Orchestrator::init_run(const std::string& root_query) {
  if (trim(root_query).empty()) throw Error(ErrorKind::Input, "root query must not be empty");
  RunState state;
  state.root_query = trim(root_query);

  record(0, "CreateOutline");
  state.og = ask_parsed("create_outline", {{"ROOT_QUERY", state.root_query}}, config_.retry_budget,
                        [](const std::string& text) {
                          auto og = parse_outline(text);
                          for (auto& r : og.roots) clear_citations(r);
                          return og;
                        });

  record(0, "GenFromOG");
  auto q0 = gen_queries_from_og(state.og, {}, {}, config_.og_query_budget);
  q0 = dedup_queries(q0, {}, {});
  state.last_queries = q0;

  record(0, "Search");
  auto d0 = search(state, q0, 0);

  if (config_.variant == Variant::DualGraph) {
    record(0, "BuildKG");
    state.kg.emplace();
    update_kg(state, d0);
  }
  return state;
}

bool Orchestrator::should_continue(const RunState& state) const {
  return !state.stopped_early && state.iteration < config_.max_iter;
}

void Orchestrator::run_iteration(RunState& state) {
  const int t = state.iteration;
  if (t >= config_.max_iter) throw Error(ErrorKind::Precondition, "iteration budget already used");
  state.last_chains.clear();

  if (config_.variant == Variant::DualGraph) {
    if (!state.kg) throw Error(ErrorKind::Consistency, "dual-graph run without a knowledge graph");
    state.kg->ensure_embeddings(*providers_.embed);
    record(t, "GenFromKG");
    auto [chains, selection] = gen_queries_from_kg(state);
    state.last_chains = chains;
    std::vector<std::string> qkg = selection.search_queries;
    state.pending_queries = qkg;

    std::vector<std::string> qog;
    if (t > 0) {
      record(t, "GenFromOG");
      qog = gen_queries_from_og(state.og, state.executed_queries, state.pending_queries, config_.og_query_budget);
    }
    record(t, "Dedup");
    std::vector<std::string> all = qkg;
    all.insert(all.end(), qog.begin(), qog.end());
    state.pending_queries.clear();
    auto queries = dedup_queries(all, state.executed_queries, {});
    state.last_queries = queries;

    record(t, "Search");
    auto fresh = search(state, queries, t + 1);
    record(t, "UpdateKG");
    update_kg(state, fresh);
    record(t, "UpdateOG");
    update_og(state);
  } else {
    record(t, "UpdateOG");
    update_og(state);
    record(t, "GenFromOG");
    auto qog = gen_queries_from_og(state.og, state.executed_queries, {}, config_.og_query_budget);
    record(t, "Dedup");
    auto queries = dedup_queries(qog, state.executed_queries, {});
    state.last_queries = queries;
    record(t, "Search");
    search(state, queries, t + 1);
  }

  if (config_.early_stop && t >= 1) {
    record(t, "EarlyStop");
    auto report = evaluate_early_stop(state.root_query, state.og, t + 1);
    state.early_stop_history.push_back(report);
    if (report.stop) state.stopped_early = true;
  }
  state.iteration = t + 1;
}

std::vector<std::string> Orchestrator::gen_queries_from_og(const OutlineGraph& og,
                                                           const std::vector<std::string>& executed,
                                                           const std::vector<std::string>& pending, int budget) {
  if (budget < 1) throw Error(ErrorKind::Input, "query budget must be >= 1");
  auto lines = ask_parsed("generate_search_queries",
                          {{"QUERY_NUM", std::to_string(budget)},
                           {"OUTLINE", render_outline(og, true)},
                           {"EXECUTED_QUERIES", join_lines(executed)},
                           {"PENDING_QUERIES", join_lines(pending)}},
                          1, [&](const std::string& text) {
                            auto q = parse_query_lines(text, budget);
                            if (q.violations > 0) {
                              throw Error(ErrorKind::Parse, "query list has " + std::to_string(q.violations) +
                                                                " formatting violations");
                            }
                            return q.queries;
                          });
  std::set<std::string> blocked;
  for (const auto& q : executed) blocked.insert(normalize_query(q));
  for (const auto& q : pending) blocked.insert(normalize_query(q));
  std::vector<std::string> out;
  for (auto& q : lines) {
    if (blocked.insert(normalize_query(q)).second) out.push_back(std::move(q));
  }
  return out;
}

std::pair<std::vector<SearchChain>, ChainSelection> Orchestrator::gen_queries_from_kg(const RunState& state) {
  const auto& kg = *state.kg;
  if (kg.empty()) return {};
  ++kg_ops_;
  auto chains = build_search_chains(kg, kg.partition(),
                                    {config_.kg_query_budget, config_.enrich_threshold, config_.sbm_alpha});
  if (chains.empty()) return {};
  std::set<std::string> known;
  for (const auto& c : chains) known.insert(c.chain_id);

  auto selection = ask_parsed("kg_chain_selection",
                              {{"CHAIN_NUM", std::to_string(config_.kg_query_budget)},
                               {"ROOT_QUERY", state.root_query},
                               {"OUTLINE", render_outline(state.og, true)},
                               {"KNOWLEDGE_GRAPH", kg_prompt_view(kg, true)},
                               {"LANGUAGE", config_.language},
                               {"CANDIDATE_CHAINS", render_chain_candidates(kg, chains)}},
                              1, [&](const std::string& text) {
                                auto s = parse_chain_selection(text, config_.kg_query_budget);
                                for (const auto& id : s.chains) {
                                  if (!known.count(id)) {
                                    throw Error(ErrorKind::Validation, "selection names unknown chain '" + id + "'");
                                  }
                                }
                                return s;
                              });
  return {std::move(chains), std::move(selection)};
}

std::vector<std::string> Orchestrator::dedup_queries(const std::vector<std::string>& fresh,
                                                     const std::vector<std::string>& executed,
                                                     const std::vector<std::string>& pending) {
  std::vector<std::string> reference(executed);
  reference.insert(reference.end(), pending.begin(), pending.end());
  std::vector<std::string> candidates;
  for (const auto& q : fresh) {
    if (!trim(q).empty()) candidates.push_back(trim(q));
  }
  if (candidates.empty()) return {};

  std::vector<std::string> all(reference);
  all.insert(all.end(), candidates.begin(), candidates.end());
  auto vecs = providers_.embed->embed(all);

  std::set<std::string> seen;
  std::vector<std::size_t> kept;  // indices into `all`
  for (std::size_t i = 0; i < reference.size(); ++i) {
    seen.insert(normalize_query(reference[i]));
    kept.push_back(i);
  }
  std::vector<std::string> out;
  for (std::size_t i = reference.size(); i < all.size(); ++i) {
    auto norm = normalize_query(all[i]);
    if (norm.empty() || seen.count(norm)) continue;
    bool near = false;
    for (auto k : kept) {
      if (cosine_similarity(vecs[i], vecs[k]) >= config_.near_duplicate_threshold) {
        near = true;
        break;
      }
    }
    if (near) continue;
    seen.insert(norm);
    kept.push_back(i);
    out.push_back(all[i]);
  }
  return out;
}

std::vector<EvidenceId> Orchestrator::search(RunState& state, const std::vector<std::string>& queries, int iteration) {
  std::vector<EvidenceId> accepted;
  for (const auto& query : queries) {
    state.executed_queries.push_back(query);
    auto results = providers_.search->search(query, config_.urls_per_query);
    std::vector<SearchResult> fresh;
    std::set<std::string> batch;
    for (auto& r : results) {
      auto norm = normalize_url(r.url);
      if (r.url.empty() || state.bank.seen(r.url) || !batch.insert(norm).second) continue;
      fresh.push_back(std::move(r));
    }
    if (fresh.empty()) continue;

    std::ostringstream cands;
    for (std::size_t i = 0; i < fresh.size(); ++i) {
      cands << "[" << i << "] " << fresh[i].title << "\n    " << fresh[i].url << "\n    " << fresh[i].snippet << "\n";
    }
    auto picked = ask_parsed("filter_urls", {{"SEARCH_QUERY", query}, {"CANDIDATES", cands.str()}},
                             config_.retry_budget, [&](const std::string& text) {
                               return parse_url_filter(text, static_cast<int>(fresh.size()));
                             });

    for (int i : picked) {
      const auto& r = fresh[static_cast<std::size_t>(i)];
      std::string page;
      try {
        page = providers_.fetch->fetch(r.url);
      } catch (const Error& e) {
        if (e.kind() != ErrorKind::Provider) throw;
        notes_.push_back("skipped " + r.url + ": " + e.what());
        continue;
      }
      if (page.size() > kMaxPageChars) page.resize(kMaxPageChars);
      auto ev = ask_parsed("extract_evidence",
                           {{"ROOT_QUERY", state.root_query}, {"SEARCH_QUERY", query}, {"URL", r.url}, {"PAGE", page}},
                           config_.retry_budget, [](const std::string& text) { return parse_evidence_extraction(text); });
      if (!ev.useful) continue;
      if (auto id = state.bank.add(r.url, r.title, query, ev.summary, ev.content, iteration)) accepted.push_back(*id);
    }
  }
  return accepted;
}

void Orchestrator::update_kg(RunState& state, const std::vector<EvidenceId>& fresh) {
  auto& kg = *state.kg;
  const int t = state.iteration;

  std::vector<std::string> order;
  std::map<std::string, std::vector<EvidenceId>> by_query;
  for (auto id : fresh) {
    const auto& q = state.bank.get(id).query;
    if (!by_query.count(q)) order.push_back(q);
    by_query[q].push_back(id);
  }

  for (const auto& query : order) {
    std::map<std::string, EvidenceId> labels;
    std::ostringstream statements;
    int k = 0;
    for (auto id : by_query[query]) {
      const auto& u = state.bank.get(id);
      const std::string label = "EN" + std::to_string(++k);
      labels[label] = id;
      statements << label << ": " << u.summary << "\nOriginal content: " << u.content << "\n\n";
    }
    ++kg_ops_;
    ask_parsed("extract_knowledge_nodes",
               {{"ROOT_QUERY", state.root_query},
                {"SEARCH_QUERY", query},
                {"EVIDENCE_STATEMENTS", trim(statements.str())},
                {"KNOWLEDGE_GRAPH", kg.empty() ? "(none: initial extraction)" : kg_prompt_view(kg, false)},
                {"NEXT_NODE_ID", render_node_id(kg.max_node_id() + 1)},
                {"NEXT_EDGE_ID", render_edge_id(kg.max_edge_id() + 1)}},
               config_.retry_budget, [&](const std::string& text) {
                 auto result = parse_extraction(text, &kg);
                 kg.apply_extraction(result, labels);
                 return 0;
               });
  }

  std::size_t concepts = 0;
  for (const auto& [id, n] : kg.nodes()) concepts += n.is_core_entity ? 0 : 1;
  if (concepts >= 2) {
    kg.ensure_embeddings(*providers_.embed);
    auto clusters = kg.cluster_semantic(config_.cluster_threshold);
    std::map<int, std::vector<NodeId>> groups;
    for (const auto& [id, c] : clusters) {
      if (!kg.node(id).is_core_entity) groups[c].push_back(id);
    }
    std::vector<std::string> hints;
    for (const auto& [c, ids] : groups) {
      if (ids.size() < 2) continue;
      std::string line;
      for (auto id : ids) line += (line.empty() ? "" : ", ") + render_node_id(id) + " (" + kg.node(id).name + ")";
      hints.push_back(line);
    }
    ++kg_ops_;
    auto report = ask_parsed("merge_knowledge_nodes",
                             {{"ROOT_QUERY", state.root_query},
                              {"KNOWLEDGE_GRAPH", kg_prompt_view(kg, false)},
                              {"CLUSTER_HINTS", join_lines(hints)}},
                             config_.retry_budget,
                             [&](const std::string& text) { return kg.merge_nodes(parse_merge(text)); });
    for (const auto& [from, to] : report.redirected) {
      notes_.push_back("merged " + render_node_id(from) + " into " + render_node_id(to));
    }
    for (auto e : report.dropped_self_loops) notes_.push_back("dropped self-loop " + render_edge_id(e));
    for (auto id : report.dropped_evidence) {
      notes_.push_back("evidence " + render_evidence_token(id) + " no longer grounds any edge after merge");
    }
  }
  refresh_structure(kg, t);
}

void Orchestrator::refresh_structure(KnowledgeGraph& kg, int iteration) {
  if (kg.empty()) return;
  kg.ensure_embeddings(*providers_.embed);
  ++kg_ops_;
  kg.set_clusters(kg.cluster_semantic(config_.cluster_threshold));
  ++kg_ops_;
  LeidenOptions opts;
  opts.resolution = config_.leiden_resolution;
  kg.set_partition(detect_communities(kg, config_.seed + static_cast<std::uint64_t>(iteration), opts));
}

void Orchestrator::update_og(RunState& state) {
  auto fresh = state.bank.since(state.outline_seen);
  if (fresh.empty()) return;
  std::string evidence;
  for (const auto& u : fresh) evidence += evidence_block(u) + "\n\n";
  std::string kg_view = "(not available)";
  if (config_.variant == Variant::DualGraph && state.kg) kg_view = kg_prompt_view(*state.kg, true);

  auto result = ask_parsed("update_outline",
                           {{"ROOT_QUERY", state.root_query},
                            {"OUTLINE", render_outline(state.og, true)},
                            {"EVIDENCE", trim(evidence)},
                            {"KNOWLEDGE_GRAPH", kg_view}},
                           config_.retry_budget, [&](const std::string& text) {
                             return apply_revision(state.og, text, state.bank, *providers_.embed);
                           });
  for (const auto& m : result.moves) {
    notes_.push_back("citation " + render_evidence_token(m.id) + " carried from " + m.from_label + " to " +
                     m.to_label);
  }
  state.og = std::move(result.outline);
  state.outline_seen = state.bank.size();
}

EarlyStopReport Orchestrator::evaluate_early_stop(const std::string& root_query, const OutlineGraph& og,
                                                  int iteration) {
  EarlyStopReport report;
  report.iteration = iteration;
  try {
    report.scores = ask_parsed("early_stop", {{"ROOT_QUERY", root_query}, {"OUTLINE", render_outline(og, true)}}, 1,
                               [](const std::string& text) { return parse_early_stop(text); });
  } catch (const Error& e) {
    if (!retryable(e.kind())) throw;
    report.parsed = false;
    report.stop = false;
    for (const auto& d : early_stop_dimensions()) report.scores[d] = 0.0;
    notes_.push_back(std::string("early-stop scores unusable: ") + e.what());
    return report;
  }
  if (all_citations(og).empty()) report.scores["support"] = 0.0;
  report.stop = true;
  for (const auto& d : early_stop_dimensions()) {
    if (report.scores.at(d) < config_.threshold(d)) report.stop = false;
  }
  return report;
}

std::string Orchestrator::write_report(const RunState& state) {
  for (const auto& e : flatten(state.og)) {
    for (auto id : e.node->citations) {
      if (!state.bank.contains(id)) {
        throw Error(ErrorKind::Consistency, "section " + e.node->label() + " cites " + render_evidence_token(id) +
                                                ", which is not in the evidence bank");
      }
    }
  }
  record(state.iteration, "WriteReport");

  std::string report = "# " + state.og.title + "\n";
  std::string previous;
  for (const auto& root : state.og.roots) {
    std::ostringstream outline;
    std::set<EvidenceId> cites;
    std::vector<std::string> headings;
    section_lines(root, 1, outline, cites, headings);

    std::string evidence;
    for (auto id : cites) {
      const auto& u = state.bank.get(id);
      evidence += "[" + std::to_string(id) + "] " + u.title + "\nURL: " + u.url + "\nSummary: " + u.summary +
                  "\nContent: " + u.content + "\n\n";
    }
    auto section = ask_parsed("write_section",
                              {{"ROOT_QUERY", state.root_query},
                               {"REPORT_TITLE", state.og.title},
                               {"PREVIOUS_SECTIONS", previous.empty() ? "(none)" : previous},
                               {"SECTION_OUTLINE", trim(outline.str())},
                               {"EVIDENCE", evidence.empty() ? "(none)" : trim(evidence)}},
                              config_.retry_budget, [&](const std::string& text) {
                                std::set<std::string> lines;
                                for (const auto& l : split_lines(text)) {
                                  auto tl = trim(l);
                                  if (tl.rfind("#####", 0) == 0) {
                                    throw Error(ErrorKind::Validation, "section uses a heading deeper than ####");
                                  }
                                  lines.insert(tl);
                                }
                                for (const auto& h : headings) {
                                  if (!lines.count(h)) throw Error(ErrorKind::Validation, "missing heading '" + h + "'");
                                }
                                return sanitize_citations(trim(text), cites);
                              });
    report += "\n" + section + "\n";
    previous += (previous.empty() ? "" : "\n\n") + section;
  }
  return report;
}

}  // namespace dualgraph
