#include "dualgraph/parsers.hpp"

#include <algorithm>
#include <set>

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"
#include "json_io.hpp"

namespace dualgraph {

using detail::json;

namespace {

json load(std::string_view text, json::value_t expected, const char* what) {
  auto j = detail::parse_json_lenient(strip_code_fence(text));
  if (j.is_discarded()) throw Error(ErrorKind::Parse, std::string(what) + ": output is not valid JSON");
  if (j.type() != expected) {
    throw Error(ErrorKind::Parse, std::string(what) + ": expected a JSON " +
                                      (expected == json::value_t::object ? "object" : "array"));
  }
  return j;
}

const json& field(const json& obj, const char* key, const char* what) {
  auto it = obj.find(key);
  if (it == obj.end()) throw Error(ErrorKind::Schema, std::string(what) + ": missing key \"" + key + "\"");
  return *it;
}

std::string text_field(const json& obj, const char* key, const char* what, bool allow_empty = false) {
  const auto& v = field(obj, key, what);
  if (!v.is_string()) throw Error(ErrorKind::Schema, std::string(what) + ": \"" + key + "\" must be a string");
  auto s = v.get<std::string>();
  if (!allow_empty && trim(s).empty()) {
    throw Error(ErrorKind::Schema, std::string(what) + ": \"" + key + "\" must not be empty");
  }
  return s;
}

std::int64_t id_field(const json& v, char prefix, const char* what) {
  if (!v.is_string()) throw Error(ErrorKind::Schema, std::string(what) + ": ids must be strings");
  auto id = parse_prefixed_id(v.get<std::string>(), prefix);
  if (!id) {
    throw Error(ErrorKind::Schema, std::string(what) + ": bad id '" + v.get<std::string>() + "', expected " +
                                       prefix + "{number}");
  }
  return *id;
}

const json& array_field(const json& obj, const char* key, const char* what) {
  const auto& v = field(obj, key, what);
  if (!v.is_array()) throw Error(ErrorKind::Schema, std::string(what) + ": \"" + key + "\" must be an array");
  return v;
}

void only_keys(const json& obj, std::initializer_list<const char*> keys, const char* what) {
  for (const auto& [k, v] : obj.items()) {
    if (std::none_of(keys.begin(), keys.end(), [&](const char* allowed) { return k == allowed; })) {
      throw Error(ErrorKind::Schema, std::string(what) + ": unexpected key \"" + k + "\"");
    }
  }
}

bool is_en_label(const std::string& s) {
  if (s.size() < 3 || s.size() > 8 || s.compare(0, 2, "EN") != 0 || s[2] == '0') return false;
  return std::all_of(s.begin() + 2, s.end(), [](char c) { return c >= '0' && c <= '9'; });
}

}  // namespace

ExtractionResult parse_extraction(std::string_view text, const KnowledgeGraph* kg) {
  static constexpr const char* what = "extraction";
  auto j = load(text, json::value_t::object, what);
  only_keys(j, {"new_nodes", "new_edges", "evidences_map"}, what);

  ExtractionResult r;
  std::set<NodeId> new_node_ids;
  for (const auto& jn : array_field(j, "new_nodes", what)) {
    if (!jn.is_object()) throw Error(ErrorKind::Schema, "extraction: node entries must be objects");
    only_keys(jn, {"id", "node_name", "is_core_entity"}, what);
    ExtractionResult::Node n{id_field(field(jn, "id", what), 'n', what), text_field(jn, "node_name", what), false};
    const auto& core = field(jn, "is_core_entity", what);
    if (!core.is_boolean()) throw Error(ErrorKind::Schema, "extraction: \"is_core_entity\" must be true or false");
    n.is_core_entity = core.get<bool>();
    if (!new_node_ids.insert(n.id).second) {
      throw Error(ErrorKind::Schema, "extraction: duplicate new node id " + render_node_id(n.id));
    }
    r.new_nodes.push_back(std::move(n));
  }

  std::set<EdgeId> new_edge_ids;
  auto node_known = [&](NodeId id) { return new_node_ids.count(id) || (kg && kg->resolve_node(id)); };
  for (const auto& je : array_field(j, "new_edges", what)) {
    if (!je.is_object()) throw Error(ErrorKind::Schema, "extraction: edge entries must be objects");
    only_keys(je, {"id", "source_id", "target_id", "relation_name"}, what);
    ExtractionResult::Edge e{id_field(field(je, "id", what), 'e', what), id_field(field(je, "source_id", what), 'n', what),
                             id_field(field(je, "target_id", what), 'n', what), text_field(je, "relation_name", what)};
    if (!new_edge_ids.insert(e.id).second) {
      throw Error(ErrorKind::Schema, "extraction: duplicate new edge id " + render_edge_id(e.id));
    }
    if (kg) {
      for (auto end : {e.source, e.target}) {
        if (!node_known(end)) {
          throw Error(ErrorKind::Validation, "extraction: dangling node reference " + render_node_id(end) +
                                                 " in edge " + render_edge_id(e.id));
        }
      }
    }
    r.new_edges.push_back(std::move(e));
  }

  const auto& map = field(j, "evidences_map", what);
  if (!map.is_object()) throw Error(ErrorKind::Schema, "extraction: \"evidences_map\" must be an object");
  for (const auto& [label, edges] : map.items()) {
    if (!is_en_label(label)) throw Error(ErrorKind::Schema, "extraction: bad evidence label '" + label + "'");
    if (!edges.is_array()) throw Error(ErrorKind::Schema, "extraction: evidences_map values must be arrays");
    std::vector<EdgeId> ids;
    for (const auto& v : edges) {
      auto id = id_field(v, 'e', what);
      if (!new_edge_ids.count(id) && !(kg && kg->resolve_edge(id))) {
        throw Error(ErrorKind::Validation, "extraction: " + label + " references dangling edge " + render_edge_id(id));
      }
      if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    r.evidences_map[label] = std::move(ids);
  }
  return r;
}

std::string render_extraction(const ExtractionResult& result) {
  json nodes = json::array(), edges = json::array(), map = json::object();
  for (const auto& n : result.new_nodes) {
    nodes.push_back({{"id", render_node_id(n.id)}, {"node_name", n.name}, {"is_core_entity", n.is_core_entity}});
  }
  for (const auto& e : result.new_edges) {
    edges.push_back({{"id", render_edge_id(e.id)},
                     {"source_id", render_node_id(e.source)},
                     {"target_id", render_node_id(e.target)},
                     {"relation_name", e.relation}});
  }
  for (const auto& [label, ids] : result.evidences_map) {
    json arr = json::array();
    for (auto id : ids) arr.push_back(render_edge_id(id));
    map[label] = std::move(arr);
  }
  return json{{"new_nodes", nodes}, {"new_edges", edges}, {"evidences_map", map}}.dump();
}

std::vector<MergeCluster> parse_merge(std::string_view text) {
  static constexpr const char* what = "merge";
  auto j = load(text, json::value_t::object, what);
  only_keys(j, {"clusters"}, what);
  std::vector<MergeCluster> out;
  std::set<std::int64_t> cluster_ids;
  for (const auto& jc : array_field(j, "clusters", what)) {
    if (!jc.is_object()) throw Error(ErrorKind::Schema, "merge: cluster entries must be objects");
    only_keys(jc, {"cluster_id", "representative_concept", "source_node_ids", "similarity_justification"}, what);
    auto cid = id_field(field(jc, "cluster_id", what), 'c', what);
    if (!cluster_ids.insert(cid).second) throw Error(ErrorKind::Schema, "merge: duplicate cluster id c" + std::to_string(cid));
    if (jc.contains("similarity_justification") && !jc["similarity_justification"].is_string()) {
      throw Error(ErrorKind::Schema, "merge: \"similarity_justification\" must be a string");
    }
    MergeCluster c;
    c.representative_concept = text_field(jc, "representative_concept", what);
    for (const auto& v : array_field(jc, "source_node_ids", what)) {
      auto id = id_field(v, 'n', what);
      if (std::find(c.source_node_ids.begin(), c.source_node_ids.end(), id) != c.source_node_ids.end()) {
        throw Error(ErrorKind::Schema, "merge: node " + render_node_id(id) + " listed twice in one cluster");
      }
      c.source_node_ids.push_back(id);
    }
    if (c.source_node_ids.size() < 2) throw Error(ErrorKind::Schema, "merge: clusters need at least 2 nodes");
    if (c.source_node_ids.size() > 5) throw Error(ErrorKind::Schema, "merge: clusters hold at most 5 nodes");
    out.push_back(std::move(c));
  }
  return out;
}

std::string render_merge(const std::vector<MergeCluster>& clusters) {
  json arr = json::array();
  for (std::size_t i = 0; i < clusters.size(); ++i) {
    json ids = json::array();
    for (auto id : clusters[i].source_node_ids) ids.push_back(render_node_id(id));
    arr.push_back({{"cluster_id", "c" + std::to_string(i + 1)},
                   {"representative_concept", clusters[i].representative_concept},
                   {"source_node_ids", ids},
                   {"similarity_justification", "equivalent concepts"}});
  }
  return json{{"clusters", arr}}.dump();
}

ChainSelection parse_chain_selection(std::string_view text, int chain_num) {
  static constexpr const char* what = "chain selection";
  auto j = load(text, json::value_t::object, what);
  only_keys(j, {"chains", "search queries"}, what);
  ChainSelection s;
  for (const auto& v : array_field(j, "chains", what)) {
    if (!v.is_string()) throw Error(ErrorKind::Schema, "chain selection: chain ids must be strings");
    auto id = v.get<std::string>();
    if (id.rfind("chain_", 0) != 0 || !parse_prefixed_id("c" + id.substr(6), 'c')) {
      throw Error(ErrorKind::Schema, "chain selection: bad chain id '" + id + "'");
    }
    if (std::find(s.chains.begin(), s.chains.end(), id) != s.chains.end()) {
      throw Error(ErrorKind::Schema, "chain selection: chain '" + id + "' selected twice");
    }
    s.chains.push_back(id);
  }
  for (const auto& v : array_field(j, "search queries", what)) {
    if (!v.is_string() || trim(v.get<std::string>()).empty()) {
      throw Error(ErrorKind::Schema, "chain selection: search queries must be non-empty strings");
    }
    s.search_queries.push_back(trim(v.get<std::string>()));
  }
  if (static_cast<int>(s.chains.size()) > chain_num) {
    throw Error(ErrorKind::Budget, "chain selection: " + std::to_string(s.chains.size()) + " chains exceed the cap of " +
                                       std::to_string(chain_num));
  }
  if (static_cast<int>(s.search_queries.size()) > chain_num) {
    throw Error(ErrorKind::Budget, "chain selection: " + std::to_string(s.search_queries.size()) +
                                       " queries exceed the cap of " + std::to_string(chain_num));
  }
  if (s.search_queries.size() < s.chains.size()) {
    throw Error(ErrorKind::Schema, "chain selection: every selected chain needs an aligned query");
  }
  return s;
}

std::string render_chain_selection(const ChainSelection& selection) {
  return json{{"chains", selection.chains}, {"search queries", selection.search_queries}}.dump();
}

QueryLines parse_query_lines(std::string_view text, int budget) {
  QueryLines out;
  for (auto line : split_lines(text)) {
    line = trim(line);
    if (line.empty()) continue;
    if (line.rfind("```", 0) == 0) {
      ++out.violations;
      continue;
    }
    bool marked = false;
    std::size_t p = 0;
    while (p < line.size() && std::isdigit(static_cast<unsigned char>(line[p]))) ++p;
    if (p > 0 && p < line.size() && (line[p] == '.' || line[p] == ')') && p + 1 < line.size() && line[p + 1] == ' ') {
      line = trim(line.substr(p + 1));
      marked = true;
    } else if (line.size() > 1 && (line[0] == '-' || line[0] == '*') && line[1] == ' ') {
      line = trim(line.substr(1));
      marked = true;
    } else if (line.rfind("\xE2\x80\xA2", 0) == 0) {
      line = trim(line.substr(3));
      marked = true;
    }
    if (line.size() >= 2 && line.front() == '"' && line.back() == '"') {
      line = trim(line.substr(1, line.size() - 2));
      marked = true;
    }
    if (marked) ++out.violations;
    if (line.empty()) continue;
    if (static_cast<int>(out.queries.size()) >= budget) {
      ++out.violations;
      continue;
    }
    out.queries.push_back(line);
  }
  return out;
}

std::vector<int> parse_url_filter(std::string_view text, int candidates) {
  auto j = load(text, json::value_t::array, "url filter");
  std::set<int> picked;
  for (const auto& v : j) {
    if (!v.is_number_integer()) throw Error(ErrorKind::Schema, "url filter: indices must be integers");
    auto i = v.get<long long>();
    if (i < 0 || i >= candidates) {
      throw Error(ErrorKind::Validation, "url filter: index " + std::to_string(i) + " is out of range");
    }
    picked.insert(static_cast<int>(i));
  }
  return {picked.begin(), picked.end()};
}

EvidenceExtraction parse_evidence_extraction(std::string_view text) {
  static constexpr const char* what = "evidence extraction";
  auto j = load(text, json::value_t::object, what);
  only_keys(j, {"useful", "summary", "content"}, what);
  EvidenceExtraction e;
  const auto& useful = field(j, "useful", what);
  if (!useful.is_boolean()) throw Error(ErrorKind::Schema, "evidence extraction: \"useful\" must be true or false");
  e.useful = useful.get<bool>();
  e.summary = text_field(j, "summary", what, !e.useful);
  e.content = text_field(j, "content", what, true);
  return e;
}

std::map<std::string, double> parse_early_stop(std::string_view text) {
  static constexpr const char* what = "early stop";
  auto j = load(text, json::value_t::object, what);
  std::map<std::string, double> scores;
  for (const auto& dim : early_stop_dimensions()) {
    const auto& v = field(j, dim.c_str(), what);
    if (!v.is_number()) throw Error(ErrorKind::Schema, "early stop: \"" + dim + "\" must be a number");
    double x = v.get<double>();
    if (!(x >= 0.0 && x <= 100.0)) throw Error(ErrorKind::Schema, "early stop: \"" + dim + "\" must be within 0..100");
    scores[dim] = x;
  }
  if (j.size() != early_stop_dimensions().size()) throw Error(ErrorKind::Schema, "early stop: unexpected extra keys");
  return scores;
}

}  // namespace dualgraph
