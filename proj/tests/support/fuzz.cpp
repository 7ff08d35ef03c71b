#include "fuzz.hpp"

#include <exception>
#include <random>

#include "dualgraph/errors.hpp"
#include "json.hpp"

namespace testsupport {

using nlohmann::json;

std::vector<std::string> extraction_seeds() {
  return {
      R"({"new_nodes": [{"id": "n1", "node_name": "Duan Yongping", "is_core_entity": true},
                        {"id": "n2", "node_name": "opportunity cost", "is_core_entity": false}],
          "new_edges": [{"id": "e1", "source_id": "n1", "target_id": "n2", "relation_name": "emphasizes"}],
          "evidences_map": {"EN1": ["e1"]}})",
      R"({"new_nodes": [], "new_edges": [], "evidences_map": {}})",
      "```json\n{\"new_nodes\": [{\"id\": \"n3\", \"node_name\": \"margin of safety\", \"is_core_entity\": false}], "
      "\"new_edges\": [{\"id\": \"e2\", \"source_id\": \"n1\", \"target_id\": \"n3\", \"relation_name\": \"requires\"},"
      " {\"id\": \"e3\", \"source_id\": \"n3\", \"target_id\": \"n2\", \"relation_name\": \"limits\"}], "
      "\"evidences_map\": {\"EN1\": [\"e2\"], \"EN2\": [\"e2\", \"e3\"]}}\n```",
  };
}

std::vector<std::string> merge_seeds() {
  return {
      R"({"clusters": [{"cluster_id": "c1", "representative_concept": "Virtue Ethics",
          "source_node_ids": ["n4", "n5"], "similarity_justification": "same concept"}]})",
      R"({"clusters": []})",
      R"({"clusters": [{"cluster_id": "c1", "representative_concept": "A", "source_node_ids": ["n1", "n2", "n3"]},
                       {"cluster_id": "c2", "representative_concept": "B", "source_node_ids": ["n7", "n9"]}]})",
  };
}

std::vector<std::string> chain_selection_seeds() {
  return {
      R"({"chains": ["chain_1", "chain_5"], "search queries": ["Duan Yongping opportunity cost", "value investing"]})",
      R"({"chains": [], "search queries": []})",
      R"({"chains": ["chain_2"], "search queries": ["q one", "q two", "q three"]})",
  };
}

namespace {

json random_scalar(std::mt19937_64& rng) {
  switch (std::uniform_int_distribution<int>(0, 7)(rng)) {
    case 0: return nullptr;
    case 1: return true;
    case 2: return -1;
    case 3: return 1e308;
    case 4: return "";
    case 5: return "n0";
    case 6: return json::array();
    default: return json::object();
  }
}

void mutate_json(json& j, std::mt19937_64& rng, int depth = 0) {
  std::uniform_int_distribution<int> coin(0, 5);
  if (j.is_object() && !j.empty()) {
    auto it = j.begin();
    std::advance(it, std::uniform_int_distribution<std::size_t>(0, j.size() - 1)(rng));
    switch (coin(rng)) {
      case 0: j.erase(it.key()); return;
      case 1: *it = random_scalar(rng); return;
      case 2: j["extra_" + std::to_string(depth)] = random_scalar(rng); return;
      default: mutate_json(*it, rng, depth + 1); return;
    }
  }
  if (j.is_array() && !j.empty()) {
    const auto k = std::uniform_int_distribution<std::size_t>(0, j.size() - 1)(rng);
    switch (coin(rng)) {
      case 0: j.erase(j.begin() + static_cast<std::ptrdiff_t>(k)); return;
      case 1: j.push_back(j[k]); return;
      case 2: j[k] = random_scalar(rng); return;
      case 3: {
        json nest = j[k];
        for (int d = 0; d < 200; ++d) nest = json::array({nest});
        j[k] = nest;
        return;
      }
      default: mutate_json(j[k], rng, depth + 1); return;
    }
  }
  if (j.is_string()) {
    auto s = j.get<std::string>();
    switch (coin(rng)) {
      case 0: j = s + "9999999999999999999999"; return;
      case 1: j = s.empty() ? "x" : s.substr(0, s.size() / 2); return;
      case 2: j = "n-1"; return;
      case 3: j = "e" + std::to_string(std::uniform_int_distribution<int>(0, 50)(rng)); return;
      default: j = random_scalar(rng); return;
    }
  }
  j = random_scalar(rng);
}

std::string mutate_bytes(std::string s, std::mt19937_64& rng) {
  const int edits = std::uniform_int_distribution<int>(1, 6)(rng);
  static const std::string specials = "{}[]\":,\\\n\t` \x01\xff\xc3";
  for (int e = 0; e < edits; ++e) {
    const std::size_t pos = s.empty() ? 0 : std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng);
    switch (std::uniform_int_distribution<int>(0, 4)(rng)) {
      case 0:
        if (!s.empty()) s[pos] = specials[std::uniform_int_distribution<std::size_t>(0, specials.size() - 1)(rng)];
        break;
      case 1:
        if (!s.empty()) s.erase(pos, std::uniform_int_distribution<std::size_t>(1, 8)(rng));
        break;
      case 2: s.insert(pos, 1, specials[std::uniform_int_distribution<std::size_t>(0, specials.size() - 1)(rng)]); break;
      case 3: s = s.substr(0, pos); break;
      default: {
        const std::size_t from = s.empty() ? 0 : std::uniform_int_distribution<std::size_t>(0, s.size() - 1)(rng);
        s.insert(pos, s.substr(from, 16));
        break;
      }
    }
  }
  return s;
}

}  // namespace

std::vector<std::string> mutate_documents(const std::vector<std::string>& seeds, std::size_t count, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::vector<std::string> out;
  out.reserve(count);
  while (out.size() < count) {
    const auto& base = seeds[std::uniform_int_distribution<std::size_t>(0, seeds.size() - 1)(rng)];
    if (std::uniform_int_distribution<int>(0, 1)(rng) == 0) {
      out.push_back(mutate_bytes(base, rng));
      continue;
    }
    std::string body = base;
    if (body.rfind("```", 0) == 0) body = body.substr(body.find('\n') + 1, body.rfind("```") - body.find('\n') - 1);
    json j = json::parse(body);
    const int rounds = std::uniform_int_distribution<int>(1, 3)(rng);
    for (int r = 0; r < rounds; ++r) mutate_json(j, rng);
    std::string text = j.dump();
    if (std::uniform_int_distribution<int>(0, 3)(rng) == 0) text = "```json\n" + text + "\n```";
    out.push_back(std::move(text));
  }
  return out;
}

FuzzOutcome run_fuzz(const std::vector<std::string>& docs, const std::function<void(const std::string&)>& parse) {
  FuzzOutcome o;
  for (const auto& d : docs) {
    try {
      parse(d);
      ++o.values;
    } catch (const dualgraph::Error&) {
      ++o.typed_errors;
    } catch (const std::exception& e) {
      o.failures.push_back(std::string(e.what()) + " <- " + d.substr(0, 80));
    } catch (...) {
      o.failures.push_back("non-standard exception <- " + d.substr(0, 80));
    }
  }
  return o;
}

}  // namespace testsupport
