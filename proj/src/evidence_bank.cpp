#include "dualgraph/evidence_bank.hpp"

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"
#include "json_io.hpp"

namespace dualgraph {

std::string render_evidence_token(EvidenceId id) { return "id_" + std::to_string(id); }

std::optional<EvidenceId> EvidenceBank::add(const std::string& url, const std::string& title,
                                            const std::string& query, const std::string& summary,
                                            const std::string& content, int iteration) {
  if (trim(url).empty()) throw Error(ErrorKind::Input, "evidence url must be non-empty");
  if (trim(query).empty()) throw Error(ErrorKind::Input, "evidence query must be non-empty");
  if (iteration < 0) throw Error(ErrorKind::Input, "evidence iteration must be non-negative");

  auto key = normalize_url(url);
  if (!seen_urls_.insert(key).second) return std::nullopt;

  EvidenceUnit unit;
  unit.id = size() + 1;
  unit.url = url;
  unit.title = title;
  unit.query = query;
  unit.summary = summary;
  unit.content = content;
  unit.iteration = iteration;
  units_.push_back(std::move(unit));
  return units_.back().id;
}

const EvidenceUnit& EvidenceBank::get(EvidenceId id) const {
  if (!contains(id)) throw Error(ErrorKind::NotFound, "unknown evidence " + render_evidence_token(id));
  return units_[static_cast<std::size_t>(id - 1)];
}

bool EvidenceBank::seen(const std::string& url) const {
  return seen_urls_.count(normalize_url(url)) > 0;
}

std::vector<EvidenceUnit> EvidenceBank::since(EvidenceId after) const {
  std::vector<EvidenceUnit> out;
  for (const auto& u : units_) {
    if (u.id > after) out.push_back(u);
  }
  return out;
}

namespace detail {

json bank_to_json(const EvidenceBank& bank) {
  json units = json::array();
  std::set<std::string> urls;
  for (const auto& u : bank.units()) {
    units.push_back({{"id", u.id},
                     {"url", u.url},
                     {"title", u.title},
                     {"query", u.query},
                     {"summary", u.summary},
                     {"content", u.content},
                     {"iteration", u.iteration}});
    urls.insert(normalize_url(u.url));
  }
  return {{"units", units}, {"seen_urls", urls}};
}

EvidenceBank bank_from_json(const json& j) {
  if (!j.is_object() || !j.contains("units") || !j["units"].is_array()) {
    throw Error(ErrorKind::Schema, "evidence bank document needs a \"units\" array");
  }
  EvidenceBank bank;
  for (const auto& u : j["units"]) {
    try {
      auto id = bank.add(u.at("url").get<std::string>(), u.value("title", ""),
                         u.at("query").get<std::string>(), u.value("summary", ""),
                         u.value("content", ""), u.value("iteration", 0));
      if (!id || *id != u.at("id").get<EvidenceId>()) {
        throw Error(ErrorKind::Consistency, "evidence bank replay diverged at url " +
                                                u.at("url").get<std::string>());
      }
    } catch (const json::exception& e) {
      throw Error(ErrorKind::Schema, std::string("evidence unit: ") + e.what());
    }
  }
  return bank;
}

}  // namespace detail

std::string serialize_bank(const EvidenceBank& bank) { return detail::bank_to_json(bank).dump(2); }

EvidenceBank deserialize_bank(std::string_view text) {
  auto j = detail::parse_json_lenient(text);
  if (j.is_discarded()) throw Error(ErrorKind::Parse, "evidence bank is not valid JSON");
  return detail::bank_from_json(j);
}

}  // namespace dualgraph
