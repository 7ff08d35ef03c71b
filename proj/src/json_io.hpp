#pragma once

// JSON conversions shared between translation units. Not part of the public
// headers so that nlohmann/json stays out of downstream includes.

#include "json.hpp"

#include "dualgraph/evidence_bank.hpp"
#include "dualgraph/gap_discovery.hpp"
#include "dualgraph/knowledge_graph.hpp"

namespace dualgraph::detail {

using nlohmann::json;

json bank_to_json(const EvidenceBank& bank);
EvidenceBank bank_from_json(const json& j);

json kg_to_json(const KnowledgeGraph& kg);
KnowledgeGraph kg_from_json(const json& j);

json chains_to_json(const std::vector<SearchChain>& chains);

/// Parse with exceptions disabled; returns a discarded value on failure.
json parse_json_lenient(std::string_view text);

}  // namespace dualgraph::detail
