#pragma once

#include <string>
#include <utility>
#include <vector>

namespace dualgraph::detail {

/// ("<name>.system" | "<name>.user", text) for every file under prompts/.
const std::vector<std::pair<std::string, std::string>>& embedded_prompts();

}  // namespace dualgraph::detail
