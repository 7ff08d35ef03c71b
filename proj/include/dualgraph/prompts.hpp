#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "dualgraph/providers.hpp"

namespace dualgraph {

struct PromptTemplate {
  std::string name;
  std::string system;
  std::string user;
};

/// Literal single-pass "${NAME}" substitution. Throws Error{Render} naming the
/// first placeholder that has no value.
std::string render_template(std::string_view body, const std::map<std::string, std::string>& vars);

ChatRequest render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& vars);

/// Prompt templates by name. The built-in set is compiled from prompts/*.txt;
/// a directory may override any of `<name>.system.txt` / `<name>.user.txt`.
class PromptLibrary {
 public:
  static PromptLibrary builtin();
  static PromptLibrary with_overrides(const std::filesystem::path& dir);

  /// Throws Error{NotFound}.
  const PromptTemplate& get(const std::string& name) const;
  std::vector<std::string> names() const;

 private:
  std::map<std::string, PromptTemplate> templates_;
};

}  // namespace dualgraph
