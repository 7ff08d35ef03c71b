#include "dualgraph/prompts.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "prompt_data.hpp"

namespace dualgraph {

std::string render_template(std::string_view body, const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(body.size());
  std::size_t i = 0;
  while (i < body.size()) {
    if (body[i] == '$' && i + 1 < body.size() && body[i + 1] == '{') {
      std::size_t end = i + 2;
      while (end < body.size() && (std::isalnum(static_cast<unsigned char>(body[end])) || body[end] == '_')) ++end;
      if (end < body.size() && body[end] == '}' && end > i + 2) {
        std::string name(body.substr(i + 2, end - i - 2));
        auto it = vars.find(name);
        if (it == vars.end()) throw Error(ErrorKind::Render, "unresolved placeholder ${" + name + "}");
        out += it->second;
        i = end + 1;
        continue;
      }
    }
    out.push_back(body[i++]);
  }
  return out;
}

ChatRequest render_prompt(const PromptTemplate& t, const std::map<std::string, std::string>& vars) {
  return {t.name, render_template(t.system, vars), render_template(t.user, vars)};
}

PromptLibrary PromptLibrary::builtin() {
  PromptLibrary lib;
  for (const auto& [key, text] : detail::embedded_prompts()) {
    auto dot = key.find('.');
    auto& t = lib.templates_[key.substr(0, dot)];
    t.name = key.substr(0, dot);
    (key.substr(dot + 1) == "system" ? t.system : t.user) = text;
  }
  return lib;
}

PromptLibrary PromptLibrary::with_overrides(const std::filesystem::path& dir) {
  if (!std::filesystem::is_directory(dir)) {
    throw Error(ErrorKind::Input, "prompt directory " + dir.string() + " does not exist");
  }
  auto lib = builtin();
  for (auto& [name, t] : lib.templates_) {
    for (auto [suffix, field] : {std::pair{".system.txt", &t.system}, std::pair{".user.txt", &t.user}}) {
      std::ifstream in(dir / (name + suffix), std::ios::binary);
      if (!in) continue;
      std::ostringstream ss;
      ss << in.rdbuf();
      *field = ss.str();
    }
  }
  return lib;
}

const PromptTemplate& PromptLibrary::get(const std::string& name) const {
  auto it = templates_.find(name);
  if (it == templates_.end()) throw Error(ErrorKind::NotFound, "no prompt template named '" + name + "'");
  return it->second;
}

std::vector<std::string> PromptLibrary::names() const {
  std::vector<std::string> out;
  for (const auto& [name, t] : templates_) out.push_back(name);
  return out;
}

}  // namespace dualgraph
