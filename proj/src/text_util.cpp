#include "dualgraph/text_util.hpp"

#include <cctype>
#include <cmath>

#include "dualgraph/errors.hpp"

namespace dualgraph {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::Input: return "input";
    case ErrorKind::NotFound: return "not-found";
    case ErrorKind::Parse: return "parse";
    case ErrorKind::Schema: return "schema";
    case ErrorKind::Validation: return "validation";
    case ErrorKind::Protection: return "protection";
    case ErrorKind::Budget: return "budget";
    case ErrorKind::Domain: return "domain";
    case ErrorKind::Render: return "render";
    case ErrorKind::Precondition: return "precondition";
    case ErrorKind::Provider: return "provider";
    case ErrorKind::ScriptExhausted: return "script-exhausted";
    case ErrorKind::UnmatchedPrompt: return "unmatched-prompt";
    case ErrorKind::Consistency: return "consistency";
  }
  return "unknown";
}

namespace {

bool is_space(char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; }

}  // namespace

std::string trim(std::string_view s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && is_space(s[b])) ++b;
  while (e > b && is_space(s[e - 1])) --e;
  return std::string(s.substr(b, e - b));
}

std::string to_lower_ascii(std::string_view s) {
  std::string out(s);
  for (auto& c : out) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return out;
}

std::vector<std::string> split_lines(std::string_view text) {
  std::vector<std::string> lines;
  std::size_t start = 0;
  while (start <= text.size()) {
    auto nl = text.find('\n', start);
    if (nl == std::string_view::npos) nl = text.size();
    std::string line(text.substr(start, nl - start));
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
    start = nl + 1;
  }
  return lines;
}

std::string normalize_url(std::string_view raw) {
  std::string url = trim(raw);
  if (auto hash = url.find('#'); hash != std::string::npos) url.erase(hash);

  std::size_t host_begin = 0;
  if (auto scheme = url.find("://"); scheme != std::string::npos) host_begin = scheme + 3;
  std::size_t host_end = url.find_first_of("/?", host_begin);
  if (host_end == std::string::npos) host_end = url.size();
  for (std::size_t i = 0; i < host_end; ++i) {
    url[i] = static_cast<char>(std::tolower(static_cast<unsigned char>(url[i])));
  }

  std::size_t query = url.find('?', host_end);
  std::string path = url.substr(0, query == std::string::npos ? url.size() : query);
  std::string tail = query == std::string::npos ? std::string() : url.substr(query);
  while (path.size() > host_end && !path.empty() && path.back() == '/') path.pop_back();
  return path + tail;
}

std::string normalize_query(std::string_view query) {
  std::string out;
  bool pending_space = false;
  for (char c : query) {
    if (is_space(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out.push_back(' ');
    pending_space = false;
    out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  while (!out.empty() && (std::ispunct(static_cast<unsigned char>(out.back())) || out.back() == ' ')) {
    out.pop_back();
  }
  return out;
}

std::vector<std::string> word_tokens(std::string_view text) {
  std::vector<std::string> tokens;
  std::string cur;
  for (char c : text) {
    auto uc = static_cast<unsigned char>(c);
    if (std::isalnum(uc) || uc >= 0x80) {
      cur.push_back(static_cast<char>(std::tolower(uc)));
    } else if (!cur.empty()) {
      tokens.push_back(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.push_back(std::move(cur));
  return tokens;
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size() || a.empty()) return 0.0;
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / (std::sqrt(na) * std::sqrt(nb));
}

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

std::uint64_t hash_string(std::string_view s, std::uint64_t seed) {
  // FNV-1a folded through splitmix for avalanche.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ seed;
  for (char c : s) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

std::string strip_code_fence(std::string_view text) {
  std::string body = trim(text);
  if (body.rfind("```", 0) != 0) return body;
  auto first_nl = body.find('\n');
  if (first_nl == std::string::npos) return body;
  if (body.size() < 6 || body.compare(body.size() - 3, 3, "```") != 0) return body;
  std::string inner = body.substr(first_nl + 1, body.size() - 3 - (first_nl + 1));
  return trim(inner);
}

}  // namespace dualgraph
