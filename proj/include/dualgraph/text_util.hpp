#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace dualgraph {

std::string trim(std::string_view s);
std::string to_lower_ascii(std::string_view s);
std::vector<std::string> split_lines(std::string_view text);

/// Lowercase scheme and host, drop the fragment and a trailing path slash.
/// The query string is kept verbatim.
std::string normalize_url(std::string_view url);

/// Casefold, collapse whitespace, strip trailing punctuation.
std::string normalize_query(std::string_view query);

/// Lowercase alphanumeric word tokens.
std::vector<std::string> word_tokens(std::string_view text);

double cosine_similarity(std::span<const double> a, std::span<const double> b);

std::uint64_t splitmix64(std::uint64_t& state);
std::uint64_t hash_string(std::string_view s, std::uint64_t seed = 0);

/// Strip one surrounding ``` fence (with optional language tag) and whitespace.
std::string strip_code_fence(std::string_view text);

}  // namespace dualgraph
