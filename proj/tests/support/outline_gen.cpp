#include "outline_gen.hpp"

#include <algorithm>
#include <functional>
#include <string>
#include <vector>

namespace testsupport {

using dualgraph::EvidenceId;
using dualgraph::OutlineGraph;
using dualgraph::OutlineNode;

namespace {

const std::vector<std::string>& words() {
  static const std::vector<std::string> w{"value",  "risk",     "margin",   "safety",  "moat",    "cash",
                                          "growth", "patience", "discipline", "market", "culture", "pricing",
                                          "leverage", "ethics", "compounding", "management", "cycle", "capital"};
  return w;
}

std::string random_title(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> pick(0, words().size() - 1);
  const int n = std::uniform_int_distribution<int>(1, 3)(rng);
  std::string t;
  for (int i = 0; i < n; ++i) {
    std::string w = words()[pick(rng)];
    if (i == 0) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    t += (i ? " " : "") + w;
  }
  return t;
}

std::set<EvidenceId> random_cites(std::mt19937_64& rng, EvidenceId max_id, double p) {
  std::set<EvidenceId> s;
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  if (max_id < 1 || unit(rng) >= p) return s;
  const int n = std::uniform_int_distribution<int>(1, 3)(rng);
  for (int i = 0; i < n; ++i) s.insert(std::uniform_int_distribution<EvidenceId>(1, max_id)(rng));
  return s;
}

OutlineNode make_heading(std::mt19937_64& rng, std::vector<int> path, EvidenceId max_id, double p) {
  OutlineNode h;
  h.path = path;
  h.title = random_title(rng);
  h.citations = random_cites(rng, max_id, p);
  const int letters = std::uniform_int_distribution<int>(0, 2)(rng);
  for (int i = 0; i < letters; ++i) {
    OutlineNode pt;
    pt.letter = static_cast<char>('a' + i);
    pt.title = random_title(rng);
    pt.citations = random_cites(rng, max_id, p);
    h.children.push_back(std::move(pt));
  }
  if (path.size() < 3) {
    const int subs = std::uniform_int_distribution<int>(0, path.size() == 1 ? 3 : 2)(rng);
    for (int i = 1; i <= subs; ++i) {
      auto child = path;
      child.push_back(i);
      h.children.push_back(make_heading(rng, child, max_id, p));
    }
  }
  return h;
}

void walk(const OutlineNode& n, std::set<EvidenceId>& out) {
  out.insert(n.citations.begin(), n.citations.end());
  for (const auto& c : n.children) walk(c, out);
}

void clear(OutlineNode& n) {
  n.citations.clear();
  for (auto& c : n.children) clear(c);
}

// Text-level editing: each node is kept, retitled, or dropped with its subtree;
// numbering is reassigned so the result always parses.
void emit(std::mt19937_64& rng, const OutlineNode& n, const std::string& label, bool heading, EvidenceId max_id,
          std::string& out) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string title = unit(rng) < 0.2 ? random_title(rng) : n.title;
  std::set<EvidenceId> cites;
  for (auto id : n.citations) {
    if (unit(rng) < 0.6) cites.insert(id);
  }
  if (unit(rng) < 0.15 && max_id >= 1) cites.insert(std::uniform_int_distribution<EvidenceId>(1, max_id)(rng));
  out += "\n" + label + (heading && label.find('.') == std::string::npos ? "." : "") + (heading ? "" : ".") + " " +
         title;
  if (!cites.empty()) {
    out += " <citation>";
    bool first = true;
    for (auto id : cites) {
      out += (first ? "" : ", ") + dualgraph::render_evidence_token(id);
      first = false;
    }
    out += "</citation>";
  }
  char letter = 'a';
  int sub = 0;
  for (const auto& c : n.children) {
    if (unit(rng) < 0.15) continue;
    if (c.is_heading()) {
      emit(rng, c, label + "." + std::to_string(++sub), true, max_id, out);
    } else {
      emit(rng, c, std::string(1, letter++), false, max_id, out);
    }
  }
}

}  // namespace

OutlineGraph random_outline(std::mt19937_64& rng, int max_roots, EvidenceId max_id, double cite_probability) {
  OutlineGraph og;
  og.title = random_title(rng) + " Report";
  const int roots = std::uniform_int_distribution<int>(0, max_roots)(rng);
  for (int i = 1; i <= roots; ++i) og.roots.push_back(make_heading(rng, {i}, max_id, cite_probability));
  return og;
}

std::string random_revision(std::mt19937_64& rng, const OutlineGraph& og, EvidenceId max_id) {
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::string out = unit(rng) < 0.1 ? og.title + " (revised)" : og.title;
  int root = 0;
  for (const auto& r : og.roots) {
    if (unit(rng) < 0.15) continue;
    emit(rng, r, std::to_string(++root), true, max_id, out);
  }
  const int added = std::max(std::uniform_int_distribution<int>(0, 2)(rng), root == 0 ? 1 : 0);
  for (int i = 0; i < added; ++i) {
    OutlineNode fresh;
    fresh.path = {root + 1};
    fresh.title = random_title(rng);
    emit(rng, fresh, std::to_string(++root), true, max_id, out);
  }
  return out;
}

std::set<EvidenceId> naive_citations(const OutlineGraph& og) {
  std::set<EvidenceId> out;
  for (const auto& r : og.roots) walk(r, out);
  return out;
}

OutlineGraph strip_citations(OutlineGraph og) {
  for (auto& r : og.roots) clear(r);
  return og;
}

}  // namespace testsupport
