#include "dualgraph/outline.hpp"

#include <cctype>
#include <map>
#include <sstream>

#include "dualgraph/errors.hpp"
#include "dualgraph/text_util.hpp"

namespace dualgraph {

std::string OutlineNode::label() const {
  if (!is_heading()) return std::string(1, letter);
  std::string out;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) out.push_back('.');
    out += std::to_string(path[i]);
  }
  return out;
}

namespace {

bool is_digit(char c) { return std::isdigit(static_cast<unsigned char>(c)) != 0; }

// Splits "<text> <citation>id_1, id_2</citation>" into text and id set.
std::string take_citations(std::string line, std::set<EvidenceId>& ids, int line_no) {
  static const std::string open = "<citation>";
  static const std::string close = "</citation>";
  auto start = line.rfind(open);
  if (start == std::string::npos) {
    if (line.find(close) != std::string::npos) {
      throw ParseError(ErrorKind::Parse, "closing </citation> without an opening tag", line_no);
    }
    return line;
  }
  auto end = line.find(close, start);
  if (end == std::string::npos) throw ParseError(ErrorKind::Parse, "unterminated <citation> marker", line_no);
  if (!trim(line.substr(end + close.size())).empty()) {
    throw ParseError(ErrorKind::Parse, "text after </citation> marker", line_no);
  }
  std::string body = line.substr(start + open.size(), end - start - open.size());
  std::stringstream ss(body);
  std::string token;
  while (std::getline(ss, token, ',')) {
    token = trim(token);
    if (token.empty()) continue;
    if (token.rfind("id_", 0) != 0 || token.size() == 3) {
      throw ParseError(ErrorKind::Parse, "bad citation token '" + token + "'", line_no);
    }
    EvidenceId id = 0;
    for (std::size_t i = 3; i < token.size(); ++i) {
      if (!is_digit(token[i]) || id > 1'000'000'000'000LL) {
        throw ParseError(ErrorKind::Parse, "bad citation token '" + token + "'", line_no);
      }
      id = id * 10 + (token[i] - '0');
    }
    if (id < 1) throw ParseError(ErrorKind::Parse, "citation ids start at id_1", line_no);
    ids.insert(id);
  }
  return trim(line.substr(0, start));
}

void render_node(const OutlineNode& node, bool with_citations, std::ostringstream& out) {
  out << '\n';
  if (node.is_heading()) {
    out << node.label();
    if (node.path.size() == 1) out << '.';
  } else {
    out << node.letter << '.';
  }
  out << ' ' << node.title;
  if (with_citations && !node.citations.empty()) {
    out << " <citation>";
    bool first = true;
    for (auto id : node.citations) {
      if (!first) out << ", ";
      out << render_evidence_token(id);
      first = false;
    }
    out << "</citation>";
  }
  for (const auto& child : node.children) render_node(child, with_citations, out);
}

void collect(const OutlineNode& node, int depth, std::vector<OutlineEntry>& out) {
  out.push_back({&node, depth});
  for (const auto& c : node.children) collect(c, depth + 1, out);
}

void collect_mut(OutlineNode& node, int depth, std::vector<std::pair<OutlineNode*, int>>& out) {
  out.emplace_back(&node, depth);
  for (auto& c : node.children) collect_mut(c, depth + 1, out);
}

int heading_children(const OutlineNode& node) {
  int n = 0;
  for (const auto& c : node.children) n += c.is_heading() ? 1 : 0;
  return n;
}

}  // namespace

OutlineGraph parse_outline(std::string_view text) {
  auto lines = split_lines(text);
  std::size_t i = 0;
  while (i < lines.size() && trim(lines[i]).empty()) ++i;
  if (i == lines.size()) throw ParseError(ErrorKind::Parse, "outline is empty; first line must be the title", 1);

  OutlineGraph og;
  og.title = trim(lines[i]);
  ++i;

  // stack[d] = most recent heading at depth d+1
  std::vector<OutlineNode*> stack;
  OutlineNode* last_heading = nullptr;

  for (; i < lines.size(); ++i) {
    const int line_no = static_cast<int>(i) + 1;
    std::string line = trim(lines[i]);
    if (line.empty()) continue;

    OutlineNode node;
    line = take_citations(line, node.citations, line_no);
    if (line.empty()) throw ParseError(ErrorKind::Parse, "line has citations but no text", line_no);

    if (std::islower(static_cast<unsigned char>(line[0])) && line.size() >= 2 && line[1] == '.') {
      if (last_heading == nullptr) {
        throw ParseError(ErrorKind::Parse, "content point '" + line.substr(0, 2) + "' has no preceding heading", line_no);
      }
      node.letter = line[0];
      node.title = trim(line.substr(2));
      if (node.title.empty()) throw ParseError(ErrorKind::Parse, "content point without text", line_no);
      last_heading->children.push_back(std::move(node));
      continue;
    }

    if (!is_digit(line[0])) throw ParseError(ErrorKind::Parse, "line is neither numbered nor lettered", line_no);

    std::size_t pos = 0;
    while (true) {
      std::size_t begin = pos;
      long value = 0;
      while (pos < line.size() && is_digit(line[pos])) {
        value = value * 10 + (line[pos] - '0');
        if (value > 100000) throw ParseError(ErrorKind::Parse, "section number out of range", line_no);
        ++pos;
      }
      if (pos == begin) break;
      node.path.push_back(static_cast<int>(value));
      if (pos + 1 < line.size() && line[pos] == '.' && is_digit(line[pos + 1])) {
        ++pos;
        continue;
      }
      break;
    }
    if (pos < line.size() && line[pos] == '.') ++pos;
    node.title = trim(line.substr(pos));

    const int depth = static_cast<int>(node.path.size());
    if (depth > kMaxHeadingDepth) {
      throw ParseError(ErrorKind::Parse, "heading '" + node.label() + "' is deeper than " +
                                             std::to_string(kMaxHeadingDepth) + " levels", line_no);
    }
    if (node.title.empty()) throw ParseError(ErrorKind::Parse, "heading '" + node.label() + "' has no title", line_no);

    int expected = 0;
    if (depth == 1) {
      expected = static_cast<int>(og.roots.size()) + 1;
    } else {
      if (static_cast<int>(stack.size()) < depth - 1) {
        throw ParseError(ErrorKind::Parse, "heading '" + node.label() + "' has no parent heading", line_no);
      }
      const OutlineNode* parent = stack[depth - 2];
      if (!std::equal(parent->path.begin(), parent->path.end(), node.path.begin())) {
        throw ParseError(ErrorKind::Parse, "heading '" + node.label() + "' does not extend '" +
                                               parent->label() + "'", line_no);
      }
      expected = heading_children(*parent) + 1;
    }
    if (node.path.back() != expected) {
      throw ParseError(ErrorKind::Parse, "numbering gap: expected " + std::to_string(expected) +
                                             " at '" + node.label() + "'", line_no);
    }

    OutlineNode* inserted = nullptr;
    if (depth == 1) {
      og.roots.push_back(std::move(node));
      inserted = &og.roots.back();
    } else {
      auto& siblings = stack[depth - 2]->children;
      siblings.push_back(std::move(node));
      inserted = &siblings.back();
    }
    stack.resize(depth - 1);
    stack.push_back(inserted);
    last_heading = inserted;
  }
  return og;
}

std::string render_outline(const OutlineGraph& og, bool with_citations) {
  std::ostringstream out;
  out << og.title;
  for (const auto& root : og.roots) render_node(root, with_citations, out);
  return out.str();
}

std::vector<OutlineEntry> flatten(const OutlineGraph& og) {
  std::vector<OutlineEntry> out;
  for (const auto& r : og.roots) collect(r, 1, out);
  return out;
}

std::size_t count_nodes(const OutlineGraph& og) { return flatten(og).size(); }

std::set<EvidenceId> all_citations(const OutlineGraph& og) {
  std::set<EvidenceId> ids;
  for (const auto& e : flatten(og)) ids.insert(e.node->citations.begin(), e.node->citations.end());
  return ids;
}

RevisionResult apply_revision(const OutlineGraph& old_og, std::string_view revised_text,
                              const EvidenceBank& bank, EmbeddingProvider& embedder) {
  RevisionResult result{parse_outline(revised_text), {}};

  for (auto id : all_citations(result.outline)) {
    if (!bank.contains(id)) {
      throw Error(ErrorKind::Validation, "revision cites unknown evidence " + render_evidence_token(id));
    }
  }

  auto old_ids = all_citations(old_og);
  auto new_ids = all_citations(result.outline);
  std::vector<EvidenceId> lost;
  for (auto id : old_ids) {
    if (!new_ids.count(id)) lost.push_back(id);
  }
  if (lost.empty()) return result;

  std::vector<std::pair<OutlineNode*, int>> targets;
  for (auto& r : result.outline.roots) collect_mut(r, 1, targets);
  if (targets.empty()) {
    throw Error(ErrorKind::Validation, "revision has no sections to carry existing citations");
  }

  std::map<std::string, Embedding> cache;
  auto embedding_of = [&](const std::string& title) -> const Embedding& {
    auto it = cache.find(title);
    if (it == cache.end()) it = cache.emplace(title, embedder.embed_one(title)).first;
    return it->second;
  };
  {
    std::vector<std::string> titles;
    for (auto& [node, depth] : targets) {
      if (!cache.count(node->title)) titles.push_back(node->title);
    }
    if (!titles.empty()) {
      auto vecs = embedder.embed(titles);
      for (std::size_t k = 0; k < titles.size(); ++k) cache.emplace(titles[k], std::move(vecs[k]));
    }
  }

  auto old_entries = flatten(old_og);
  for (auto id : lost) {
    const OutlineNode* host = nullptr;
    for (const auto& e : old_entries) {
      if (e.node->citations.count(id)) {
        host = e.node;
        break;
      }
    }
    const Embedding& host_vec = embedding_of(host->title);

    std::size_t best = 0;
    double best_sim = -2.0;
    for (std::size_t k = 0; k < targets.size(); ++k) {
      double sim = cosine_similarity(host_vec, embedding_of(targets[k].first->title));
      if (sim > best_sim || (sim == best_sim && targets[k].second < targets[best].second)) {
        best = k;
        best_sim = sim;
      }
    }
    targets[best].first->citations.insert(id);
    result.moves.push_back({id, host->label(), targets[best].first->label(), best_sim});
  }
  return result;
}

}  // namespace dualgraph
