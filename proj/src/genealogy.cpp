#include "bridgex/genealogy.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::genealogy {

namespace {

const std::regex& bracketed_code() {
  static const std::regex re(R"(\[([a-z0-9]{4}[0-9]{4})\])");
  return re;
}

const std::regex& bare_code() {
  static const std::regex re(R"(_?([a-z0-9]{4}[0-9]{4})_?)");
  return re;
}

}  // namespace

std::string normalize_label(std::string_view raw) {
  const std::string s(text::trim(raw));
  std::smatch m;
  if (std::regex_search(s, m, bracketed_code())) return "_" + m[1].str() + "_";
  if (std::regex_match(s, m, bare_code())) return "_" + m[1].str() + "_";
  return s;
}

// -- tree ---------------------------------------------------------------------

PhyloTree::PhyloTree(std::vector<Node> nodes, std::string family)
    : nodes_(std::move(nodes)), family_(std::move(family)) {
  if (nodes_.empty()) throw ValidationError("tree has no nodes");
  std::size_t roots = 0;
  for (std::size_t i = 0; i < nodes_.size(); ++i)
    if (!nodes_[i].parent) {
      root_ = i;
      ++roots;
    }
  if (roots != 1) throw ValidationError("tree must have exactly one root");

  // Depth-first from the root; also detects cycles and unreachable nodes.
  std::vector<bool> visited(nodes_.size(), false);
  std::vector<std::size_t> stack{root_};
  nodes_[root_].depth = 0;
  std::size_t reached = 0;
  while (!stack.empty()) {
    const auto id = stack.back();
    stack.pop_back();
    if (visited[id]) throw ValidationError("tree contains a cycle");
    visited[id] = true;
    ++reached;
    for (auto c : nodes_[id].children) {
      if (c >= nodes_.size() || nodes_[c].parent != id)
        throw ValidationError("inconsistent parent/child links");
      nodes_[c].depth = nodes_[id].depth + 1;
      stack.push_back(c);
    }
  }
  if (reached != nodes_.size()) throw ValidationError("tree has unreachable nodes");

  std::set<std::string> labels;
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const auto& n = nodes_[i];
    if (n.children.empty() && n.label.empty()) throw ValidationError("tree has an unlabelled leaf");
    if (n.label.empty()) continue;
    if (!labels.insert(n.label).second)
      throw ValidationError("duplicate node label '" + n.label + "'");
    if (n.children.empty()) leaves_.emplace(n.label, i);
  }
  if (family_.empty()) family_ = nodes_[root_].label;
}

std::vector<std::string> PhyloTree::leaf_labels() const {
  std::vector<std::string> out;
  for (const auto& [label, id] : leaves_) out.push_back(label);
  return out;
}

std::size_t PhyloTree::leaf(const std::string& label) const {
  const auto it = leaves_.find(label);
  if (it == leaves_.end()) throw LookupError("no leaf labelled '" + label + "'");
  return it->second;
}

namespace {

std::size_t distance_between(const std::vector<PhyloTree::Node>& nodes, std::size_t a, std::size_t b) {
  std::size_t steps = 0;
  while (nodes[a].depth > nodes[b].depth) {
    a = *nodes[a].parent;
    ++steps;
  }
  while (nodes[b].depth > nodes[a].depth) {
    b = *nodes[b].parent;
    ++steps;
  }
  while (a != b) {
    a = *nodes[a].parent;
    b = *nodes[b].parent;
    steps += 2;
  }
  return steps;
}

}  // namespace

std::size_t PhyloTree::max_leaf_distance() const {
  std::size_t best = 0;
  for (auto i = leaves_.begin(); i != leaves_.end(); ++i)
    for (auto j = std::next(i); j != leaves_.end(); ++j)
      best = std::max(best, distance_between(nodes_, i->second, j->second));
  return best;
}

// -- Newick ---------------------------------------------------------------------

namespace {

class NewickParser {
public:
  explicit NewickParser(std::string_view s) : s_(s) {}

  PhyloTree parse() {
    std::vector<std::size_t> stack;
    std::size_t current = new_node(std::nullopt);
    bool done = false;
    while (pos_ < s_.size() && !done) {
      const char c = s_[pos_];
      switch (c) {
        case ' ': case '\t': case '\n': case '\r':
          ++pos_;
          break;
        case '(':
          if (!nodes_[current].label.empty() || closed_[current]) fail("unexpected '('");
          stack.push_back(current);
          current = new_node(current);
          ++pos_;
          break;
        case ',':
          if (stack.empty()) fail("comma outside of parentheses");
          current = new_node(stack.back());
          ++pos_;
          break;
        case ')':
          if (stack.empty()) fail("unbalanced ')'");
          current = stack.back();
          stack.pop_back();
          closed_[current] = true;
          ++pos_;
          break;
        case ':':
          ++pos_;
          skip_length();
          break;
        case ';':
          if (!stack.empty()) fail("unbalanced '(' before ';'");
          ++pos_;
          done = true;
          break;
        default:
          if (!nodes_[current].label.empty()) fail("node has two labels");
          nodes_[current].label = read_label();
          break;
      }
    }
    if (!done) fail(stack.empty() ? "missing ';'" : "unbalanced '(' at end of input");
    while (pos_ < s_.size()) {
      if (!std::isspace(static_cast<unsigned char>(s_[pos_]))) fail("trailing content after ';'");
      ++pos_;
    }
    for (std::size_t i = 0; i < nodes_.size(); ++i)
      if (nodes_[i].children.empty() && nodes_[i].label.empty()) {
        pos_ = offsets_[i];
        fail("empty leaf (dangling comma or empty group)");
      }
    for (auto& n : nodes_) n.label = n.label.empty() ? n.label : normalize_label(n.label);
    return PhyloTree(std::move(nodes_));
  }

private:
  std::size_t new_node(std::optional<std::size_t> parent) {
    const auto id = nodes_.size();
    nodes_.push_back({});
    nodes_.back().parent = parent;
    offsets_.push_back(pos_);
    closed_.push_back(false);
    if (parent) nodes_[*parent].children.push_back(id);
    return id;
  }

  std::string read_label() {
    std::string label;
    if (s_[pos_] == '\'') {
      ++pos_;
      for (;;) {
        if (pos_ >= s_.size()) fail("unterminated quoted label");
        if (s_[pos_] == '\'') {
          if (pos_ + 1 < s_.size() && s_[pos_ + 1] == '\'') {
            label += '\'';
            pos_ += 2;
            continue;
          }
          ++pos_;
          break;
        }
        label += s_[pos_++];
      }
      return label;
    }
    while (pos_ < s_.size()) {
      const char c = s_[pos_];
      if (c == '(' || c == ')' || c == ',' || c == ':' || c == ';') break;
      if (c == '[') {
        const auto close = s_.find(']', pos_);
        if (close == std::string_view::npos) fail("unterminated '['");
        label.append(s_.substr(pos_, close - pos_ + 1));
        pos_ = close + 1;
        continue;
      }
      label += c;
      ++pos_;
    }
    auto trimmed = std::string(text::trim(label));
    if (trimmed.empty()) fail("empty label");
    return trimmed;
  }

  void skip_length() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) ++pos_;
    const auto start = pos_;
    while (pos_ < s_.size() && std::string_view("0123456789.eE+-").find(s_[pos_]) != std::string_view::npos)
      ++pos_;
    if (pos_ == start) fail("missing branch length after ':'");
  }

  [[noreturn]] void fail(const std::string& why) const {
    throw ParseError("newick: " + why + " at offset " + std::to_string(pos_), pos_);
  }

  std::string_view s_;
  std::size_t pos_ = 0;
  std::vector<PhyloTree::Node> nodes_;
  std::vector<std::size_t> offsets_;
  std::vector<bool> closed_;
};

}  // namespace

PhyloTree parse_newick(std::string_view text) { return NewickParser(text).parse(); }

PhyloTree read_newick(const std::filesystem::path& path) { return parse_newick(text::read_file(path)); }

std::size_t node_distance(const PhyloTree& tree, const std::string& a, const std::string& b) {
  return distance_between(tree.nodes(), tree.leaf(a), tree.leaf(b));
}

// -- similarity -------------------------------------------------------------------

FamilyNorms FamilyNorms::defaults() {
  FamilyNorms n;
  n.set("Sino-Tibetan", 80.0);
  n.set("_sini1245_", 80.0);
  n.set("Indo-European", 75.0);
  n.set("_indo1319_", 75.0);
  return n;
}

void FamilyNorms::set(const std::string& family, double max_distance) {
  if (!(max_distance > 0.0)) throw ConfigError("normalizer for '" + family + "' must be positive");
  values_[text::to_lower_ascii(family)] = max_distance;
}

double FamilyNorms::normalizer(const PhyloTree& tree) const {
  for (const auto& key : {tree.family(), tree.nodes()[tree.root()].label}) {
    if (key.empty()) continue;
    const auto it = values_.find(text::to_lower_ascii(key));
    if (it != values_.end()) return it->second;
  }
  if (fallback_ == Fallback::tree_max_distance)
    return static_cast<double>(std::max<std::size_t>(1, tree.max_leaf_distance()));
  throw ConfigError("no distance normalizer for family '" + tree.family() + "'");
}

double similarity(const PhyloTree& tree, const std::string& a, const std::string& b,
                  const FamilyNorms& norms) {
  const auto d = static_cast<double>(node_distance(tree, a, b));
  const double dmax = norms.normalizer(tree);
  // (D̂ - min(D̂, d)) / D̂ equals 1 - min(1, d/D̂) and is exact for small integers.
  const double s_distance = (dmax - std::min(dmax, d)) / dmax;
  const auto da = tree.depth(a);
  const auto db = tree.depth(b);
  const auto deepest = std::max(da, db);
  const double alpha =
      deepest == 0 ? 1.0
                   : 1.0 - static_cast<double>(da > db ? da - db : db - da) / static_cast<double>(deepest);
  return s_distance * alpha;
}

std::map<std::string, std::string> parse_code_table(std::string_view content) {
  std::map<std::string, std::string> out;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto f = text::split_whitespace(body);
    if (f.size() != 2)
      throw ParseError("code table line " + std::to_string(line_no) + ": expected 'code glottocode'",
                       line_no);
    out[std::string(f[0])] = normalize_label(f[1]);
  }
  return out;
}

std::map<std::string, std::string> read_code_table(const std::filesystem::path& path) {
  return parse_code_table(text::read_file(path));
}

SpectrumMatrix genealogy_matrix(const std::vector<PhyloTree>& trees,
                                const std::vector<std::string>& languages,
                                const std::map<std::string, std::string>& code_table,
                                const FamilyNorms& norms) {
  std::vector<std::pair<std::size_t, std::string>> where;  // tree index, leaf label
  std::vector<std::string> offenders;
  for (const auto& code : languages) {
    const auto it = code_table.find(code);
    const auto label = it == code_table.end() ? normalize_label(code) : it->second;
    std::vector<std::size_t> hits;
    for (std::size_t t = 0; t < trees.size(); ++t)
      if (trees[t].has_leaf(label)) hits.push_back(t);
    if (hits.size() != 1) {
      offenders.push_back(code + (hits.empty() ? " (not found)" : " (in several trees)"));
      continue;
    }
    where.emplace_back(hits.front(), label);
  }
  if (!offenders.empty()) {
    std::string msg = "unresolvable languages:";
    for (const auto& o : offenders) msg += " " + o;
    throw LookupError(msg);
  }

  SpectrumMatrix m(languages);
  for (std::size_t i = 0; i < languages.size(); ++i)
    for (std::size_t j = i + 1; j < languages.size(); ++j) {
      const auto& [ti, li] = where[i];
      const auto& [tj, lj] = where[j];
      m.set(i, j, ti == tj ? similarity(trees[ti], li, lj, norms) : 0.0);
    }
  return m;
}

}  // namespace bridgex::genealogy
