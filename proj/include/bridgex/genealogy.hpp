#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "bridgex/spectrum_matrix.hpp"

// Phylogenetic (Glottolog-style Newick) trees and the tree-derived
// human-language similarity.
namespace bridgex::genealogy {

/// "[sini1245]" -> "_sini1245_". Labels with a bracketed glottocode are
/// reduced to that code; labels that are a bare glottocode are wrapped;
/// anything else is returned trimmed.
std::string normalize_label(std::string_view raw);

class PhyloTree {
public:
  struct Node {
    std::string label;  // normalized; may be empty for internal nodes
    std::optional<std::size_t> parent;
    std::vector<std::size_t> children;
    std::size_t depth = 0;  // edges from the root
  };

  /// Takes nodes with parent/children links set; computes depths and
  /// validates a single root, labelled leaves, and unique labels.
  explicit PhyloTree(std::vector<Node> nodes, std::string family = {});

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t root() const noexcept { return root_; }
  const std::string& family() const noexcept { return family_; }
  void set_family(std::string family) { family_ = std::move(family); }

  std::vector<std::string> leaf_labels() const;
  bool has_leaf(const std::string& label) const { return leaves_.count(label) > 0; }
  /// Throws LookupError for unknown leaves.
  std::size_t leaf(const std::string& label) const;
  std::size_t depth(const std::string& label) const { return nodes_[leaf(label)].depth; }

  /// Largest leaf-to-leaf edge count.
  std::size_t max_leaf_distance() const;

private:
  std::vector<Node> nodes_;
  std::size_t root_ = 0;
  std::string family_;
  std::map<std::string, std::size_t> leaves_;
};

/// Parses one Newick tree. Branch lengths are discarded; quoted labels and
/// bracketed glottocodes inside labels are supported. Throws ParseError
/// with a character offset, or ValidationError for duplicate labels.
PhyloTree parse_newick(std::string_view text);
PhyloTree read_newick(const std::filesystem::path& path);

/// Edges on the path between two leaves.
std::size_t node_distance(const PhyloTree& tree, const std::string& a, const std::string& b);

/// Family-specific maximum distance D̂.
class FamilyNorms {
public:
  enum class Fallback { tree_max_distance, none };

  /// Sino-Tibetan 80, Indo-European 75, tree-max fallback for others.
  static FamilyNorms defaults();

  void set(const std::string& family, double max_distance);
  void set_fallback(Fallback f) { fallback_ = f; }
  /// D̂ for the tree's family; throws ConfigError without a rule.
  double normalizer(const PhyloTree& tree) const;

private:
  std::map<std::string, double> values_;  // keys are lowercase
  Fallback fallback_ = Fallback::tree_max_distance;
};

/// S_distance * alpha_depth with S_distance = 1 - min(1, d / D̂) and
/// alpha_depth = 1 - |depth(a) - depth(b)| / max(depth(a), depth(b)).
double similarity(const PhyloTree& tree, const std::string& a, const std::string& b,
                  const FamilyNorms& norms);

/// Language code -> leaf label (normalized on load). "code<ws>glottocode"
/// per line, '#' comments.
std::map<std::string, std::string> parse_code_table(std::string_view text);
std::map<std::string, std::string> read_code_table(const std::filesystem::path& path);

/// Languages in the same tree get their similarity; languages in different
/// trees get 0. Throws LookupError listing every language that does not
/// resolve to exactly one tree.
SpectrumMatrix genealogy_matrix(const std::vector<PhyloTree>& trees,
                                const std::vector<std::string>& languages,
                                const std::map<std::string, std::string>& code_table,
                                const FamilyNorms& norms);

}  // namespace bridgex::genealogy
