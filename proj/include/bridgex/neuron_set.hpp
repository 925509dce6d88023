#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace bridgex {

/// Layer count and FFN width of the model a dump was taken from.
struct ModelGeometry {
  std::size_t num_layers = 0;
  std::size_t neurons_per_layer = 0;

  std::size_t total() const noexcept { return num_layers * neurons_per_layer; }
  /// Throws ValidationError unless both dimensions are >= 1.
  void validate() const;

  friend bool operator==(const ModelGeometry&, const ModelGeometry&) = default;
};

/// One FFN neuron: column `index` of the up-projection in layer `layer`.
struct NeuronId {
  std::uint32_t layer = 0;
  std::uint32_t index = 0;

  friend bool operator==(const NeuronId&, const NeuronId&) = default;
  friend auto operator<=>(const NeuronId&, const NeuronId&) = default;
};

/// Per-layer sorted neuron index sets, tagged with the language(s) they
/// belong to and the selection fraction that produced them.
class NeuronSet {
public:
  NeuronSet() = default;
  explicit NeuronSet(ModelGeometry geometry, std::vector<std::string> languages = {},
                     std::optional<double> tau = std::nullopt);

  static NeuronSet from_ids(ModelGeometry geometry, const std::vector<NeuronId>& ids,
                            std::vector<std::string> languages = {},
                            std::optional<double> tau = std::nullopt);

  const ModelGeometry& geometry() const noexcept { return geometry_; }
  const std::vector<std::string>& languages() const noexcept { return languages_; }
  void set_languages(std::vector<std::string> languages) { languages_ = std::move(languages); }
  std::optional<double> tau() const noexcept { return tau_; }
  void set_tau(std::optional<double> tau) { tau_ = tau; }
  /// "global" or "per_layer"; empty for sets not produced by selection.
  const std::string& mode() const noexcept { return mode_; }
  void set_mode(std::string mode) { mode_ = std::move(mode); }
  /// Set when selection ran on a degenerate (all-zero) profile.
  bool flagged_empty() const noexcept { return flagged_empty_; }
  void set_flagged_empty(bool flag) { flagged_empty_ = flag; }

  /// Throws ValidationError when the id lies outside the geometry.
  void insert(NeuronId id);
  bool contains(NeuronId id) const;
  const std::vector<std::uint32_t>& layer(std::size_t layer) const { return per_layer_.at(layer); }
  std::size_t size() const noexcept;
  bool empty() const noexcept { return size() == 0; }
  /// All members in (layer, index) order.
  std::vector<NeuronId> ids() const;

  /// Membership equality; tags are ignored.
  bool same_members(const NeuronSet& other) const {
    return geometry_ == other.geometry_ && per_layer_ == other.per_layer_;
  }

private:
  friend NeuronSet set_intersection(const NeuronSet&, const NeuronSet&);
  friend NeuronSet set_union(const NeuronSet&, const NeuronSet&);
  friend NeuronSet set_difference(const NeuronSet&, const NeuronSet&);

  ModelGeometry geometry_;
  std::vector<std::string> languages_;
  std::optional<double> tau_;
  std::string mode_;
  bool flagged_empty_ = false;
  std::vector<std::vector<std::uint32_t>> per_layer_;
};

// Per-layer set algebra. Throw ConfigError on geometry mismatch. The
// result carries the left operand's tags.
NeuronSet set_intersection(const NeuronSet& a, const NeuronSet& b);
NeuronSet set_union(const NeuronSet& a, const NeuronSet& b);
NeuronSet set_difference(const NeuronSet& a, const NeuronSet& b);

}  // namespace bridgex
