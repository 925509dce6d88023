#include "bridgex/neuron_set.hpp"

#include <algorithm>
#include <iterator>

#include "bridgex/error.hpp"

namespace bridgex {

void ModelGeometry::validate() const {
  if (num_layers < 1 || neurons_per_layer < 1)
    throw ValidationError("model geometry needs at least one layer and one neuron per layer");
}

NeuronSet::NeuronSet(ModelGeometry geometry, std::vector<std::string> languages,
                     std::optional<double> tau)
    : geometry_(geometry),
      languages_(std::move(languages)),
      tau_(tau),
      per_layer_(geometry.num_layers) {}

NeuronSet NeuronSet::from_ids(ModelGeometry geometry, const std::vector<NeuronId>& ids,
                              std::vector<std::string> languages, std::optional<double> tau) {
  NeuronSet s(geometry, std::move(languages), tau);
  for (auto id : ids) s.insert(id);
  return s;
}

void NeuronSet::insert(NeuronId id) {
  if (id.layer >= geometry_.num_layers || id.index >= geometry_.neurons_per_layer)
    throw ValidationError("neuron (" + std::to_string(id.layer) + ", " + std::to_string(id.index) +
                          ") is outside the model geometry");
  auto& layer = per_layer_[id.layer];
  const auto it = std::lower_bound(layer.begin(), layer.end(), id.index);
  if (it == layer.end() || *it != id.index) layer.insert(it, id.index);
}

bool NeuronSet::contains(NeuronId id) const {
  if (id.layer >= per_layer_.size()) return false;
  const auto& layer = per_layer_[id.layer];
  return std::binary_search(layer.begin(), layer.end(), id.index);
}

std::size_t NeuronSet::size() const noexcept {
  std::size_t n = 0;
  for (const auto& l : per_layer_) n += l.size();
  return n;
}

std::vector<NeuronId> NeuronSet::ids() const {
  std::vector<NeuronId> out;
  out.reserve(size());
  for (std::size_t l = 0; l < per_layer_.size(); ++l)
    for (auto idx : per_layer_[l]) out.push_back({static_cast<std::uint32_t>(l), idx});
  return out;
}

namespace {

void require_same_geometry(const NeuronSet& a, const NeuronSet& b) {
  if (!(a.geometry() == b.geometry()))
    throw ConfigError("neuron sets have different model geometries");
}

template <typename Op>
NeuronSet combine(const NeuronSet& a, const NeuronSet& b, Op op) {
  require_same_geometry(a, b);
  NeuronSet out(a.geometry(), a.languages(), a.tau());
  for (std::size_t l = 0; l < a.geometry().num_layers; ++l) {
    std::vector<std::uint32_t> merged;
    op(a.layer(l), b.layer(l), std::back_inserter(merged));
    for (auto idx : merged) out.insert({static_cast<std::uint32_t>(l), idx});
  }
  return out;
}

}  // namespace

NeuronSet set_intersection(const NeuronSet& a, const NeuronSet& b) {
  return combine(a, b, [](const auto& x, const auto& y, auto out) {
    std::set_intersection(x.begin(), x.end(), y.begin(), y.end(), out);
  });
}

NeuronSet set_union(const NeuronSet& a, const NeuronSet& b) {
  return combine(a, b, [](const auto& x, const auto& y, auto out) {
    std::set_union(x.begin(), x.end(), y.begin(), y.end(), out);
  });
}

NeuronSet set_difference(const NeuronSet& a, const NeuronSet& b) {
  return combine(a, b, [](const auto& x, const auto& y, auto out) {
    std::set_difference(x.begin(), x.end(), y.begin(), y.end(), out);
  });
}

}  // namespace bridgex
