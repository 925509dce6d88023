#pragma once

// Runs the library pipeline (frequencies, selection, overlap, scoring) on a
// planted synthetic scenario. Shared by the bridge unit tests and the
// acceptance binary.

#include <map>
#include <string>
#include <vector>

#include "bridgex/activations.hpp"
#include "bridgex/bridge.hpp"
#include "bridgex/neurons.hpp"
#include "bridgex/synthetic.hpp"

namespace scenario {

struct Recovery {
  bridgex::bridge::BridgeSelection selection;
  std::size_t overlap_size = 0;
};

inline Recovery recover(std::uint64_t seed, bridgex::ModelGeometry g, std::size_t d,
                        const std::string& planted = "en",
                        const std::vector<std::string>& candidates = {"de", "en", "fr"},
                        std::size_t per_layer = 3, std::size_t tokens = 200) {
  using namespace bridgex;
  std::map<std::string, double> couplings;
  for (const auto& c : candidates) couplings[c] = c == planted ? 1.0 : 0.0;
  std::vector<std::uint32_t> layers;
  for (std::uint32_t l = 0; l < g.num_layers; ++l) layers.push_back(l);
  const auto spec = activations::bridge_scenario(g, "ar", "he", couplings, layers, per_layer, d, seed);
  const auto dumps = activations::generate_synthetic(spec, tokens);

  auto select = [&](const std::string& lang) {
    return neurons::identify_language_neurons(
        activations::build_frequency_profile(dumps.corpus.records, g, lang), neurons::kDefaultTau);
  };
  const auto overlap = neurons::overlap_set(select("ar"), select("he"));
  std::map<std::string, NeuronSet> sets;
  for (const auto& c : candidates) sets[c] = select(c);
  const auto inputs = bridge::prepare_bridge_inputs(dumps.probe->records, {"ar", "he"}, overlap, sets, d);
  bridge::HsicConfig cfg;
  cfg.window = {0, static_cast<std::uint32_t>(g.num_layers - 1)};
  return {bridge::select_bridge(inputs, candidates, cfg), overlap.size()};
}

}  // namespace scenario
