#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bridgex/activations.hpp"
#include "bridgex/language.hpp"

// Synthetic activation dumps with planted structure, used to verify the
// neuron and bridge pipeline end to end without model inference.
namespace bridgex::activations {

/// Neurons that fire with `frequency` on tokens of every listed language.
/// One language plants a language-specific set, two or more an overlap.
struct PlantedSet {
  std::vector<std::string> languages;
  std::vector<NeuronId> neurons;
  double frequency = 0.9;
};

/// Probe stimuli for one pair: d prompts per direction.
struct ProbePlan {
  std::string source;
  std::string target;
  std::size_t d = 20;
  std::size_t tokens_per_stimulus = 1;
};

struct SynthSpec {
  ModelGeometry geometry;
  std::vector<LanguageTag> languages;
  std::vector<PlantedSet> planted;
  /// Bridge language -> coupling in [0, 1]. In probe stimuli that bridge's
  /// language-specific neurons read coupling*signal + (1-coupling)*noise,
  /// where signal is the value carried by the probe pair's overlap neurons.
  std::map<std::string, double> couplings;
  std::optional<ProbePlan> probe;
  /// Background neurons fire with a per-neuron rate drawn from [0, background_max].
  double background_max = 0.3;
  std::size_t tokens_per_sentence = 8;
  std::string model = "synthetic";
  std::uint64_t noise_seed = 0;

  /// Throws ValidationError on out-of-geometry neurons, bad frequencies or
  /// couplings, or unknown languages.
  void validate() const;
};

struct SyntheticDumps {
  Dump corpus;  // tokens_per_language tokens per language, every layer
  std::optional<Dump> probe;
};

/// Deterministic under `spec.noise_seed`.
SyntheticDumps generate_synthetic(const SynthSpec& spec, std::size_t tokens_per_language);

/// Standard planted layout: `per_layer` overlap neurons for (source, target)
/// and `per_layer` language-specific neurons for every candidate, in each
/// of `layers`; candidates get the given couplings in the probe stimuli.
SynthSpec bridge_scenario(ModelGeometry geometry, const std::string& source,
                          const std::string& target,
                          const std::map<std::string, double>& couplings,
                          const std::vector<std::uint32_t>& layers, std::size_t per_layer,
                          std::size_t d, std::uint64_t seed, double frequency = 0.9);

}  // namespace bridgex::activations
