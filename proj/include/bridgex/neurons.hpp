#pragma once

#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bridgex/activations.hpp"
#include "bridgex/neuron_set.hpp"
#include "bridgex/spectrum_matrix.hpp"

// Language-specific neuron selection, overlap sets, and the similarity
// measures built on them.
namespace bridgex::neurons {

inline constexpr double kDefaultTau = 0.05;

/// Global: one budget of round(tau * N * L) over all layers jointly.
/// PerLayer: round(tau * N) per layer.
enum class SelectionMode { global, per_layer };

SelectionMode parse_selection_mode(std::string_view text);
std::string_view to_string(SelectionMode mode);

/// Half-up rounding of tau * count with a small tolerance for binary
/// representation error (0.05 * 64 * 4 = 12.8000000001 -> 13).
std::size_t selection_budget(double tau, std::size_t count);

/// Top neurons by activation frequency. Ties go to the lower (layer, index).
/// An all-zero profile yields an empty set with flagged_empty() set.
NeuronSet identify_language_neurons(const activations::FrequencyProfile& profile, double tau,
                                    SelectionMode mode = SelectionMode::global);

/// Per-layer intersection, tagged with both sets' languages.
NeuronSet overlap_set(const NeuronSet& a, const NeuronSet& b);

/// Cosine between the two languages' frequencies restricted to `overlap`,
/// neurons concatenated in (layer, index) order.
double overlap_similarity(const activations::FrequencyProfile& fa,
                          const activations::FrequencyProfile& fb, const NeuronSet& overlap);

struct SpectrumResult {
  SpectrumMatrix matrix;
  std::map<std::string, NeuronSet> sets;
  double tau = kDefaultTau;
  SelectionMode mode = SelectionMode::global;
};

/// Pairwise overlap similarity; undefined cells are left missing.
SpectrumResult spectrum(const std::vector<activations::FrequencyProfile>& profiles, double tau,
                        SelectionMode mode = SelectionMode::global);

/// |a ∩ b| / |a ∪ b| pooled over layers.
double iou_score(const NeuronSet& a, const NeuronSet& b);

/// Entropy-based language specificity (LAPE).
struct LapeScores {
  std::vector<std::string> languages;
  ModelGeometry geometry;
  /// Per neuron (layer-major): -H of the across-language normalized
  /// activation distribution; nullopt when inactive in every language.
  std::vector<std::optional<double>> score;
  /// Per neuron and language: normalized share, layer-major then language.
  std::vector<double> share;

  double share_of(std::size_t neuron, std::size_t language) const {
    return share[neuron * languages.size() + language];
  }
};

LapeScores lape_scores(const std::vector<activations::FrequencyProfile>& profiles);

/// Per-language LAPE sets: among neurons whose share for that language
/// exceeds the uniform share 1/|L|, the top round(tau * N * L) by score.
std::map<std::string, NeuronSet> lape_neuron_sets(const LapeScores& scores, double tau);

/// Number of members per layer.
std::vector<std::size_t> overlap_layer_distribution(const NeuronSet& set);

/// Baseline bridge choices: the candidate with the highest mean score to
/// source and target. Ties resolve to the smaller language code.
struct BaselineChoice {
  std::string selected;
  std::map<std::string, double> scores;
};

BaselineChoice select_bridge_iou(const std::map<std::string, NeuronSet>& sets,
                                 const std::string& source, const std::string& target,
                                 const std::vector<std::string>& candidates);

BaselineChoice select_bridge_lape_overlap(const std::vector<activations::FrequencyProfile>& profiles,
                                          double tau, const std::string& source,
                                          const std::string& target,
                                          const std::vector<std::string>& candidates);

// -- NeuronSet text files -------------------------------------------------------
// "#bridgex-neurons" header (languages, tau, geometry, mode) then "layer index"
// per line.

std::string serialize_neuron_set(const NeuronSet& set);
NeuronSet parse_neuron_set(std::istream& in);
NeuronSet read_neuron_set(const std::filesystem::path& path);

}  // namespace bridgex::neurons
