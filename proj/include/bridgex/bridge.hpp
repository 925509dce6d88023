#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bridgex/activations.hpp"
#include "bridgex/hsic.hpp"
#include "bridgex/neuron_set.hpp"

// Bridge-language scoring: HSIC dependency between the source-target overlap
// neurons and each candidate's exclusive neurons, averaged over a middle
// layer window.
namespace bridgex::bridge {

/// Inclusive layer range.
struct LayerWindow {
  std::uint32_t lo = 0;
  std::uint32_t hi = 0;

  std::size_t size() const noexcept { return hi - lo + 1; }
  friend bool operator==(const LayerWindow&, const LayerWindow&) = default;
};

/// "10-21" or a single layer "7".
LayerWindow parse_layer_window(std::string_view text);

struct HsicConfig {
  Kernel kernel = Kernel::rbf_median;
  /// Rows of the matrix-side observation after average pooling. When unset,
  /// both matrices are pooled to the smaller of their row counts.
  std::optional<std::size_t> pool_target;
  LayerWindow window;

  /// Throws ConfigError for an inverted window, one outside the geometry, or
  /// a zero pool target.
  void validate(const ModelGeometry& geometry) const;
};

/// T_y minus the overlap set minus every other candidate's set.
NeuronSet exclusion_set(const NeuronSet& bridge_set, const NeuronSet& overlap,
                        const std::vector<NeuronSet>& other_bridges);

/// Contiguous-block row means: row r of the input feeds block
/// floor(r * target / rows). Returns the input when target >= rows.
Eigen::MatrixXd average_pool_rows(const Eigen::MatrixXd& m, std::size_t target_rows);

/// ½ (max_i HSIC(x_i, Y) + max_j HSIC(X, y_j)) where x_i, y_j are single
/// neuron rows and X, Y the (pooled) matrices. `bridge_rows` holds the
/// candidate's exclusive neurons, `overlap_rows` the source-target overlap.
double bidirectional_max_hsic(const Eigen::MatrixXd& bridge_rows, const Eigen::MatrixXd& overlap_rows,
                              const HsicConfig& cfg);

/// Only the first half of the bidirectional score: max_i HSIC(x_i, Y).
double row_to_matrix_max_hsic(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& matrix,
                              const HsicConfig& cfg);

/// Everything needed to score candidates for one language pair.
struct BridgeInputs {
  std::pair<std::string, std::string> pair;
  NeuronSet overlap;                               // T_{s,t}
  std::map<std::string, NeuronSet> language_sets;  // T_y per candidate
  activations::ActivationMatrix probe;             // rows cover every neuron above
};

/// Builds the probe matrix over the union of the overlap and candidate sets.
BridgeInputs prepare_bridge_inputs(const std::vector<activations::ActivationRecord>& probe_records,
                                   const std::pair<std::string, std::string>& pair,
                                   NeuronSet overlap, std::map<std::string, NeuronSet> language_sets,
                                   std::size_t d,
                                   activations::Reduction reduction = activations::Reduction::mean_over_tokens,
                                   activations::TokenScope scope = activations::TokenScope::all);

struct BridgeScore {
  std::string candidate;
  std::map<std::uint32_t, double> per_layer;
  std::vector<std::uint32_t> skipped_layers;
  double aggregate = 0.0;
};

/// Per-layer bidirectional HSIC over the window; layers where either set is
/// empty are skipped and recorded. Throws UndefinedError when every window
/// layer is skipped. `candidates` is the full candidate list, used for the
/// exclusion set.
BridgeScore score_bridge(const std::string& candidate, const BridgeInputs& inputs,
                         const std::vector<std::string>& candidates, const HsicConfig& cfg);

struct BridgeSelection {
  std::string selected;
  std::vector<BridgeScore> ranking;               // by aggregate, ties by code
  std::map<std::string, std::string> unscorable;  // candidate -> reason
};

/// argmax of the aggregate score. Throws SelectionError when no candidate
/// can be scored and ValidationError when a candidate is a pair endpoint.
BridgeSelection select_bridge(const BridgeInputs& inputs, const std::vector<std::string>& candidates,
                              const HsicConfig& cfg);

/// CSV rows (source,target,candidate,layer,score), a blank line, then the
/// summary block (candidate,aggregate,rank,selected).
std::string export_bridge_report(const BridgeInputs& inputs, const BridgeSelection& selection);

/// Cosine similarity of two embedding sequences, layer by layer.
std::vector<double> layer_embedding_similarity(const std::vector<Eigen::VectorXd>& a,
                                               const std::vector<Eigen::VectorXd>& b);

/// Longest contiguous run of layers whose value is within `delta` of the
/// profile maximum; the earliest run wins ties.
LayerWindow stable_window(const std::vector<double>& profile, double delta);

}  // namespace bridgex::bridge
