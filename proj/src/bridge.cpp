#include "bridgex/bridge.hpp"

#include <algorithm>
#include <limits>
#include <cmath>
#include <future>
#include <set>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::bridge {

LayerWindow parse_layer_window(std::string_view raw) {
  const auto t = text::trim(raw);
  const auto dash = t.find('-');
  try {
    if (dash == std::string_view::npos) {
      const auto l = static_cast<std::uint32_t>(text::parse_size(t, "layer"));
      return {l, l};
    }
    LayerWindow w{static_cast<std::uint32_t>(text::parse_size(t.substr(0, dash), "layer")),
                  static_cast<std::uint32_t>(text::parse_size(t.substr(dash + 1), "layer"))};
    if (w.lo > w.hi) throw ConfigError("layer window '" + std::string(t) + "' is inverted");
    return w;
  } catch (const FormatError&) {
    throw ConfigError("invalid layer window '" + std::string(t) + "'");
  }
}

void HsicConfig::validate(const ModelGeometry& geometry) const {
  if (window.lo > window.hi) throw ConfigError("layer window is inverted");
  if (window.hi >= geometry.num_layers)
    throw ConfigError("layer window ends at " + std::to_string(window.hi) + " but the model has " +
                      std::to_string(geometry.num_layers) + " layers");
  if (pool_target && *pool_target == 0) throw ConfigError("pool_target must be at least 1");
}

NeuronSet exclusion_set(const NeuronSet& bridge_set, const NeuronSet& overlap,
                        const std::vector<NeuronSet>& other_bridges) {
  auto out = set_difference(bridge_set, overlap);
  for (const auto& other : other_bridges) out = set_difference(out, other);
  out.set_languages(bridge_set.languages());
  out.set_mode("exclusive");
  return out;
}

Eigen::MatrixXd average_pool_rows(const Eigen::MatrixXd& m, std::size_t target_rows) {
  const auto rows = static_cast<std::size_t>(m.rows());
  if (target_rows == 0) throw ShapeError("cannot pool to zero rows");
  if (target_rows >= rows) return m;
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(target_rows), m.cols());
  std::vector<double> count(target_rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    const auto block = r * target_rows / rows;
    out.row(static_cast<Eigen::Index>(block)) += m.row(static_cast<Eigen::Index>(r));
    count[block] += 1.0;
  }
  for (std::size_t b = 0; b < target_rows; ++b) out.row(static_cast<Eigen::Index>(b)) /= count[b];
  return out;
}

namespace {

void check_shapes(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
  if (x.rows() == 0 || y.rows() == 0)
    throw UndefinedError("dependency score needs at least one neuron on each side");
  if (x.cols() != y.cols())
    throw ShapeError("activation matrices have " + std::to_string(x.cols()) + " and " +
                     std::to_string(y.cols()) + " stimuli");
  if (x.cols() < 3) throw ShapeError("HSIC needs at least 3 stimuli");
}

// max over rows r of n^-2 sum(gram(r) .* centered)
double max_row_term(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& centered_matrix_gram,
                    Kernel kernel) {
  const auto n = static_cast<double>(rows.cols());
  double best = -std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < rows.rows(); ++i) {
    const Eigen::MatrixXd row = rows.row(i);
    const auto g = gram_matrix(row, kernel);
    best = std::max(best, g.matrix.cwiseProduct(centered_matrix_gram).sum() / (n * n));
  }
  return best;
}

}  // namespace

double row_to_matrix_max_hsic(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& matrix,
                              const HsicConfig& cfg) {
  check_shapes(rows, matrix);
  const auto pooled = cfg.pool_target ? average_pool_rows(matrix, *cfg.pool_target) : matrix;
  return max_row_term(rows, center_gram(gram_matrix(pooled, cfg.kernel).matrix), cfg.kernel);
}

double bidirectional_max_hsic(const Eigen::MatrixXd& bridge_rows, const Eigen::MatrixXd& overlap_rows,
                              const HsicConfig& cfg) {
  check_shapes(bridge_rows, overlap_rows);
  std::size_t px = 0;
  std::size_t py = 0;
  if (cfg.pool_target) {
    px = *cfg.pool_target;
    py = *cfg.pool_target;
  } else {
    px = py = static_cast<std::size_t>(std::min(bridge_rows.rows(), overlap_rows.rows()));
  }
  const auto x_pooled = average_pool_rows(bridge_rows, px);
  const auto y_pooled = average_pool_rows(overlap_rows, py);
  const auto kc = center_gram(gram_matrix(x_pooled, cfg.kernel).matrix);
  const auto lc = center_gram(gram_matrix(y_pooled, cfg.kernel).matrix);
  const double x_to_y = max_row_term(bridge_rows, lc, cfg.kernel);
  const double y_to_x = max_row_term(overlap_rows, kc, cfg.kernel);
  return 0.5 * (x_to_y + y_to_x);
}

BridgeInputs prepare_bridge_inputs(const std::vector<activations::ActivationRecord>& probe_records,
                                   const std::pair<std::string, std::string>& pair,
                                   NeuronSet overlap, std::map<std::string, NeuronSet> language_sets,
                                   std::size_t d, activations::Reduction reduction,
                                   activations::TokenScope scope) {
  NeuronSet all = overlap;
  for (const auto& [lang, set] : language_sets) all = set_union(all, set);
  auto probe = activations::build_activation_matrix(probe_records, all, pair, d, reduction, scope);
  return {pair, std::move(overlap), std::move(language_sets), std::move(probe)};
}

BridgeScore score_bridge(const std::string& candidate, const BridgeInputs& inputs,
                         const std::vector<std::string>& candidates, const HsicConfig& cfg) {
  const auto& geometry = inputs.overlap.geometry();
  cfg.validate(geometry);
  const auto own = inputs.language_sets.find(candidate);
  if (own == inputs.language_sets.end())
    throw LookupError("no neuron set for candidate '" + candidate + "'");

  std::vector<NeuronSet> others;
  for (const auto& c : candidates) {
    if (c == candidate) continue;
    const auto it = inputs.language_sets.find(c);
    if (it == inputs.language_sets.end()) throw LookupError("no neuron set for candidate '" + c + "'");
    others.push_back(it->second);
  }
  const auto exclusive = exclusion_set(own->second, inputs.overlap, others);

  const auto x_all = inputs.probe.select(exclusive);
  const auto y_all = inputs.probe.select(inputs.overlap);
  if (x_all.rows.size() != exclusive.size() || y_all.rows.size() != inputs.overlap.size())
    throw ValidationError("probe matrix does not cover every scored neuron");

  BridgeScore score{candidate, {}, {}, 0.0};
  double sum = 0.0;
  for (auto layer = cfg.window.lo; layer <= cfg.window.hi; ++layer) {
    const auto x = x_all.layer_rows(layer);
    const auto y = y_all.layer_rows(layer);
    if (x.rows.empty() || y.rows.empty()) {
      score.skipped_layers.push_back(layer);
      continue;
    }
    const double s = bidirectional_max_hsic(x.values, y.values, cfg);
    score.per_layer[layer] = s;
    sum += s;
  }
  if (score.per_layer.empty())
    throw UndefinedError("candidate '" + candidate + "' has no scorable layer in window " +
                         std::to_string(cfg.window.lo) + "-" + std::to_string(cfg.window.hi));
  score.aggregate = sum / static_cast<double>(score.per_layer.size());
  return score;
}

BridgeSelection select_bridge(const BridgeInputs& inputs, const std::vector<std::string>& candidates,
                              const HsicConfig& cfg) {
  if (candidates.empty()) throw SelectionError("no candidate bridge languages");
  std::set<std::string> unique;
  for (const auto& c : candidates) {
    if (c == inputs.pair.first || c == inputs.pair.second)
      throw ValidationError("candidate '" + c + "' is an endpoint of the pair");
    if (!unique.insert(c).second) throw ValidationError("candidate '" + c + "' listed twice");
  }
  cfg.validate(inputs.overlap.geometry());

  // Candidates are independent; results are assembled in candidate order.
  std::vector<std::future<BridgeScore>> jobs;
  for (const auto& c : candidates)
    jobs.push_back(std::async(std::launch::async, [&inputs, &candidates, &cfg, c] {
      return score_bridge(c, inputs, candidates, cfg);
    }));

  BridgeSelection sel;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    try {
      sel.ranking.push_back(jobs[i].get());
    } catch (const UndefinedError& e) {
      sel.unscorable[candidates[i]] = e.what();
    }
  }
  if (sel.ranking.empty()) throw SelectionError("no candidate bridge language could be scored");
  std::sort(sel.ranking.begin(), sel.ranking.end(), [](const BridgeScore& a, const BridgeScore& b) {
    if (a.aggregate != b.aggregate) return a.aggregate > b.aggregate;
    return a.candidate < b.candidate;
  });
  sel.selected = sel.ranking.front().candidate;
  return sel;
}

std::string export_bridge_report(const BridgeInputs& inputs, const BridgeSelection& selection) {
  const auto& [src, tgt] = inputs.pair;
  std::vector<const BridgeScore*> by_code;
  for (const auto& s : selection.ranking) by_code.push_back(&s);
  std::sort(by_code.begin(), by_code.end(),
            [](const BridgeScore* a, const BridgeScore* b) { return a->candidate < b->candidate; });

  std::string out = "source,target,candidate,layer,score\n";
  for (const auto* s : by_code) {
    std::set<std::uint32_t> layers(s->skipped_layers.begin(), s->skipped_layers.end());
    for (const auto& [l, v] : s->per_layer) layers.insert(l);
    for (auto l : layers) {
      const auto it = s->per_layer.find(l);
      out += src + "," + tgt + "," + s->candidate + "," + std::to_string(l) + "," +
             (it == s->per_layer.end() ? std::string() : text::format_double(it->second)) + "\n";
    }
  }
  out += "\ncandidate,aggregate,rank,selected\n";
  for (std::size_t i = 0; i < selection.ranking.size(); ++i) {
    const auto& s = selection.ranking[i];
    out += s.candidate + "," + text::format_double(s.aggregate) + "," + std::to_string(i + 1) + "," +
           (s.candidate == selection.selected ? "true" : "false") + "\n";
  }
  for (const auto& [c, why] : selection.unscorable) out += c + ",,,false\n";
  return out;
}

std::vector<double> layer_embedding_similarity(const std::vector<Eigen::VectorXd>& a,
                                               const std::vector<Eigen::VectorXd>& b) {
  if (a.size() != b.size())
    throw ShapeError("embedding sequences cover " + std::to_string(a.size()) + " and " +
                     std::to_string(b.size()) + " layers");
  std::vector<double> out;
  out.reserve(a.size());
  for (std::size_t l = 0; l < a.size(); ++l) {
    if (a[l].size() != b[l].size())
      throw ShapeError("embedding dimension mismatch at layer " + std::to_string(l));
    const double na = a[l].norm();
    const double nb = b[l].norm();
    if (na == 0.0 || nb == 0.0)
      throw UndefinedError("zero embedding vector at layer " + std::to_string(l));
    out.push_back(std::clamp(a[l].dot(b[l]) / (na * nb), -1.0, 1.0));
  }
  return out;
}

LayerWindow stable_window(const std::vector<double>& profile, double delta) {
  if (profile.empty()) throw ValidationError("empty similarity profile");
  if (!(delta >= 0.0)) throw ValidationError("plateau tolerance must be non-negative");
  const double threshold = *std::max_element(profile.begin(), profile.end()) - delta;
  LayerWindow best{0, 0};
  std::size_t best_len = 0;
  std::size_t i = 0;
  while (i < profile.size()) {
    if (profile[i] < threshold) {
      ++i;
      continue;
    }
    const auto start = i;
    while (i < profile.size() && profile[i] >= threshold) ++i;
    if (i - start > best_len) {
      best_len = i - start;
      best = {static_cast<std::uint32_t>(start), static_cast<std::uint32_t>(i - 1)};
    }
  }
  return best;
}

}  // namespace bridgex::bridge
