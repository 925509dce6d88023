#include "bridgex/synthetic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <set>

#include "bridgex/error.hpp"

namespace bridgex::activations {

namespace {

// mt19937_64 output is fixed by the standard; the transforms below are
// spelled out so dumps are identical across standard libraries.
class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double theta = 2.0 * M_PI * u2;
    spare_ = r * std::sin(theta);
    has_spare_ = true;
    return r * std::cos(theta);
  }

  std::uint64_t bits() { return engine_(); }

private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

std::size_t flat(const ModelGeometry& g, NeuronId id) {
  return id.layer * g.neurons_per_layer + id.index;
}

bool same_languages(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

}  // namespace

void SynthSpec::validate() const {
  geometry.validate();
  std::set<std::string> known;
  for (const auto& l : languages) known.insert(l.code());
  if (known.empty()) throw ValidationError("synthetic spec lists no languages");
  if (!(background_max >= 0.0 && background_max <= 1.0))
    throw ValidationError("background_max must lie in [0, 1]");
  if (tokens_per_sentence == 0) throw ValidationError("tokens_per_sentence must be positive");
  for (const auto& p : planted) {
    if (p.languages.empty()) throw ValidationError("planted set lists no languages");
    for (const auto& l : p.languages)
      if (!known.count(l)) throw ValidationError("planted set names unknown language '" + l + "'");
    if (!(p.frequency >= 0.0 && p.frequency <= 1.0))
      throw ValidationError("planted frequency must lie in [0, 1]");
    for (const auto& id : p.neurons)
      if (id.layer >= geometry.num_layers || id.index >= geometry.neurons_per_layer)
        throw ValidationError("planted neuron (" + std::to_string(id.layer) + ", " +
                              std::to_string(id.index) + ") is outside the geometry");
  }
  for (const auto& [lang, c] : couplings) {
    if (!known.count(lang)) throw ValidationError("coupling for unknown language '" + lang + "'");
    if (!(c >= 0.0 && c <= 1.0)) throw ValidationError("coupling must lie in [0, 1]");
  }
  if (probe) {
    if (!known.count(probe->source) || !known.count(probe->target) || probe->source == probe->target)
      throw ValidationError("probe pair must name two distinct known languages");
    if (probe->d == 0 || probe->tokens_per_stimulus == 0)
      throw ValidationError("probe plan needs d >= 1 and tokens_per_stimulus >= 1");
    if (!couplings.empty()) {
      const bool has_overlap = std::any_of(planted.begin(), planted.end(), [&](const PlantedSet& p) {
        return same_languages(p.languages, {probe->source, probe->target});
      });
      if (!has_overlap)
        throw ValidationError("couplings need a planted overlap set for the probe pair");
    }
  }
}

SyntheticDumps generate_synthetic(const SynthSpec& spec, std::size_t tokens_per_language) {
  spec.validate();
  if (tokens_per_language == 0) throw ValidationError("tokens_per_language must be positive");
  const auto& g = spec.geometry;
  const auto n = g.neurons_per_layer;
  Rng rng(spec.noise_seed);

  std::vector<double> background(g.total());
  for (auto& b : background) b = rng.uniform() * spec.background_max;

  DumpHeader header{kDumpVersion, spec.model, g, std::string(kCapturePoint)};
  SyntheticDumps out{{header, {}}, std::nullopt};

  // Corpus tokens: each neuron fires with its planted frequency for the
  // languages it was planted for and its background rate otherwise.
  for (const auto& lang : spec.languages) {
    std::vector<double> rate = background;
    for (const auto& p : spec.planted) {
      if (std::find(p.languages.begin(), p.languages.end(), lang.code()) == p.languages.end())
        continue;
      for (const auto& id : p.neurons) rate[flat(g, id)] = p.frequency;
    }
    for (std::size_t t = 0; t < tokens_per_language; ++t) {
      const auto stim = static_cast<std::int64_t>(t / spec.tokens_per_sentence);
      const auto pos = static_cast<std::int64_t>(t % spec.tokens_per_sentence);
      for (std::size_t l = 0; l < g.num_layers; ++l) {
        ActivationRecord r{lang.code(), stim, pos, static_cast<std::uint32_t>(l), TokenPart::answer,
                           std::vector<double>(n)};
        for (std::size_t j = 0; j < n; ++j) {
          const bool fires = rng.uniform() < rate[l * n + j];
          const double mag = std::abs(rng.normal());
          r.values[j] = fires ? 0.05 + mag : -0.05 * mag;
        }
        out.corpus.records.push_back(std::move(r));
      }
    }
  }

  if (!spec.probe) return out;
  const auto& plan = *spec.probe;

  // Role of each neuron in probe stimuli: -1 background, 0 overlap signal,
  // k > 0 bridge-specific with coupling couplings_by_role[k].
  std::vector<int> role(g.total(), -1);
  std::vector<double> coupling_of_role{0.0};
  for (const auto& p : spec.planted) {
    if (same_languages(p.languages, {plan.source, plan.target}))
      for (const auto& id : p.neurons) role[flat(g, id)] = 0;
  }
  for (const auto& p : spec.planted) {
    if (p.languages.size() != 1) continue;
    const auto it = spec.couplings.find(p.languages.front());
    if (it == spec.couplings.end()) continue;
    coupling_of_role.push_back(it->second);
    const int r = static_cast<int>(coupling_of_role.size() - 1);
    for (const auto& id : p.neurons)
      if (role[flat(g, id)] == -1) role[flat(g, id)] = r;
  }
  std::vector<double> weight(g.total());
  for (auto& w : weight) w = 0.5 + rng.uniform();

  Dump probe{header, {}};
  for (std::size_t s = 0; s < 2 * plan.d; ++s) {
    const auto& lang = s < plan.d ? plan.source : plan.target;
    const double signal = rng.normal();
    for (std::size_t t = 0; t < plan.tokens_per_stimulus; ++t) {
      for (std::size_t l = 0; l < g.num_layers; ++l) {
        ActivationRecord r{lang, static_cast<std::int64_t>(s), static_cast<std::int64_t>(t),
                           static_cast<std::uint32_t>(l), TokenPart::answer, std::vector<double>(n)};
        for (std::size_t j = 0; j < n; ++j) {
          const auto k = l * n + j;
          const double noise = rng.normal();
          const double carried = 1.0 + weight[k] * signal;
          if (role[k] == -1) {
            r.values[j] = 0.5 * noise;
          } else if (role[k] == 0) {
            r.values[j] = carried;
          } else {
            const double c = coupling_of_role[static_cast<std::size_t>(role[k])];
            r.values[j] = c * carried + (1.0 - c) * (1.0 + weight[k] * noise);
          }
        }
        probe.records.push_back(std::move(r));
      }
    }
  }
  out.probe = std::move(probe);
  return out;
}

SynthSpec bridge_scenario(ModelGeometry geometry, const std::string& source,
                          const std::string& target, const std::map<std::string, double>& couplings,
                          const std::vector<std::uint32_t>& layers, std::size_t per_layer,
                          std::size_t d, std::uint64_t seed, double frequency) {
  geometry.validate();
  const auto blocks = 1 + couplings.size();
  if (per_layer == 0 || per_layer * blocks > geometry.neurons_per_layer)
    throw ValidationError("planted layout does not fit in " +
                          std::to_string(geometry.neurons_per_layer) + " neurons per layer");

  SynthSpec spec;
  spec.geometry = geometry;
  spec.noise_seed = seed;
  spec.couplings = couplings;
  spec.probe = ProbePlan{source, target, d, 1};
  spec.languages.emplace_back(source, "synthetic");
  spec.languages.emplace_back(target, "synthetic");
  for (const auto& [lang, c] : couplings) spec.languages.emplace_back(lang, "synthetic");

  PlantedSet overlap{{source, target}, {}, frequency};
  std::vector<PlantedSet> specific;
  for (const auto& [lang, c] : couplings) specific.push_back({{lang}, {}, frequency});

  // Planted positions are scattered so that index order carries no signal.
  Rng rng(seed ^ 0x9e3779b97f4a7c15ULL);
  for (auto layer : layers) {
    if (layer >= geometry.num_layers) throw ValidationError("planted layer outside geometry");
    std::vector<std::uint32_t> perm(geometry.neurons_per_layer);
    std::iota(perm.begin(), perm.end(), 0u);
    for (std::size_t i = perm.size() - 1; i > 0; --i)
      std::swap(perm[i], perm[rng.bits() % (i + 1)]);
    std::size_t next = 0;
    for (std::size_t k = 0; k < per_layer; ++k) overlap.neurons.push_back({layer, perm[next++]});
    for (auto& s : specific)
      for (std::size_t k = 0; k < per_layer; ++k) s.neurons.push_back({layer, perm[next++]});
  }
  spec.planted.push_back(std::move(overlap));
  for (auto& s : specific) spec.planted.push_back(std::move(s));
  return spec;
}

}  // namespace bridgex::activations
