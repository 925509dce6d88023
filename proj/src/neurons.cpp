#include "bridgex/neurons.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <tuple>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::neurons {

using activations::FrequencyProfile;

SelectionMode parse_selection_mode(std::string_view text) {
  const auto t = text::trim(text);
  if (t == "global") return SelectionMode::global;
  if (t == "per_layer") return SelectionMode::per_layer;
  throw ConfigError("unknown selection mode '" + std::string(t) + "'");
}

std::string_view to_string(SelectionMode mode) {
  return mode == SelectionMode::global ? "global" : "per_layer";
}

std::size_t selection_budget(double tau, std::size_t count) {
  if (!(tau > 0.0 && tau <= 1.0)) throw ValidationError("tau must lie in (0, 1]");
  const double exact = tau * static_cast<double>(count);
  const auto k = static_cast<std::size_t>(std::floor(exact + 0.5 + 1e-9));
  return std::min(k, count);
}

namespace {

struct Candidate {
  double freq;
  std::uint32_t layer;
  std::uint32_t index;
};

// Higher frequency first, then lower (layer, index).
bool ranks_before(const Candidate& a, const Candidate& b) {
  if (a.freq != b.freq) return a.freq > b.freq;
  return std::tie(a.layer, a.index) < std::tie(b.layer, b.index);
}

void take_top(std::vector<Candidate>& pool, std::size_t k, NeuronSet& out) {
  k = std::min(k, pool.size());
  std::partial_sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(k), pool.end(),
                    ranks_before);
  for (std::size_t i = 0; i < k; ++i) out.insert({pool[i].layer, pool[i].index});
}

void require_same_geometry(const ModelGeometry& a, const ModelGeometry& b) {
  if (!(a == b)) throw ConfigError("frequency profiles and neuron sets differ in geometry");
}

}  // namespace

NeuronSet identify_language_neurons(const FrequencyProfile& profile, double tau, SelectionMode mode) {
  const auto& g = profile.geometry;
  g.validate();
  NeuronSet out(g, {profile.language}, tau);
  out.set_mode(std::string(to_string(mode)));
  // Validates tau even when the profile is degenerate.
  const auto global_budget = selection_budget(tau, g.total());

  if (std::all_of(profile.freq.begin(), profile.freq.end(), [](double f) { return f == 0.0; })) {
    out.set_flagged_empty(true);
    return out;
  }

  const auto n = g.neurons_per_layer;
  if (mode == SelectionMode::global) {
    std::vector<Candidate> pool;
    pool.reserve(g.total());
    for (std::uint32_t l = 0; l < g.num_layers; ++l)
      for (std::uint32_t j = 0; j < n; ++j) pool.push_back({profile.freq[l * n + j], l, j});
    take_top(pool, global_budget, out);
  } else {
    const auto budget = selection_budget(tau, n);
    for (std::uint32_t l = 0; l < g.num_layers; ++l) {
      std::vector<Candidate> pool;
      pool.reserve(n);
      for (std::uint32_t j = 0; j < n; ++j) pool.push_back({profile.freq[l * n + j], l, j});
      take_top(pool, budget, out);
    }
  }
  return out;
}

NeuronSet overlap_set(const NeuronSet& a, const NeuronSet& b) {
  auto out = set_intersection(a, b);
  std::vector<std::string> langs = a.languages();
  for (const auto& l : b.languages())
    if (std::find(langs.begin(), langs.end(), l) == langs.end()) langs.push_back(l);
  out.set_languages(std::move(langs));
  out.set_tau(a.tau() == b.tau() ? a.tau() : std::nullopt);
  out.set_mode(a.mode() == b.mode() ? a.mode() : std::string());
  return out;
}

double overlap_similarity(const FrequencyProfile& fa, const FrequencyProfile& fb,
                          const NeuronSet& overlap) {
  require_same_geometry(fa.geometry, overlap.geometry());
  require_same_geometry(fb.geometry, overlap.geometry());
  if (overlap.empty())
    throw UndefinedError("similarity of " + fa.language + " and " + fb.language +
                         " is undefined: no overlap neurons");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (const auto& id : overlap.ids()) {
    const double a = fa.at(id);
    const double b = fb.at(id);
    dot += a * b;
    na += a * a;
    nb += b * b;
  }
  if (na == 0.0 || nb == 0.0)
    throw UndefinedError("similarity of " + fa.language + " and " + fb.language +
                         " is undefined: all-zero frequencies on the overlap");
  return std::min(1.0, dot / (std::sqrt(na) * std::sqrt(nb)));
}

namespace {

void check_profiles(const std::vector<FrequencyProfile>& profiles) {
  if (profiles.size() < 2) throw ValidationError("need at least two languages");
  std::set<std::string> seen;
  for (const auto& p : profiles) {
    require_same_geometry(p.geometry, profiles.front().geometry);
    if (!seen.insert(p.language).second)
      throw ValidationError("language '" + p.language + "' given twice");
  }
}

}  // namespace

SpectrumResult spectrum(const std::vector<FrequencyProfile>& profiles, double tau,
                        SelectionMode mode) {
  check_profiles(profiles);
  std::vector<std::string> langs;
  for (const auto& p : profiles) langs.push_back(p.language);
  SpectrumResult result{SpectrumMatrix(langs), {}, tau, mode};

  std::vector<NeuronSet> sets;
  for (const auto& p : profiles) {
    sets.push_back(identify_language_neurons(p, tau, mode));
    result.sets.emplace(p.language, sets.back());
  }
  for (std::size_t i = 0; i < profiles.size(); ++i) {
    for (std::size_t j = i + 1; j < profiles.size(); ++j) {
      std::optional<double> cell;
      try {
        cell = overlap_similarity(profiles[i], profiles[j], overlap_set(sets[i], sets[j]));
      } catch (const UndefinedError&) {
      }
      result.matrix.set(i, j, cell);
    }
  }
  return result;
}

double iou_score(const NeuronSet& a, const NeuronSet& b) {
  const auto inter = set_intersection(a, b).size();
  const auto uni = set_union(a, b).size();
  if (uni == 0) throw UndefinedError("IoU of two empty neuron sets is undefined");
  return static_cast<double>(inter) / static_cast<double>(uni);
}

LapeScores lape_scores(const std::vector<FrequencyProfile>& profiles) {
  check_profiles(profiles);
  const auto& g = profiles.front().geometry;
  const auto nl = profiles.size();
  LapeScores out;
  out.geometry = g;
  for (const auto& p : profiles) out.languages.push_back(p.language);
  out.score.resize(g.total());
  out.share.assign(g.total() * nl, 0.0);

  for (std::size_t k = 0; k < g.total(); ++k) {
    double total = 0.0;
    for (const auto& p : profiles) total += p.freq[k];
    if (total <= 0.0) continue;
    double entropy = 0.0;
    for (std::size_t li = 0; li < nl; ++li) {
      const double q = profiles[li].freq[k] / total;
      out.share[k * nl + li] = q;
      if (q > 0.0) entropy -= q * std::log(q);
    }
    out.score[k] = -entropy;
  }
  return out;
}

std::map<std::string, NeuronSet> lape_neuron_sets(const LapeScores& scores, double tau) {
  const auto& g = scores.geometry;
  const auto nl = scores.languages.size();
  const auto budget = selection_budget(tau, g.total());
  const double uniform = 1.0 / static_cast<double>(nl);
  std::map<std::string, NeuronSet> out;
  for (std::size_t li = 0; li < nl; ++li) {
    std::vector<Candidate> pool;
    for (std::size_t k = 0; k < g.total(); ++k) {
      if (!scores.score[k] || scores.share_of(k, li) <= uniform) continue;
      pool.push_back({*scores.score[k], static_cast<std::uint32_t>(k / g.neurons_per_layer),
                      static_cast<std::uint32_t>(k % g.neurons_per_layer)});
    }
    NeuronSet set(g, {scores.languages[li]}, tau);
    set.set_mode("lape");
    take_top(pool, budget, set);
    out.emplace(scores.languages[li], std::move(set));
  }
  return out;
}

std::vector<std::size_t> overlap_layer_distribution(const NeuronSet& set) {
  std::vector<std::size_t> counts(set.geometry().num_layers, 0);
  for (std::size_t l = 0; l < counts.size(); ++l) counts[l] = set.layer(l).size();
  return counts;
}

namespace {

void check_candidates(const std::string& source, const std::string& target,
                      const std::vector<std::string>& candidates) {
  if (candidates.empty()) throw SelectionError("no candidate bridge languages");
  for (const auto& c : candidates)
    if (c == source || c == target)
      throw ValidationError("candidate '" + c + "' is an endpoint of the pair");
}

BaselineChoice pick(std::map<std::string, double> scores) {
  BaselineChoice choice{{}, std::move(scores)};
  double best = -1.0;
  for (const auto& [lang, s] : choice.scores)  // map order = code order, so ties keep the smaller code
    if (choice.selected.empty() || s > best) {
      best = s;
      choice.selected = lang;
    }
  return choice;
}

// Undefined similarities (empty overlap or union) contribute zero to a
// baseline average.
template <typename F>
double or_zero(F&& f) {
  try {
    return f();
  } catch (const UndefinedError&) {
    return 0.0;
  }
}

}  // namespace

BaselineChoice select_bridge_iou(const std::map<std::string, NeuronSet>& sets,
                                 const std::string& source, const std::string& target,
                                 const std::vector<std::string>& candidates) {
  check_candidates(source, target, candidates);
  auto get = [&](const std::string& code) -> const NeuronSet& {
    const auto it = sets.find(code);
    if (it == sets.end()) throw LookupError("no neuron set for '" + code + "'");
    return it->second;
  };
  std::map<std::string, double> scores;
  for (const auto& c : candidates) {
    const double a = or_zero([&] { return iou_score(get(c), get(source)); });
    const double b = or_zero([&] { return iou_score(get(c), get(target)); });
    scores[c] = 0.5 * (a + b);
  }
  return pick(std::move(scores));
}

BaselineChoice select_bridge_lape_overlap(const std::vector<FrequencyProfile>& profiles, double tau,
                                          const std::string& source, const std::string& target,
                                          const std::vector<std::string>& candidates) {
  check_candidates(source, target, candidates);
  const auto sets = lape_neuron_sets(lape_scores(profiles), tau);
  auto profile = [&](const std::string& code) -> const FrequencyProfile& {
    for (const auto& p : profiles)
      if (p.language == code) return p;
    throw LookupError("no frequency profile for '" + code + "'");
  };
  auto sim = [&](const std::string& x, const std::string& y) {
    return or_zero(
        [&] { return overlap_similarity(profile(x), profile(y), overlap_set(sets.at(x), sets.at(y))); });
  };
  std::map<std::string, double> scores;
  for (const auto& c : candidates) {
    profile(c);
    scores[c] = 0.5 * (sim(c, source) + sim(c, target));
  }
  return pick(std::move(scores));
}

// -- files ------------------------------------------------------------------

std::string serialize_neuron_set(const NeuronSet& set) {
  text::Header h;
  h.magic = "bridgex-neurons";
  std::string langs;
  for (const auto& l : set.languages()) langs += (langs.empty() ? "" : ",") + l;
  h.fields["languages"] = langs;
  h.fields["tau"] = set.tau() ? text::format_double(*set.tau()) : "none";
  h.fields["num_layers"] = std::to_string(set.geometry().num_layers);
  h.fields["neurons_per_layer"] = std::to_string(set.geometry().neurons_per_layer);
  h.fields["mode"] = set.mode().empty() ? "none" : set.mode();
  h.fields["flagged_empty"] = set.flagged_empty() ? "true" : "false";
  std::string out = text::format_header(h) + "\n";
  for (const auto& id : set.ids())
    out += std::to_string(id.layer) + " " + std::to_string(id.index) + "\n";
  return out;
}

NeuronSet parse_neuron_set(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty neuron set file");
  const auto h = text::parse_header(line, "bridgex-neurons");
  ModelGeometry g{text::parse_size(h.require("num_layers"), "num_layers"),
                  text::parse_size(h.require("neurons_per_layer"), "neurons_per_layer")};
  g.validate();
  std::vector<std::string> langs;
  if (const auto& l = h.require("languages"); !l.empty())
    for (auto part : text::split(l, ',')) langs.emplace_back(part);
  std::optional<double> tau;
  if (const auto& t = h.require("tau"); t != "none") tau = text::parse_double(t, "tau");
  NeuronSet set(g, std::move(langs), tau);
  if (const auto m = h.get("mode", "none"); m != "none") set.set_mode(m);
  set.set_flagged_empty(h.get("flagged_empty", "false") == "true");

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty()) continue;
    const auto f = text::split_whitespace(body);
    if (f.size() != 2) throw ParseError("neuron set line " + std::to_string(line_no) + ": expected 'layer index'", line_no);
    const auto layer = text::parse_size(f[0], "layer");
    const auto index = text::parse_size(f[1], "index");
    set.insert({static_cast<std::uint32_t>(layer), static_cast<std::uint32_t>(index)});
  }
  return set;
}

NeuronSet read_neuron_set(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open neuron set '" + path.string() + "'");
  return parse_neuron_set(in);
}

}  // namespace bridgex::neurons
