#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bridgex/activations.hpp"
#include "bridgex/analysis.hpp"
#include "bridgex/bridge.hpp"
#include "bridgex/evalharness.hpp"
#include "bridgex/genealogy.hpp"
#include "bridgex/language.hpp"
#include "bridgex/neurons.hpp"

namespace bridgex::config {

/// Raw "section.key" -> value pairs, in the order they should be hashed.
using RawConfig = std::map<std::string, std::string>;

/// Reads an INI file ("key = value" under "[section]", ';' or '#' comments).
RawConfig parse_ini(const std::string& content);
RawConfig read_ini(const std::filesystem::path& path);

struct SynthConfig {
  std::size_t layers = 4;
  std::size_t neurons = 64;
  std::size_t d = 20;
  std::size_t tokens = 200;     // corpus tokens per language
  std::size_t per_layer = 3;    // planted neurons per layer and planted set
  double frequency = 0.9;
  std::string planted;          // candidate coupled to the overlap (coupling 1)
  std::vector<std::string> distractors;  // coupling 0
};

struct RunConfig {
  std::filesystem::path base_dir;  // relative paths resolve against this
  RawConfig raw;                   // effective values after overrides

  // [paths]
  std::filesystem::path output_dir = "out";
  std::vector<std::filesystem::path> dumps;
  std::optional<std::filesystem::path> probe_dump;
  std::optional<std::filesystem::path> profiles;  // directory; defaults to <output_dir>/profiles
  std::optional<std::filesystem::path> embeddings;
  std::vector<std::filesystem::path> trees;
  std::optional<std::filesystem::path> code_table;
  std::optional<std::filesystem::path> templates;
  std::optional<std::filesystem::path> dictionary;
  std::optional<std::filesystem::path> dict_source_pivot;
  std::optional<std::filesystem::path> dict_target_pivot;
  std::optional<std::filesystem::path> verified;
  std::vector<std::filesystem::path> predictions;
  std::optional<std::filesystem::path> table;

  // [neurons]
  double tau = neurons::kDefaultTau;
  neurons::SelectionMode mode = neurons::SelectionMode::global;
  activations::TokenScope scope = activations::TokenScope::all;

  // [pair]
  std::string source;
  std::string target;

  // [bridge]
  std::vector<std::string> candidates;
  bool candidates_given = false;
  bridge::Kernel kernel = bridge::Kernel::rbf_median;
  std::optional<std::size_t> pool_target;
  std::string layer_window = "all";  // "all", "auto" or "lo-hi"
  std::pair<std::string, std::string> window_labels;
  double stable_delta = 0.05;
  std::size_t d = corpus_default_d;
  activations::Reduction reduction = activations::Reduction::mean_over_tokens;
  activations::TokenScope probe_scope = activations::TokenScope::all;

  // [languages]
  std::vector<LanguageTag> roster;

  // [genealogy]
  genealogy::FamilyNorms norms = genealogy::FamilyNorms::defaults();

  // [probes]
  std::string pivot = "en";
  std::string task = "probe_translation";
  std::optional<std::string> probe_bridge;
  std::size_t probe_d = corpus_default_d;

  // [mds]
  analysis::Metric metric = analysis::Metric::cosine_distance;

  // [eval]
  eval::NormalizerConfig normalizer;
  std::size_t n = 1;
  std::vector<std::string> labels{"A", "B", "C", "D"};

  // [synth]
  SynthConfig synth;

  // [seeds]
  std::uint64_t seed = 0;

  static constexpr std::size_t corpus_default_d = 100;

  /// FNV-1a over every effective key except paths.output_dir.
  std::string hash() const;
};

/// Precedence for the output directory: flag, then BRIDGEX_OUTPUT_DIR, then
/// the config file. Every other override comes from `overrides`
/// ("section.key" -> value) and beats the file. Throws
/// ConfigValidationError listing every problem found.
RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::optional<std::string>& output_dir_flag = std::nullopt);

/// Builds a RunConfig from raw values alone (no file, no environment).
RunConfig from_raw(RawConfig raw, std::filesystem::path base_dir);

/// Inputs a subcommand needs; returns one message per problem.
std::vector<std::string> check_inputs(const RunConfig& cfg, const std::string& command);

}  // namespace bridgex::config
