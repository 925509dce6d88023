#pragma once

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <set>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "bridgex/neuron_set.hpp"

// Activation dumps, per-language activation frequencies, and the stimulus
// activation matrices fed to the bridge scorer.
//
// Dump text format (tab separated, one header line then one line per
// (stimulus, token, layer)):
//
//   #bridgex-activations  activation=post-sigma pre-W2  model=<id>
//                         neurons_per_layer=<N>  num_layers=<L>  version=1
//   <lang> <stimulus_id> <token_pos> <layer> <part> <v_0 v_1 ... v_{N-1}>
//
// `part` is "prompt" or "answer"; values are space separated and written in
// shortest round-trip form, so write-then-read is bit exact. For probe dumps
// `lang` is the language of the prompted word, which identifies the
// translation direction of the stimulus.
namespace bridgex::activations {

inline constexpr std::string_view kDumpMagic = "bridgex-activations";
inline constexpr int kDumpVersion = 1;
inline constexpr std::string_view kCapturePoint = "post-sigma pre-W2";

enum class TokenPart { prompt, answer };

/// Which tokens of a stimulus count toward frequencies and matrix cells.
enum class TokenScope { all, answer_only };

TokenScope parse_token_scope(std::string_view text);

struct ActivationRecord {
  std::string language;
  std::int64_t stimulus_id = 0;
  std::int64_t token_position = 0;
  std::uint32_t layer = 0;
  TokenPart part = TokenPart::answer;
  std::vector<double> values;

  friend bool operator==(const ActivationRecord&, const ActivationRecord&) = default;
};

struct DumpHeader {
  int version = kDumpVersion;
  std::string model = "unknown";
  ModelGeometry geometry;
  std::string activation{kCapturePoint};
};

struct Dump {
  DumpHeader header;
  std::vector<ActivationRecord> records;
};

/// Streaming reader. Validates every record against the header geometry.
class DumpReader {
public:
  explicit DumpReader(const std::filesystem::path& path);
  explicit DumpReader(std::unique_ptr<std::istream> in);

  const DumpHeader& header() const noexcept { return header_; }
  /// Next record in file order, or nullopt at end of file. Throws
  /// FormatError naming the 0-based record index on malformed records.
  std::optional<ActivationRecord> next();
  std::size_t records_read() const noexcept { return count_; }

private:
  void read_header();

  std::unique_ptr<std::istream> in_;
  DumpHeader header_;
  std::size_t count_ = 0;
  std::string line_;
};

Dump read_dump(const std::filesystem::path& path);
Dump read_dump(std::istream& in);

class DumpWriter {
public:
  DumpWriter(std::ostream& out, const DumpHeader& header);
  void write(const ActivationRecord& record);

private:
  std::ostream& out_;
  ModelGeometry geometry_;
};

void write_dump(std::ostream& out, const Dump& dump);
void write_dump(const std::filesystem::path& path, const Dump& dump);

// -- frequencies ------------------------------------------------------------

/// f[layer][j] = share of the language's tokens on which neuron j fired (> 0).
struct FrequencyProfile {
  std::string language;
  ModelGeometry geometry;
  std::vector<double> freq;  // layer-major, num_layers * neurons_per_layer
  std::size_t token_count = 0;

  double at(NeuronId id) const { return freq[id.layer * geometry.neurons_per_layer + id.index]; }
  double at(std::size_t layer, std::size_t index) const {
    return freq[layer * geometry.neurons_per_layer + index];
  }
};

/// Incremental activation counter for one language. Partitions of a dump may
/// be counted separately and merged; the result does not depend on order.
class FrequencyCounter {
public:
  FrequencyCounter(std::string language, ModelGeometry geometry,
                   TokenScope scope = TokenScope::all);

  /// Ignores records of other languages or outside the scope.
  void add(const ActivationRecord& record);
  void merge(const FrequencyCounter& other);
  /// Throws InsufficientDataError when no matching token was seen.
  FrequencyProfile finish() const;

private:
  std::string language_;
  ModelGeometry geometry_;
  TokenScope scope_;
  std::vector<std::uint64_t> active_;
  std::set<std::pair<std::int64_t, std::int64_t>> tokens_;
  std::set<std::tuple<std::int64_t, std::int64_t, std::uint32_t>> seen_;
};

FrequencyProfile build_frequency_profile(const std::vector<ActivationRecord>& records,
                                         const ModelGeometry& geometry,
                                         const std::string& language,
                                         TokenScope scope = TokenScope::all);

/// One pass over a dump, one profile per language present (sorted by code).
std::map<std::string, FrequencyProfile> build_frequency_profiles(DumpReader& reader,
                                                                 TokenScope scope = TokenScope::all);

/// "#bridgex-frequency" header then one line of N values per layer.
std::string serialize_profile(const FrequencyProfile& profile);
FrequencyProfile parse_profile(std::istream& in);
FrequencyProfile read_profile(const std::filesystem::path& path);

// -- activation matrices ----------------------------------------------------

enum class Reduction { mean_over_tokens, last_token };

Reduction parse_reduction(std::string_view text);

/// Rows are neurons in (layer, index) order; columns are the 2d probe
/// stimuli, source->target stimuli first.
struct ActivationMatrix {
  std::vector<NeuronId> rows;
  std::vector<std::int64_t> stimulus_ids;
  std::size_t direction_split = 0;
  Eigen::MatrixXd values;

  /// Sub-matrix of the rows belonging to `layer`, in row order.
  ActivationMatrix layer_rows(std::uint32_t layer) const;
  /// Sub-matrix restricted to members of `set`.
  ActivationMatrix select(const NeuronSet& set) const;
};

/// Builds the |neurons| x 2d matrix for the pair. Direction source->target
/// stimuli are those recorded with `lang == pair.first`; the first `d`
/// stimulus ids of each direction are used.
ActivationMatrix build_activation_matrix(const std::vector<ActivationRecord>& records,
                                         const NeuronSet& neurons,
                                         const std::pair<std::string, std::string>& pair,
                                         std::size_t d,
                                         Reduction reduction = Reduction::mean_over_tokens,
                                         TokenScope scope = TokenScope::all);

}  // namespace bridgex::activations
