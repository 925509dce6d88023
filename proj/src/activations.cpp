#include "bridgex/activations.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <limits>
#include <sstream>

#include "bridgex/error.hpp"
#include "bridgex/language.hpp"
#include "bridgex/text.hpp"

namespace bridgex::activations {

TokenScope parse_token_scope(std::string_view text) {
  const auto t = text::trim(text);
  if (t == "all") return TokenScope::all;
  if (t == "answer_only") return TokenScope::answer_only;
  throw ConfigError("unknown token scope '" + std::string(t) + "'");
}

Reduction parse_reduction(std::string_view text) {
  const auto t = text::trim(text);
  if (t == "mean_over_tokens") return Reduction::mean_over_tokens;
  if (t == "last_token") return Reduction::last_token;
  throw ConfigError("unknown reduction '" + std::string(t) + "'");
}

namespace {

bool in_scope(TokenScope scope, TokenPart part) {
  return scope == TokenScope::all || part == TokenPart::answer;
}

std::string_view part_name(TokenPart p) { return p == TokenPart::prompt ? "prompt" : "answer"; }

[[noreturn]] void bad_record(std::size_t index, const std::string& why) {
  throw FormatError("record " + std::to_string(index) + ": " + why);
}

}  // namespace

// -- reader / writer ----------------------------------------------------------

DumpReader::DumpReader(const std::filesystem::path& path) {
  auto in = std::make_unique<std::ifstream>(path);
  if (!*in) throw IoError("cannot open dump '" + path.string() + "'");
  in_ = std::move(in);
  read_header();
}

DumpReader::DumpReader(std::unique_ptr<std::istream> in) : in_(std::move(in)) { read_header(); }

void DumpReader::read_header() {
  std::string line;
  while (std::getline(*in_, line) && text::trim(line).empty()) {
  }
  if (text::trim(line).empty()) throw FormatError("dump is missing its header line");
  const auto h = text::parse_header(line, kDumpMagic);
  header_.version = static_cast<int>(text::parse_int(h.require("version"), "version"));
  if (header_.version != kDumpVersion)
    throw FormatError("unsupported dump version " + std::to_string(header_.version));
  header_.model = h.require("model");
  header_.activation = h.require("activation");
  header_.geometry.num_layers = text::parse_size(h.require("num_layers"), "num_layers");
  header_.geometry.neurons_per_layer =
      text::parse_size(h.require("neurons_per_layer"), "neurons_per_layer");
  if (header_.geometry.num_layers == 0 || header_.geometry.neurons_per_layer == 0)
    throw FormatError("dump header declares an empty geometry");
}

std::optional<ActivationRecord> DumpReader::next() {
  while (std::getline(*in_, line_)) {
    std::string_view body = line_;
    if (!body.empty() && body.back() == '\r') body.remove_suffix(1);
    if (text::trim(body).empty()) continue;
    if (body.front() == '#') bad_record(count_, "unexpected second header line");

    const auto index = count_;
    const auto fields = text::split(body, '\t');
    if (fields.size() != 6)
      bad_record(index, "expected 6 tab-separated fields, got " + std::to_string(fields.size()));

    ActivationRecord r;
    r.language = std::string(fields[0]);
    if (!is_valid_language_code(r.language)) bad_record(index, "invalid language '" + r.language + "'");
    try {
      r.stimulus_id = text::parse_int(fields[1], "stimulus_id");
      r.token_position = text::parse_int(fields[2], "token_pos");
      const auto layer = text::parse_size(fields[3], "layer");
      if (layer >= header_.geometry.num_layers)
        bad_record(index, "layer " + std::to_string(layer) + " outside geometry");
      r.layer = static_cast<std::uint32_t>(layer);
    } catch (const FormatError& e) {
      if (text::starts_with(e.what(), "record ")) throw;
      bad_record(index, e.what());
    }
    if (fields[4] == "prompt")
      r.part = TokenPart::prompt;
    else if (fields[4] == "answer")
      r.part = TokenPart::answer;
    else
      bad_record(index, "unknown token part '" + std::string(fields[4]) + "'");

    const auto n = header_.geometry.neurons_per_layer;
    r.values.reserve(n);
    const char* p = fields[5].data();
    const char* end = p + fields[5].size();
    while (p < end) {
      while (p < end && *p == ' ') ++p;
      if (p == end) break;
      double v = 0.0;
      const auto res = std::from_chars(p, end, v);
      if (res.ec != std::errc{}) bad_record(index, "malformed activation value");
      if (!std::isfinite(v)) bad_record(index, "non-finite activation value");
      r.values.push_back(v);
      p = res.ptr;
      if (p < end && *p != ' ') bad_record(index, "malformed activation value");
    }
    if (r.values.size() != n)
      bad_record(index, "expected " + std::to_string(n) + " values, got " +
                            std::to_string(r.values.size()));
    ++count_;
    return r;
  }
  return std::nullopt;
}

Dump read_dump(const std::filesystem::path& path) {
  DumpReader reader(path);
  Dump dump{reader.header(), {}};
  while (auto r = reader.next()) dump.records.push_back(std::move(*r));
  return dump;
}

Dump read_dump(std::istream& in) {
  // The reader owns its stream; copy the remaining content.
  std::ostringstream ss;
  ss << in.rdbuf();
  DumpReader reader(std::make_unique<std::istringstream>(ss.str()));
  Dump dump{reader.header(), {}};
  while (auto r = reader.next()) dump.records.push_back(std::move(*r));
  return dump;
}

DumpWriter::DumpWriter(std::ostream& out, const DumpHeader& header)
    : out_(out), geometry_(header.geometry) {
  geometry_.validate();
  text::Header h;
  h.magic = std::string(kDumpMagic);
  h.fields["version"] = std::to_string(header.version);
  h.fields["model"] = header.model;
  h.fields["num_layers"] = std::to_string(header.geometry.num_layers);
  h.fields["neurons_per_layer"] = std::to_string(header.geometry.neurons_per_layer);
  h.fields["activation"] = header.activation;
  out_ << text::format_header(h) << '\n';
}

void DumpWriter::write(const ActivationRecord& r) {
  if (r.values.size() != geometry_.neurons_per_layer)
    throw FormatError("record has " + std::to_string(r.values.size()) + " values, geometry needs " +
                      std::to_string(geometry_.neurons_per_layer));
  if (r.layer >= geometry_.num_layers) throw FormatError("record layer outside geometry");
  std::string line;
  line.reserve(16 + r.values.size() * 12);
  line += r.language;
  line += '\t';
  line += std::to_string(r.stimulus_id);
  line += '\t';
  line += std::to_string(r.token_position);
  line += '\t';
  line += std::to_string(r.layer);
  line += '\t';
  line += part_name(r.part);
  line += '\t';
  for (std::size_t j = 0; j < r.values.size(); ++j) {
    if (j) line += ' ';
    line += text::format_double(r.values[j]);
  }
  line += '\n';
  out_ << line;
}

void write_dump(std::ostream& out, const Dump& dump) {
  DumpWriter w(out, dump.header);
  for (const auto& r : dump.records) w.write(r);
}

void write_dump(const std::filesystem::path& path, const Dump& dump) {
  std::ostringstream ss;
  write_dump(ss, dump);
  text::write_file(path, ss.str());
}

// -- frequencies ----------------------------------------------------------------

FrequencyCounter::FrequencyCounter(std::string language, ModelGeometry geometry, TokenScope scope)
    : language_(std::move(language)),
      geometry_(geometry),
      scope_(scope),
      active_(geometry.total(), 0) {}

void FrequencyCounter::add(const ActivationRecord& r) {
  if (r.language != language_ || !in_scope(scope_, r.part)) return;
  if (r.values.size() != geometry_.neurons_per_layer || r.layer >= geometry_.num_layers)
    throw FormatError("record does not match the counter geometry");
  if (!seen_.emplace(r.stimulus_id, r.token_position, r.layer).second)
    throw FormatError("duplicate record for stimulus " + std::to_string(r.stimulus_id) +
                      ", token " + std::to_string(r.token_position) + ", layer " +
                      std::to_string(r.layer));
  tokens_.emplace(r.stimulus_id, r.token_position);
  auto* row = active_.data() + r.layer * geometry_.neurons_per_layer;
  for (std::size_t j = 0; j < r.values.size(); ++j)
    if (r.values[j] > 0.0) ++row[j];
}

void FrequencyCounter::merge(const FrequencyCounter& other) {
  if (other.language_ != language_ || !(other.geometry_ == geometry_) || other.scope_ != scope_)
    throw ConfigError("cannot merge frequency counters of different languages or geometries");
  for (const auto& key : other.seen_)
    if (!seen_.insert(key).second)
      throw FormatError("duplicate record across merged partitions");
  tokens_.insert(other.tokens_.begin(), other.tokens_.end());
  for (std::size_t i = 0; i < active_.size(); ++i) active_[i] += other.active_[i];
}

FrequencyProfile FrequencyCounter::finish() const {
  if (tokens_.empty())
    throw InsufficientDataError("no activation records for language '" + language_ + "'", 1);
  FrequencyProfile p{language_, geometry_, std::vector<double>(active_.size()), tokens_.size()};
  const auto denom = static_cast<double>(tokens_.size());
  for (std::size_t i = 0; i < active_.size(); ++i)
    p.freq[i] = static_cast<double>(active_[i]) / denom;
  return p;
}

FrequencyProfile build_frequency_profile(const std::vector<ActivationRecord>& records,
                                         const ModelGeometry& geometry,
                                         const std::string& language, TokenScope scope) {
  FrequencyCounter counter(language, geometry, scope);
  for (const auto& r : records) counter.add(r);
  return counter.finish();
}

std::map<std::string, FrequencyProfile> build_frequency_profiles(DumpReader& reader,
                                                                 TokenScope scope) {
  std::map<std::string, FrequencyCounter> counters;
  const auto geometry = reader.header().geometry;
  while (auto r = reader.next()) {
    auto it = counters.find(r->language);
    if (it == counters.end()) it = counters.emplace(r->language, FrequencyCounter(r->language, geometry, scope)).first;
    it->second.add(*r);
  }
  std::map<std::string, FrequencyProfile> out;
  for (const auto& [lang, counter] : counters) {
    try {
      out.emplace(lang, counter.finish());
    } catch (const InsufficientDataError&) {
      // Language only present outside the token scope.
    }
  }
  return out;
}

std::string serialize_profile(const FrequencyProfile& profile) {
  text::Header h;
  h.magic = "bridgex-frequency";
  h.fields["language"] = profile.language;
  h.fields["num_layers"] = std::to_string(profile.geometry.num_layers);
  h.fields["neurons_per_layer"] = std::to_string(profile.geometry.neurons_per_layer);
  h.fields["token_count"] = std::to_string(profile.token_count);
  std::string out = text::format_header(h) + "\n";
  const auto n = profile.geometry.neurons_per_layer;
  for (std::size_t l = 0; l < profile.geometry.num_layers; ++l) {
    for (std::size_t j = 0; j < n; ++j) {
      if (j) out += ' ';
      out += text::format_double(profile.freq[l * n + j]);
    }
    out += '\n';
  }
  return out;
}

FrequencyProfile parse_profile(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw FormatError("empty frequency profile");
  const auto h = text::parse_header(line, "bridgex-frequency");
  FrequencyProfile p;
  p.language = h.require("language");
  p.geometry.num_layers = text::parse_size(h.require("num_layers"), "num_layers");
  p.geometry.neurons_per_layer = text::parse_size(h.require("neurons_per_layer"), "neurons_per_layer");
  p.geometry.validate();
  p.token_count = text::parse_size(h.require("token_count"), "token_count");
  if (p.token_count == 0) throw FormatError("frequency profile has zero tokens");
  for (std::size_t l = 0; l < p.geometry.num_layers; ++l) {
    if (!std::getline(in, line)) throw FormatError("frequency profile truncated at layer " + std::to_string(l));
    const auto vals = text::split_whitespace(line);
    if (vals.size() != p.geometry.neurons_per_layer)
      throw FormatError("frequency profile layer " + std::to_string(l) + " has wrong width");
    for (auto v : vals) {
      const auto f = text::parse_double(v, "frequency");
      if (!(f >= 0.0 && f <= 1.0)) throw FormatError("frequency outside [0, 1]");
      p.freq.push_back(f);
    }
  }
  return p;
}

FrequencyProfile read_profile(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open profile '" + path.string() + "'");
  return parse_profile(in);
}

// -- activation matrices ----------------------------------------------------------

ActivationMatrix ActivationMatrix::layer_rows(std::uint32_t layer) const {
  ActivationMatrix out{{}, stimulus_ids, direction_split, {}};
  std::vector<Eigen::Index> keep;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (rows[r].layer == layer) {
      keep.push_back(static_cast<Eigen::Index>(r));
      out.rows.push_back(rows[r]);
    }
  out.values = values(keep, Eigen::all);
  return out;
}

ActivationMatrix ActivationMatrix::select(const NeuronSet& set) const {
  ActivationMatrix out{{}, stimulus_ids, direction_split, {}};
  std::vector<Eigen::Index> keep;
  for (std::size_t r = 0; r < rows.size(); ++r)
    if (set.contains(rows[r])) {
      keep.push_back(static_cast<Eigen::Index>(r));
      out.rows.push_back(rows[r]);
    }
  out.values = values(keep, Eigen::all);
  return out;
}

namespace {

struct StimulusCells {
  std::vector<double> sum;
  std::vector<std::uint32_t> count;
  std::vector<std::int64_t> last_position;
  std::vector<double> last_value;

  explicit StimulusCells(std::size_t rows)
      : sum(rows, 0.0),
        count(rows, 0),
        last_position(rows, std::numeric_limits<std::int64_t>::min()),
        last_value(rows, 0.0) {}
};

}  // namespace

ActivationMatrix build_activation_matrix(const std::vector<ActivationRecord>& records,
                                         const NeuronSet& neurons,
                                         const std::pair<std::string, std::string>& pair,
                                         std::size_t d, Reduction reduction, TokenScope scope) {
  if (pair.first == pair.second) throw ValidationError("language pair has identical sides");
  if (d == 0) throw ValidationError("stimulus count d must be positive");

  const auto ids = neurons.ids();
  const auto& geometry = neurons.geometry();
  // First row of each layer within `ids`.
  std::vector<std::size_t> layer_offset(geometry.num_layers + 1, 0);
  for (const auto& id : ids) ++layer_offset[id.layer + 1];
  for (std::size_t l = 0; l < geometry.num_layers; ++l) layer_offset[l + 1] += layer_offset[l];

  std::map<std::int64_t, StimulusCells> forward;
  std::map<std::int64_t, StimulusCells> backward;
  for (const auto& r : records) {
    if (!in_scope(scope, r.part)) continue;
    auto* side = r.language == pair.first ? &forward : r.language == pair.second ? &backward : nullptr;
    if (side == nullptr || r.layer >= geometry.num_layers) continue;
    const auto& members = neurons.layer(r.layer);
    if (members.empty()) continue;
    if (r.values.size() != geometry.neurons_per_layer)
      throw FormatError("record width does not match the neuron set geometry");
    auto it = side->try_emplace(r.stimulus_id, ids.size()).first;
    auto& cells = it->second;
    for (std::size_t k = 0; k < members.size(); ++k) {
      const auto row = layer_offset[r.layer] + k;
      const double v = r.values[members[k]];
      cells.sum[row] += v;
      ++cells.count[row];
      if (r.token_position >= cells.last_position[row]) {
        cells.last_position[row] = r.token_position;
        cells.last_value[row] = v;
      }
    }
  }

  const auto check = [&](const std::map<std::int64_t, StimulusCells>& side, const std::string& from,
                         const std::string& to) {
    if (side.size() < d)
      throw InsufficientDataError("direction " + from + "->" + to + " has " +
                                      std::to_string(side.size()) + " stimuli, need " +
                                      std::to_string(d),
                                  d - side.size());
  };
  check(forward, pair.first, pair.second);
  check(backward, pair.second, pair.first);

  ActivationMatrix m;
  m.rows = ids;
  m.direction_split = d;
  m.values.resize(static_cast<Eigen::Index>(ids.size()), static_cast<Eigen::Index>(2 * d));
  Eigen::Index col = 0;
  for (const auto* side : {&forward, &backward}) {
    std::size_t taken = 0;
    for (const auto& [stim, cells] : *side) {
      if (taken++ == d) break;
      m.stimulus_ids.push_back(stim);
      for (std::size_t row = 0; row < ids.size(); ++row) {
        if (cells.count[row] == 0)
          throw InsufficientDataError("stimulus " + std::to_string(stim) + " has no records for layer " +
                                      std::to_string(ids[row].layer));
        m.values(static_cast<Eigen::Index>(row), col) =
            reduction == Reduction::mean_over_tokens ? cells.sum[row] / cells.count[row]
                                                     : cells.last_value[row];
      }
      ++col;
    }
  }
  return m;
}

}  // namespace bridgex::activations
