#include "bridgex/config.hpp"

#include <cstdlib>
#include <functional>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "bridgex/corpus.hpp"
#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::config {

namespace pt = boost::property_tree;

RawConfig parse_ini(const std::string& content) {
  // Boost only understands ';' comments.
  std::string cleaned;
  for (auto line : text::split(content, '\n')) {
    const auto body = text::trim(line);
    if (!body.empty() && body.front() == '#') continue;
    cleaned.append(line);
    cleaned += '\n';
  }
  pt::ptree tree;
  std::istringstream in(cleaned);
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ParseError("config line " + std::to_string(e.line()) + ": " + e.message(), e.line());
  }
  RawConfig raw;
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      raw[section] = text::trim(node.data());
      continue;
    }
    for (const auto& [key, leaf] : node) raw[section + "." + key] = std::string(text::trim(leaf.data()));
  }
  return raw;
}

RawConfig read_ini(const std::filesystem::path& path) { return parse_ini(text::read_file(path)); }

namespace {

std::vector<std::string> list_of(const std::string& v) {
  std::vector<std::string> out;
  for (auto part : text::split(v, ','))
    if (!text::trim(part).empty()) out.emplace_back(text::trim(part));
  return out;
}

bool bool_of(const std::string& v) {
  const auto t = text::to_lower_ascii(v);
  if (t == "1" || t == "true" || t == "yes" || t == "on") return true;
  if (t == "0" || t == "false" || t == "no" || t == "off") return false;
  throw ConfigError("expected a boolean, got '" + v + "'");
}

std::string check_code(const std::string& v) {
  if (!is_valid_language_code(v)) throw ConfigError("invalid language code '" + v + "'");
  return v;
}

struct Parser {
  RunConfig& cfg;
  std::filesystem::path base;

  std::filesystem::path path_of(const std::string& v) const {
    std::string s = v;
    const std::string token = "${output_dir}";
    for (auto pos = s.find(token); pos != std::string::npos; pos = s.find(token))
      s.replace(pos, token.size(), cfg.output_dir.string());
    std::filesystem::path p(s);
    return p.is_absolute() ? p : base / p;
  }
  std::vector<std::filesystem::path> paths_of(const std::string& v) const {
    std::vector<std::filesystem::path> out;
    for (const auto& s : list_of(v)) out.push_back(path_of(s));
    return out;
  }
};

using Setter = std::function<void(Parser&, const std::string&)>;

const std::map<std::string, Setter>& setters() {
  static const std::map<std::string, Setter> table = {
      {"paths.output_dir", [](Parser&, const std::string&) {}},  // resolved before the others
      {"paths.dumps", [](Parser& p, const std::string& v) { p.cfg.dumps = p.paths_of(v); }},
      {"paths.probe_dump", [](Parser& p, const std::string& v) { p.cfg.probe_dump = p.path_of(v); }},
      {"paths.profiles", [](Parser& p, const std::string& v) { p.cfg.profiles = p.path_of(v); }},
      {"paths.embeddings", [](Parser& p, const std::string& v) { p.cfg.embeddings = p.path_of(v); }},
      {"paths.trees", [](Parser& p, const std::string& v) { p.cfg.trees = p.paths_of(v); }},
      {"paths.code_table", [](Parser& p, const std::string& v) { p.cfg.code_table = p.path_of(v); }},
      {"paths.templates", [](Parser& p, const std::string& v) { p.cfg.templates = p.path_of(v); }},
      {"paths.dictionary", [](Parser& p, const std::string& v) { p.cfg.dictionary = p.path_of(v); }},
      {"paths.dict_source_pivot", [](Parser& p, const std::string& v) { p.cfg.dict_source_pivot = p.path_of(v); }},
      {"paths.dict_target_pivot", [](Parser& p, const std::string& v) { p.cfg.dict_target_pivot = p.path_of(v); }},
      {"paths.verified", [](Parser& p, const std::string& v) { p.cfg.verified = p.path_of(v); }},
      {"paths.predictions", [](Parser& p, const std::string& v) { p.cfg.predictions = p.paths_of(v); }},
      {"paths.table", [](Parser& p, const std::string& v) { p.cfg.table = p.path_of(v); }},

      {"neurons.tau", [](Parser& p, const std::string& v) {
         const double t = text::parse_double(v, "tau");
         if (!(t > 0.0 && t <= 1.0)) throw ConfigError("tau must be in (0, 1]");
         p.cfg.tau = t;
       }},
      {"neurons.mode", [](Parser& p, const std::string& v) { p.cfg.mode = neurons::parse_selection_mode(v); }},
      {"neurons.scope", [](Parser& p, const std::string& v) { p.cfg.scope = activations::parse_token_scope(v); }},

      {"pair.source", [](Parser& p, const std::string& v) { p.cfg.source = check_code(v); }},
      {"pair.target", [](Parser& p, const std::string& v) { p.cfg.target = check_code(v); }},

      {"bridge.candidates", [](Parser& p, const std::string& v) {
         p.cfg.candidates.clear();
         for (const auto& c : list_of(v)) p.cfg.candidates.push_back(check_code(c));
         p.cfg.candidates_given = true;
       }},
      {"bridge.kernel", [](Parser& p, const std::string& v) { p.cfg.kernel = bridge::parse_kernel(v); }},
      {"bridge.pool_target", [](Parser& p, const std::string& v) {
         const auto n = text::parse_size(v, "pool_target");
         if (n == 0) throw ConfigError("pool_target must be positive");
         p.cfg.pool_target = n;
       }},
      {"bridge.layer_window", [](Parser& p, const std::string& v) {
         if (v != "all" && v != "auto") (void)bridge::parse_layer_window(v);
         p.cfg.layer_window = v;
       }},
      {"bridge.window_labels", [](Parser& p, const std::string& v) {
         const auto l = list_of(v);
         if (l.size() != 2) throw ConfigError("window_labels needs two labels");
         p.cfg.window_labels = {l[0], l[1]};
       }},
      {"bridge.stable_delta", [](Parser& p, const std::string& v) {
         const double dlt = text::parse_double(v, "stable_delta");
         if (!(dlt >= 0.0)) throw ConfigError("stable_delta must be non-negative");
         p.cfg.stable_delta = dlt;
       }},
      {"bridge.d", [](Parser& p, const std::string& v) {
         p.cfg.d = text::parse_size(v, "d");
         if (p.cfg.d == 0) throw ConfigError("d must be positive");
       }},
      {"bridge.reduction", [](Parser& p, const std::string& v) { p.cfg.reduction = activations::parse_reduction(v); }},
      {"bridge.scope", [](Parser& p, const std::string& v) { p.cfg.probe_scope = activations::parse_token_scope(v); }},

      {"genealogy.norms", [](Parser& p, const std::string& v) {
         for (const auto& item : list_of(v)) {
           const auto colon = item.rfind(':');
           if (colon == std::string::npos) throw ConfigError("norm '" + item + "' must be family:distance");
           p.cfg.norms.set(std::string(text::trim(item.substr(0, colon))),
                           text::parse_double(item.substr(colon + 1), "norm"));
         }
       }},
      {"genealogy.fallback", [](Parser& p, const std::string& v) {
         if (v == "tree_max_distance")
           p.cfg.norms.set_fallback(genealogy::FamilyNorms::Fallback::tree_max_distance);
         else if (v == "none")
           p.cfg.norms.set_fallback(genealogy::FamilyNorms::Fallback::none);
         else
           throw ConfigError("fallback must be tree_max_distance or none");
       }},

      {"probes.pivot", [](Parser& p, const std::string& v) { p.cfg.pivot = check_code(v); }},
      {"probes.task", [](Parser& p, const std::string& v) {
         (void)corpus::parse_task(v);
         p.cfg.task = v;
       }},
      {"probes.bridge", [](Parser& p, const std::string& v) { p.cfg.probe_bridge = check_code(v); }},
      {"probes.d", [](Parser& p, const std::string& v) {
         p.cfg.probe_d = text::parse_size(v, "d");
         if (p.cfg.probe_d == 0) throw ConfigError("d must be positive");
       }},

      {"mds.metric", [](Parser& p, const std::string& v) { p.cfg.metric = analysis::parse_metric(v); }},

      {"eval.n", [](Parser& p, const std::string& v) {
         p.cfg.n = text::parse_size(v, "n");
         if (p.cfg.n == 0) throw ConfigError("n must be at least 1");
       }},
      {"eval.lowercase", [](Parser& p, const std::string& v) { p.cfg.normalizer.lowercase = bool_of(v); }},
      {"eval.strip_punctuation", [](Parser& p, const std::string& v) { p.cfg.normalizer.strip_punctuation = bool_of(v); }},
      {"eval.collapse_whitespace", [](Parser& p, const std::string& v) { p.cfg.normalizer.collapse_whitespace = bool_of(v); }},
      {"eval.fold_diacritics", [](Parser& p, const std::string& v) { p.cfg.normalizer.fold_diacritics = bool_of(v); }},
      {"eval.labels", [](Parser& p, const std::string& v) {
         p.cfg.labels = list_of(v);
         if (p.cfg.labels.empty()) throw ConfigError("labels must not be empty");
       }},

      {"synth.layers", [](Parser& p, const std::string& v) { p.cfg.synth.layers = text::parse_size(v, "layers"); }},
      {"synth.neurons", [](Parser& p, const std::string& v) { p.cfg.synth.neurons = text::parse_size(v, "neurons"); }},
      {"synth.d", [](Parser& p, const std::string& v) { p.cfg.synth.d = text::parse_size(v, "d"); }},
      {"synth.tokens", [](Parser& p, const std::string& v) { p.cfg.synth.tokens = text::parse_size(v, "tokens"); }},
      {"synth.per_layer", [](Parser& p, const std::string& v) { p.cfg.synth.per_layer = text::parse_size(v, "per_layer"); }},
      {"synth.frequency", [](Parser& p, const std::string& v) {
         const double f = text::parse_double(v, "frequency");
         if (!(f > 0.0 && f <= 1.0)) throw ConfigError("frequency must be in (0, 1]");
         p.cfg.synth.frequency = f;
       }},
      {"synth.planted", [](Parser& p, const std::string& v) { p.cfg.synth.planted = check_code(v); }},
      {"synth.distractors", [](Parser& p, const std::string& v) {
         p.cfg.synth.distractors.clear();
         for (const auto& c : list_of(v)) p.cfg.synth.distractors.push_back(check_code(c));
       }},

      {"seeds.seed", [](Parser& p, const std::string& v) {
         p.cfg.seed = static_cast<std::uint64_t>(text::parse_int(v, "seed"));
       }},
  };
  return table;
}

}  // namespace

std::string RunConfig::hash() const {
  std::string blob;
  for (const auto& [k, v] : raw)
    if (k != "paths.output_dir") blob += k + "=" + v + "\n";
  return text::fnv1a_hex(blob);
}

RunConfig from_raw(RawConfig raw, std::filesystem::path base_dir) {
  RunConfig cfg;
  cfg.base_dir = base_dir;
  cfg.raw = std::move(raw);
  std::vector<std::string> problems;

  if (const auto it = cfg.raw.find("paths.output_dir"); it != cfg.raw.end()) {
    if (it->second.empty())
      problems.push_back("paths.output_dir: must not be empty");
    else
      cfg.output_dir = std::filesystem::path(it->second).is_absolute() ? std::filesystem::path(it->second)
                                                                        : base_dir / it->second;
  } else {
    cfg.output_dir = base_dir / "out";
  }

  Parser parser{cfg, base_dir};
  const auto& table = setters();
  for (const auto& [key, value] : cfg.raw) {
    try {
      if (text::starts_with(key, "languages.")) {
        const auto code = check_code(key.substr(10));
        const auto parts = list_of(value);
        if (parts.empty() || parts.size() > 2) throw ConfigError("expected 'family[, resource_class]'");
        cfg.roster.emplace_back(code, parts[0],
                                parts.size() == 2 ? parse_resource_class(parts[1]) : ResourceClass::moderate);
        continue;
      }
      const auto it = table.find(key);
      if (it == table.end()) throw ConfigError("unknown key");
      it->second(parser, value);
    } catch (const Error& e) {
      problems.push_back(key + ": " + e.what());
    }
  }

  if (!cfg.source.empty() && cfg.source == cfg.target) problems.push_back("pair: source and target are the same");
  if (cfg.synth.layers == 0) problems.push_back("synth.layers: must be positive");
  if (cfg.synth.neurons == 0) problems.push_back("synth.neurons: must be positive");
  if (cfg.synth.d < 3) problems.push_back("synth.d: must be at least 3");
  if (cfg.synth.tokens == 0) problems.push_back("synth.tokens: must be positive");
  if (!problems.empty()) throw ConfigValidationError(problems);
  return cfg;
}

RunConfig load_config(const std::optional<std::filesystem::path>& file,
                      const std::vector<std::pair<std::string, std::string>>& overrides,
                      const std::optional<std::string>& output_dir_flag) {
  RawConfig raw;
  std::filesystem::path base = std::filesystem::current_path();
  if (file) {
    if (!std::filesystem::exists(*file))
      throw ConfigValidationError({"config file '" + file->string() + "' does not exist"});
    raw = read_ini(*file);
    base = std::filesystem::absolute(*file).parent_path();
  }
  for (const auto& [k, v] : overrides) raw[k] = v;

  // The output directory is not part of the hash, so a flag or environment
  // value is stored absolute and does not depend on the config location.
  std::optional<std::string> out_dir = output_dir_flag;
  if (!out_dir)
    if (const char* env = std::getenv("BRIDGEX_OUTPUT_DIR"); env && *env) out_dir = env;
  if (out_dir) raw["paths.output_dir"] = std::filesystem::absolute(*out_dir).string();
  return from_raw(std::move(raw), base);
}

std::vector<std::string> check_inputs(const RunConfig& cfg, const std::string& command) {
  std::vector<std::string> problems;
  auto need_file = [&](const std::optional<std::filesystem::path>& p, const std::string& key) {
    if (!p)
      problems.push_back(key + ": required by " + command);
    else if (!std::filesystem::exists(*p))
      problems.push_back(key + ": '" + p->string() + "' does not exist");
  };
  auto need_files = [&](const std::vector<std::filesystem::path>& ps, const std::string& key) {
    if (ps.empty()) problems.push_back(key + ": required by " + command);
    for (const auto& p : ps)
      if (!std::filesystem::exists(p)) problems.push_back(key + ": '" + p.string() + "' does not exist");
  };
  auto need_pair = [&] {
    if (cfg.source.empty()) problems.push_back("pair.source: required by " + command);
    if (cfg.target.empty()) problems.push_back("pair.target: required by " + command);
  };

  if (command == "ingest") {
    need_files(cfg.dumps, "paths.dumps");
  } else if (command == "overlap") {
    need_pair();
  } else if (command == "bridge") {
    need_pair();
    need_file(cfg.probe_dump, "paths.probe_dump");
    if (cfg.candidates.empty()) problems.push_back("bridge.candidates: must list at least one candidate");
    for (const auto& c : cfg.candidates)
      if (c == cfg.source || c == cfg.target)
        problems.push_back("bridge.candidates: '" + c + "' is an endpoint of the evaluated pair");
    if (cfg.layer_window == "auto") {
      need_file(cfg.embeddings, "paths.embeddings");
      if (cfg.window_labels.first.empty()) problems.push_back("bridge.window_labels: required for an automatic window");
    }
  } else if (command == "genealogy") {
    need_files(cfg.trees, "paths.trees");
    if (cfg.code_table) need_file(cfg.code_table, "paths.code_table");
    if (cfg.roster.size() < 2) problems.push_back("languages: at least two languages are required");
  } else if (command == "probes") {
    need_pair();
    if (cfg.dictionary) {
      need_file(cfg.dictionary, "paths.dictionary");
    } else {
      need_file(cfg.dict_source_pivot, "paths.dict_source_pivot");
      need_file(cfg.dict_target_pivot, "paths.dict_target_pivot");
    }
    if (cfg.verified) need_file(cfg.verified, "paths.verified");
    if (cfg.templates) need_file(cfg.templates, "paths.templates");
  } else if (command == "mds") {
    need_file(cfg.embeddings, "paths.embeddings");
  } else if (command == "eval") {
    if (cfg.predictions.empty() && !cfg.table) problems.push_back("paths.predictions or paths.table: required by eval");
    for (const auto& p : cfg.predictions)
      if (!std::filesystem::exists(p)) problems.push_back("paths.predictions: '" + p.string() + "' does not exist");
    if (cfg.table) need_file(cfg.table, "paths.table");
  } else if (command == "synth") {
    need_pair();
    if (cfg.synth.planted.empty()) problems.push_back("synth.planted: required by synth");
  }
  return problems;
}

}  // namespace bridgex::config
