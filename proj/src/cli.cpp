#include "bridgex/cli.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cstring>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "bridgex/activations.hpp"
#include "bridgex/analysis.hpp"
#include "bridgex/bridge.hpp"
#include "bridgex/config.hpp"
#include "bridgex/corpus.hpp"
#include "bridgex/error.hpp"
#include "bridgex/evalharness.hpp"
#include "bridgex/genealogy.hpp"
#include "bridgex/neurons.hpp"
#include "bridgex/synthetic.hpp"
#include "bridgex/text.hpp"

namespace bridgex::cli {

namespace fs = std::filesystem;
using config::RunConfig;

void write_with_provenance(const fs::path& path, std::string content, const std::string& hash) {
  const auto ext = path.extension().string();
  if (ext == ".csv" || ext == ".tsv" || ext == ".txt") {
    content = "# config_hash=" + hash + "\n" + content;
  } else if (ext == ".freq" || ext == ".neurons" || ext == ".dump") {
    const auto eol = content.find('\n');
    content.insert(eol == std::string::npos ? content.size() : eol, "\tconfig_hash=" + hash);
  } else if (ext == ".json") {
    auto j = nlohmann::ordered_json::parse(content);
    j["config_hash"] = hash;
    content = j.dump(2) + "\n";
  } else if (ext == ".jsonl") {
    nlohmann::ordered_json meta;
    meta["config_hash"] = hash;
    meta["records"] = std::count(content.begin(), content.end(), '\n');
    auto sidecar = path;
    sidecar.replace_extension(".meta.json");
    text::write_file(sidecar, meta.dump(2) + "\n");
  }
  text::write_file(path, content);
}

namespace {

class OutputLock {
public:
  explicit OutputLock(const fs::path& dir) : path_(dir / kLockName) {
    fs::create_directories(dir);
    fd_ = ::open(path_.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd_ < 0) {
      if (errno == EEXIST)
        throw IoError("output directory is locked by another run (remove " + path_.string() +
                      " if that run is gone)");
      throw IoError("cannot create lock " + path_.string() + ": " + std::strerror(errno));
    }
    const auto pid = std::to_string(::getpid()) + "\n";
    (void)!::write(fd_, pid.data(), pid.size());
  }
  ~OutputLock() {
    ::close(fd_);
    std::error_code ec;
    fs::remove(path_, ec);
  }
  OutputLock(const OutputLock&) = delete;
  OutputLock& operator=(const OutputLock&) = delete;

private:
  fs::path path_;
  int fd_ = -1;
};

struct Context {
  const RunConfig& cfg;
  std::ostream& out;
  std::ostream& err;
  std::string hash;

  void write(const fs::path& rel, std::string content) const {
    const auto path = cfg.output_dir / rel;
    write_with_provenance(path, std::move(content), hash);
    out << "wrote " << path.string() << "\n";
  }
  fs::path profile_dir() const { return cfg.profiles ? *cfg.profiles : cfg.output_dir / "profiles"; }
  std::string pair_name() const { return cfg.source + "-" + cfg.target; }
};

LanguageTag tag_for(const RunConfig& cfg, const std::string& code) {
  for (const auto& t : cfg.roster)
    if (t.code() == code) return t;
  return LanguageTag(code);
}

std::vector<activations::FrequencyProfile> load_profiles(const Context& ctx,
                                                         const std::vector<std::string>& wanted) {
  const auto dir = ctx.profile_dir();
  std::vector<activations::FrequencyProfile> out;
  std::vector<std::string> missing;
  if (!wanted.empty()) {
    for (const auto& code : wanted) {
      const auto p = dir / (code + ".freq");
      if (!fs::exists(p)) {
        missing.push_back(p.string());
        continue;
      }
      out.push_back(activations::read_profile(p));
    }
  } else if (fs::is_directory(dir)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(dir))
      if (e.path().extension() == ".freq") files.push_back(e.path());
    std::sort(files.begin(), files.end());
    for (const auto& f : files) out.push_back(activations::read_profile(f));
  }
  if (!missing.empty()) {
    std::string msg = "missing frequency profiles (run ingest first):";
    for (const auto& m : missing) msg += " " + m;
    throw InsufficientDataError(msg, missing.size());
  }
  if (out.empty()) throw InsufficientDataError("no frequency profiles in " + dir.string() + " (run ingest first)");
  return out;
}

NeuronSet load_set(const Context& ctx, const std::string& code) {
  const auto p = ctx.cfg.output_dir / "neurons" / (code + ".neurons");
  if (!fs::exists(p)) throw InsufficientDataError("missing neuron set " + p.string() + " (run neurons first)", 1);
  return neurons::read_neuron_set(p);
}

std::vector<std::string> roster_codes(const RunConfig& cfg) {
  std::vector<std::string> out;
  for (const auto& t : cfg.roster) out.push_back(t.code());
  return out;
}

// -- subcommands ---------------------------------------------------------------------

void cmd_ingest(const Context& ctx) {
  std::map<std::string, activations::FrequencyCounter> counters;
  std::optional<ModelGeometry> geometry;
  std::map<std::string, std::size_t> records;
  for (const auto& path : ctx.cfg.dumps) {
    activations::DumpReader reader(path);
    if (geometry && !(reader.header().geometry == *geometry))
      throw FormatError(path.string() + ": geometry differs from earlier dumps");
    geometry = reader.header().geometry;
    while (auto r = reader.next()) {
      auto it = counters.find(r->language);
      if (it == counters.end())
        it = counters.emplace(r->language, activations::FrequencyCounter(r->language, *geometry, ctx.cfg.scope)).first;
      it->second.add(*r);
      ++records[r->language];
    }
  }
  std::string summary = "language,records,tokens\n";
  for (const auto& [lang, counter] : counters) {
    const auto profile = counter.finish();
    ctx.write(fs::path("profiles") / (lang + ".freq"), activations::serialize_profile(profile));
    summary += lang + "," + std::to_string(records[lang]) + "," + std::to_string(profile.token_count) + "\n";
  }
  ctx.write("ingest_summary.csv", summary);
}

void cmd_neurons(const Context& ctx) {
  const auto profiles = load_profiles(ctx, roster_codes(ctx.cfg));
  std::string summary = "language,size,flagged_empty\n";
  for (const auto& p : profiles) {
    const auto set = neurons::identify_language_neurons(p, ctx.cfg.tau, ctx.cfg.mode);
    ctx.write(fs::path("neurons") / (p.language + ".neurons"), neurons::serialize_neuron_set(set));
    summary += p.language + "," + std::to_string(set.size()) + "," + (set.flagged_empty() ? "1" : "0") + "\n";
  }
  ctx.write("neurons_summary.csv", summary);
}

void cmd_overlap(const Context& ctx) {
  const auto overlap = neurons::overlap_set(load_set(ctx, ctx.cfg.source), load_set(ctx, ctx.cfg.target));
  ctx.write(fs::path("overlap") / (ctx.pair_name() + ".neurons"), neurons::serialize_neuron_set(overlap));
  std::string dist = "layer,count\n";
  const auto counts = neurons::overlap_layer_distribution(overlap);
  for (std::size_t l = 0; l < counts.size(); ++l) dist += std::to_string(l) + "," + std::to_string(counts[l]) + "\n";
  ctx.write(fs::path("overlap") / (ctx.pair_name() + "_layers.csv"), dist);
}

void cmd_spectrum(const Context& ctx) {
  const auto profiles = load_profiles(ctx, roster_codes(ctx.cfg));
  const auto result = neurons::spectrum(profiles, ctx.cfg.tau, ctx.cfg.mode);
  ctx.write("spectrum.csv", analysis::format_heatmap_csv(result.matrix));

  nlohmann::ordered_json meta;
  meta["tau"] = result.tau;
  meta["mode"] = std::string(neurons::to_string(result.mode));
  meta["languages"] = result.matrix.languages();
  meta["undefined_pairs"] = nlohmann::json::array();
  for (const auto& [i, j] : result.matrix.missing())
    meta["undefined_pairs"].push_back({result.matrix.languages()[i], result.matrix.languages()[j]});
  meta["empty_sets"] = nlohmann::json::array();
  for (const auto& [lang, set] : result.sets)
    if (set.empty()) meta["empty_sets"].push_back(lang);
  ctx.write("spectrum.json", meta.dump(2) + "\n");
}

bridge::LayerWindow resolve_window(const Context& ctx, const ModelGeometry& geometry) {
  const auto& spec = ctx.cfg.layer_window;
  if (spec == "all") return {0, static_cast<std::uint32_t>(geometry.num_layers - 1)};
  if (spec != "auto") return bridge::parse_layer_window(spec);

  const auto dump = analysis::read_embedding_dump(*ctx.cfg.embeddings);
  auto find = [&](const std::string& label) -> const analysis::EmbeddingTrajectory& {
    for (const auto& t : dump.trajectories)
      if (t.label == label && t.role == analysis::Role::input_path) return t;
    throw LookupError("no input_path trajectory labelled '" + label + "' in " + ctx.cfg.embeddings->string());
  };
  const auto& a = find(ctx.cfg.window_labels.first);
  const auto& b = find(ctx.cfg.window_labels.second);
  if (a.layers != b.layers) throw ShapeError("window trajectories cover different layers");
  const auto profile = bridge::layer_embedding_similarity(a.per_layer, b.per_layer);
  const auto w = bridge::stable_window(profile, ctx.cfg.stable_delta);
  std::string csv = "layer,similarity,in_window\n";
  for (std::size_t i = 0; i < profile.size(); ++i)
    csv += std::to_string(a.layers[i]) + "," + text::format_double(profile[i]) + "," +
           (i >= w.lo && i <= w.hi ? "1" : "0") + "\n";
  ctx.write(fs::path("bridge") / (ctx.pair_name() + "_window.csv"), csv);
  return {a.layers[w.lo], a.layers[w.hi]};
}

void cmd_bridge(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::map<std::string, NeuronSet> sets;
  const auto src = load_set(ctx, cfg.source);
  const auto tgt = load_set(ctx, cfg.target);
  for (const auto& c : cfg.candidates) sets.emplace(c, load_set(ctx, c));
  const auto overlap = neurons::overlap_set(src, tgt);

  const auto dump = activations::read_dump(*cfg.probe_dump);
  if (!(dump.header.geometry == overlap.geometry()))
    throw FormatError("probe dump geometry differs from the neuron sets");

  bridge::HsicConfig hsic;
  hsic.kernel = cfg.kernel;
  hsic.pool_target = cfg.pool_target;
  hsic.window = resolve_window(ctx, dump.header.geometry);
  hsic.validate(dump.header.geometry);

  const auto inputs = bridge::prepare_bridge_inputs(dump.records, {cfg.source, cfg.target}, overlap, sets, cfg.d,
                                                    cfg.reduction, cfg.probe_scope);
  const auto selection = bridge::select_bridge(inputs, cfg.candidates, hsic);
  ctx.write(fs::path("bridge") / (ctx.pair_name() + "_report.csv"), bridge::export_bridge_report(inputs, selection));

  nlohmann::ordered_json settings;
  settings["kernel"] = std::string(bridge::to_string(hsic.kernel));
  if (hsic.pool_target)
    settings["pooling"] = *hsic.pool_target;
  else
    settings["pooling"] = "min_rows";
  settings["window"] = {hsic.window.lo, hsic.window.hi};
  settings["d"] = cfg.d;
  settings["reduction"] = cfg.reduction == activations::Reduction::mean_over_tokens ? "mean_over_tokens" : "last_token";
  settings["selected"] = selection.selected;
  settings["unscorable"] = selection.unscorable;
  ctx.write(fs::path("bridge") / (ctx.pair_name() + "_settings.json"), settings.dump(2) + "\n");

  std::map<std::string, NeuronSet> all_sets = sets;
  all_sets.emplace(cfg.source, src);
  all_sets.emplace(cfg.target, tgt);
  std::string base = "method,candidate,score,selected\n";
  auto add_rows = [&](const std::string& method, const neurons::BaselineChoice& choice) {
    for (const auto& c : cfg.candidates) {
      const auto it = choice.scores.find(c);
      base += method + "," + c + "," + (it == choice.scores.end() ? "" : text::format_double(it->second)) + "," +
              (c == choice.selected ? "true" : "false") + "\n";
    }
  };
  add_rows("iou", neurons::select_bridge_iou(all_sets, cfg.source, cfg.target, cfg.candidates));
  std::vector<std::string> lape_langs{cfg.source, cfg.target};
  lape_langs.insert(lape_langs.end(), cfg.candidates.begin(), cfg.candidates.end());
  bool have_profiles = true;
  for (const auto& l : lape_langs) have_profiles = have_profiles && fs::exists(ctx.profile_dir() / (l + ".freq"));
  if (have_profiles) {
    add_rows("lape_overlap",
             neurons::select_bridge_lape_overlap(load_profiles(ctx, lape_langs), cfg.tau, cfg.source, cfg.target,
                                                 cfg.candidates));
  } else {
    ctx.err << "note: LAPE baseline skipped, profiles for every language are not available\n";
  }
  ctx.write(fs::path("bridge") / (ctx.pair_name() + "_baselines.csv"), base);
  ctx.out << "selected bridge for " << ctx.pair_name() << ": " << selection.selected << "\n";
}

void cmd_genealogy(const Context& ctx) {
  std::vector<genealogy::PhyloTree> trees;
  for (const auto& p : ctx.cfg.trees) trees.push_back(genealogy::read_newick(p));
  const auto codes = ctx.cfg.code_table ? genealogy::read_code_table(*ctx.cfg.code_table)
                                        : std::map<std::string, std::string>{};
  const auto m = genealogy::genealogy_matrix(trees, roster_codes(ctx.cfg), codes, ctx.cfg.norms);
  ctx.write("genealogy.csv", analysis::format_heatmap_csv(m));
}

void cmd_probes(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto s = tag_for(cfg, cfg.source);
  const auto t = tag_for(cfg, cfg.target);
  const auto dict = cfg.dictionary
                        ? corpus::parse_dictionary(*cfg.dictionary, s, t)
                        : corpus::compose_pivot(corpus::parse_dictionary(*cfg.dict_source_pivot, s, tag_for(cfg, cfg.pivot)),
                                                corpus::parse_dictionary(*cfg.dict_target_pivot, t, tag_for(cfg, cfg.pivot)));
  ctx.write(fs::path("probes") / (ctx.pair_name() + "_dictionary.tsv"), corpus::serialize_dictionary(dict));

  const auto task = corpus::parse_task(cfg.task);
  const auto templates = cfg.templates ? corpus::TemplateSet::load(*cfg.templates) : corpus::TemplateSet::defaults();
  std::optional<LanguageTag> bridge;
  if (cfg.probe_bridge) bridge = tag_for(cfg, *cfg.probe_bridge);

  auto selected = dict;
  if (task.kind == corpus::TaskKind::probe_translation) {
    std::set<std::size_t> verified;
    if (cfg.verified) {
      verified = corpus::parse_verified_indices(*cfg.verified);
    } else {
      for (std::size_t i = 0; i < dict.size(); ++i) verified.insert(i);
      ctx.err << "note: no verified-index file, every dictionary pair is treated as verified\n";
    }
    selected = corpus::select_probe_pairs(dict, verified, cfg.probe_d);
  }
  const auto prompts = corpus::render_prompts(selected, task, bridge, templates);
  ctx.write(fs::path("probes") / (ctx.pair_name() + "_" + task.template_key() + ".jsonl"),
            corpus::export_prompt_set(prompts));
}

void cmd_mds(const Context& ctx) {
  const auto dump = analysis::read_embedding_dump(*ctx.cfg.embeddings);
  const auto result = analysis::trajectory_mds(dump.trajectories, ctx.cfg.metric);
  ctx.write("mds.csv", analysis::format_mds_csv(result));
  ctx.write("mds.json", analysis::format_mds_summary(result));
}

void cmd_eval(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  std::vector<eval::RunScore> runs;
  std::string scores = "file,task,model,method,pair,n,correct,total,unparsed,percentage,normalizer\n";
  std::string warnings;
  const std::set<std::string> labels(cfg.labels.begin(), cfg.labels.end());
  for (const auto& path : cfg.predictions) {
    const auto pred = eval::read_prediction_file(path);
    const auto score = pred.task == eval::TaskType::bli ? eval::precision_at_n(pred, cfg.n, cfg.normalizer)
                                                        : eval::mrc_accuracy(pred, labels);
    for (const auto& w : score.warnings) warnings += path.filename().string() + ": " + w + "\n";
    scores += text::csv_field(path.filename().string()) + "," + std::string(eval::to_string(pred.task)) + "," +
              text::csv_field(pred.model) + "," + text::csv_field(pred.method) + "," + text::csv_field(pred.pair) +
              "," + (pred.task == eval::TaskType::bli ? std::to_string(cfg.n) : "") + "," +
              std::to_string(score.correct) + "," + std::to_string(score.total) + "," +
              std::to_string(score.unparsed) + "," + text::format_fixed(score.percentage, 2) + "," +
              text::csv_field(cfg.normalizer.describe()) + "\n";
    if (!pred.pair.empty() && !pred.method.empty()) runs.push_back(eval::run_score(pred, score));
  }
  if (!cfg.predictions.empty()) ctx.write(fs::path("eval") / "scores.csv", scores);
  if (!warnings.empty()) {
    ctx.write(fs::path("eval") / "warnings.txt", warnings);
    ctx.err << warnings;
  }
  if (cfg.table) {
    const auto ingested = eval::read_table_file(*cfg.table);
    runs.insert(runs.end(), ingested.begin(), ingested.end());
  }
  if (runs.empty()) return;
  const auto table = eval::build_result_table(runs);
  ctx.write(fs::path("eval") / "result_table.csv", eval::format_result_csv(table));
  ctx.write(fs::path("eval") / "result_table.txt", eval::format_result_text(table));
}

void cmd_synth(const Context& ctx) {
  const auto& cfg = ctx.cfg;
  const auto& sc = cfg.synth;
  std::map<std::string, double> couplings{{sc.planted, 1.0}};
  for (const auto& d : sc.distractors) {
    if (d == sc.planted) throw ConfigError("synth.distractors must not contain the planted candidate");
    couplings.emplace(d, 0.0);
  }
  std::vector<std::uint32_t> layers(sc.layers);
  for (std::size_t l = 0; l < sc.layers; ++l) layers[l] = static_cast<std::uint32_t>(l);
  const auto spec = activations::bridge_scenario({sc.layers, sc.neurons}, cfg.source, cfg.target, couplings, layers,
                                                 sc.per_layer, sc.d, cfg.seed, sc.frequency);
  const auto dumps = activations::generate_synthetic(spec, sc.tokens);
  std::ostringstream corpus_out;
  activations::write_dump(corpus_out, dumps.corpus);
  ctx.write(fs::path("synthetic") / "corpus.dump", corpus_out.str());
  std::ostringstream probe_out;
  activations::write_dump(probe_out, *dumps.probe);
  ctx.write(fs::path("synthetic") / "probe.dump", probe_out.str());
}

const std::map<std::string, std::function<void(const Context&)>>& commands() {
  static const std::map<std::string, std::function<void(const Context&)>> table = {
      {"ingest", cmd_ingest}, {"neurons", cmd_neurons},     {"overlap", cmd_overlap}, {"spectrum", cmd_spectrum},
      {"bridge", cmd_bridge}, {"genealogy", cmd_genealogy}, {"probes", cmd_probes},   {"mds", cmd_mds},
      {"eval", cmd_eval},     {"synth", cmd_synth},
  };
  return table;
}

const std::map<std::string, std::string>& command_help() {
  static const std::map<std::string, std::string> table = {
      {"ingest", "Read activation dumps and write per-language frequency profiles"},
      {"neurons", "Select language-specific neurons from frequency profiles"},
      {"overlap", "Intersect the source and target neuron sets"},
      {"spectrum", "Pairwise overlap-neuron similarity over all profiled languages"},
      {"bridge", "Score candidate bridge languages with HSIC and pick the best"},
      {"genealogy", "Tree-based similarity matrix over the language roster"},
      {"probes", "Build the probe dictionary and render prompts"},
      {"mds", "Classical MDS of latent-embedding trajectories"},
      {"eval", "Score prediction files and build the comparison table"},
      {"synth", "Write synthetic activation dumps with a planted bridge"},
  };
  return table;
}

void report_error(std::ostream& err, const std::string& command, const std::string& kind, const std::string& message,
                  const std::vector<std::string>& problems) {
  nlohmann::ordered_json j;
  j["status"] = "error";
  j["command"] = command;
  j["kind"] = kind;
  j["message"] = message;
  if (!problems.empty()) j["problems"] = problems;
  err << j.dump() << "\n";
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Bridge-language selection from shared neuron activations", "bridgex"};
  std::optional<std::string> config_file;
  std::optional<std::string> output_dir;
  std::vector<std::string> sets;
  std::optional<double> tau;
  std::optional<std::uint64_t> seed;
  app.add_option("-c,--config", config_file, "INI config file");
  app.add_option("-o,--output-dir", output_dir, "Output directory (overrides BRIDGEX_OUTPUT_DIR and the config)");
  app.add_option("--set", sets, "Override a config key, section.key=value (repeatable)");
  app.add_option("--tau", tau, "Same as --set neurons.tau=...");
  app.add_option("--seed", seed, "Same as --set seeds.seed=...");
  app.require_subcommand(1, 1);
  for (const auto& [name, help] : command_help()) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    std::ostringstream o, r;
    const int code = app.exit(e, o, r);
    out << o.str();
    err << r.str();
    return code;
  }

  const auto command = app.get_subcommands().front()->get_name();
  try {
    std::vector<std::pair<std::string, std::string>> overrides;
    std::vector<std::string> problems;
    for (const auto& s : sets) {
      const auto eq = s.find('=');
      if (eq == std::string::npos || eq == 0)
        problems.push_back("--set " + s + ": expected section.key=value");
      else
        overrides.emplace_back(std::string(text::trim(s.substr(0, eq))), std::string(text::trim(s.substr(eq + 1))));
    }
    if (tau) overrides.emplace_back("neurons.tau", text::format_double(*tau));
    if (seed) overrides.emplace_back("seeds.seed", std::to_string(*seed));
    if (!problems.empty()) throw ConfigValidationError(problems);

    const auto cfg = config::load_config(config_file ? std::optional<fs::path>(*config_file) : std::nullopt,
                                         overrides, output_dir);
    if (const auto missing = config::check_inputs(cfg, command); !missing.empty())
      throw ConfigValidationError(missing);

    OutputLock lock(cfg.output_dir);
    const Context ctx{cfg, out, err, cfg.hash()};
    commands().at(command)(ctx);
    return 0;
  } catch (const ConfigValidationError& e) {
    report_error(err, command, e.kind(), "invalid configuration", e.problems());
    return 2;
  } catch (const Error& e) {
    report_error(err, command, e.kind(), e.what(), {});
    return 1;
  } catch (const std::exception& e) {
    report_error(err, command, "internal", e.what(), {});
    return 1;
  }
}

}  // namespace bridgex::cli
