#include "bridgex/corpus.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::corpus {

BilingualDict::BilingualDict(LanguageTag source, LanguageTag target)
    : source_(std::move(source)), target_(std::move(target)) {
  if (source_ == target_)
    throw ValidationError("dictionary source and target are both '" + source_.code() + "'");
}

bool BilingualDict::add(WordPair pair) {
  if (pair.source.empty() || pair.target.empty())
    throw ValidationError("dictionary pair has an empty side");
  if (!seen_.insert(pair).second) return false;
  pairs_.push_back(std::move(pair));
  return true;
}

BilingualDict BilingualDict::reversed() const {
  BilingualDict out(target_, source_);
  for (const auto& p : pairs_) out.add({p.target, p.source});
  return out;
}

BilingualDict parse_dictionary(std::istream& in, const LanguageTag& source,
                               const LanguageTag& target) {
  BilingualDict dict(source, target);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto fields = text::split_whitespace(body);
    if (fields.size() != 2)
      throw ParseError("dictionary line " + std::to_string(line_no) + ": expected 2 fields, got " +
                           std::to_string(fields.size()),
                       line_no);
    dict.add({std::string(fields[0]), std::string(fields[1])});
  }
  if (dict.empty())
    throw InsufficientDataError("dictionary " + source.code() + "-" + target.code() +
                                " contains no pairs");
  return dict;
}

BilingualDict parse_dictionary(const std::filesystem::path& path, const LanguageTag& source,
                               const LanguageTag& target) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open dictionary '" + path.string() + "'");
  return parse_dictionary(in, source, target);
}

std::string serialize_dictionary(const BilingualDict& dict) {
  std::string out;
  for (const auto& p : dict.pairs()) out += p.source + " " + p.target + "\n";
  return out;
}

BilingualDict compose_pivot(const BilingualDict& source_to_pivot,
                            const BilingualDict& target_to_pivot) {
  if (source_to_pivot.target() != target_to_pivot.target())
    throw ConfigError("pivot mismatch: '" + source_to_pivot.target().code() + "' vs '" +
                      target_to_pivot.target().code() + "'");

  std::multimap<std::string, std::string> by_pivot;  // pivot word -> target-language word
  for (const auto& p : target_to_pivot.pairs()) by_pivot.emplace(p.target, p.source);

  std::set<WordPair> joined;
  for (const auto& p : source_to_pivot.pairs()) {
    const auto [lo, hi] = by_pivot.equal_range(p.target);
    for (auto it = lo; it != hi; ++it) joined.insert({p.source, it->second});
  }

  BilingualDict out(source_to_pivot.source(), target_to_pivot.source());
  for (const auto& p : joined) out.add(p);
  return out;
}

BilingualDict select_probe_pairs(const BilingualDict& dict, const std::set<std::size_t>& verified,
                                 std::size_t d) {
  if (!verified.empty() && *verified.rbegin() >= dict.size())
    throw ValidationError("verified index " + std::to_string(*verified.rbegin()) +
                          " out of range for dictionary of " + std::to_string(dict.size()) +
                          " pairs");
  if (verified.size() < d) {
    const auto shortfall = d - verified.size();
    throw InsufficientDataError("need " + std::to_string(d) + " verified pairs, have " +
                                    std::to_string(verified.size()) +
                                    " (shortfall=" + std::to_string(shortfall) + ")",
                                shortfall);
  }
  BilingualDict out(dict.source(), dict.target());
  for (auto idx : verified) {
    if (out.size() == d) break;
    out.add(dict.pairs()[idx]);
  }
  return out;
}

std::set<std::size_t> parse_verified_indices(std::istream& in) {
  std::set<std::size_t> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    try {
      out.insert(text::parse_size(body, "verified index"));
    } catch (const FormatError& e) {
      throw ParseError("verified-pairs line " + std::to_string(line_no) + ": " + e.what(), line_no);
    }
  }
  return out;
}

std::set<std::size_t> parse_verified_indices(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open verified-pairs file '" + path.string() + "'");
  return parse_verified_indices(in);
}

ParallelCorpus parse_parallel_corpus(const std::filesystem::path& path, const LanguageTag& language,
                                     std::optional<std::string> aligned_id) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open corpus '" + path.string() + "'");
  ParallelCorpus corpus{language, {}, std::move(aligned_id)};
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    // Aligned corpora keep blank lines so indices stay in step.
    if (line.empty() && !corpus.aligned_id) continue;
    corpus.sentences.push_back(line);
  }
  if (corpus.sentences.empty())
    throw InsufficientDataError("corpus '" + path.string() + "' has no sentences");
  return corpus;
}

void check_alignment(const std::vector<ParallelCorpus>& corpora) {
  std::map<std::string, std::pair<std::string, std::size_t>> first;
  for (const auto& c : corpora) {
    if (c.sentences.empty())
      throw ValidationError("corpus for '" + c.language.code() + "' is empty");
    if (!c.aligned_id) continue;
    const auto [it, inserted] =
        first.try_emplace(*c.aligned_id, c.language.code(), c.sentences.size());
    if (!inserted && it->second.second != c.sentences.size())
      throw ValidationError("aligned corpus '" + *c.aligned_id + "': '" + it->second.first +
                            "' has " + std::to_string(it->second.second) + " sentences but '" +
                            c.language.code() + "' has " + std::to_string(c.sentences.size()));
  }
}

// -- prompts ---------------------------------------------------------------

namespace {

std::string replace_all(std::string s, std::string_view from, std::string_view to) {
  std::size_t pos = 0;
  while ((pos = s.find(from, pos)) != std::string::npos) {
    s.replace(pos, from.size(), to);
    pos += to.size();
  }
  return s;
}

struct Fill {
  std::string word;
  std::string l1;
  std::string l2;
  std::string lb;
  std::string examples;
  std::string passage;
  std::string question;
  std::string choices;
};

std::string fill(const std::string& tmpl, const Fill& f) {
  auto s = replace_all(tmpl, "{w}", f.word);
  s = replace_all(std::move(s), "{L1}", f.l1);
  s = replace_all(std::move(s), "{L2}", f.l2);
  s = replace_all(std::move(s), "{Lb}", f.lb);
  s = replace_all(std::move(s), "{examples}", f.examples);
  s = replace_all(std::move(s), "{passage}", f.passage);
  s = replace_all(std::move(s), "{question}", f.question);
  return replace_all(std::move(s), "{choices}", f.choices);
}

const std::string& require_template(const TemplateSet& templates, const Task& task) {
  const auto* t = templates.find(task.template_key());
  if (t == nullptr) throw ConfigError("no prompt template for task '" + task.template_key() + "'");
  return *t;
}

void check_bridge(const Task& task, const std::optional<LanguageTag>& bridge) {
  if (task.uses_bridge() && !bridge)
    throw ConfigError("task '" + task.name() + "' requires a bridge language");
  if (!task.uses_bridge() && bridge)
    throw ConfigError("task '" + task.name() + "' does not take a bridge language");
}

}  // namespace

std::string Task::name() const {
  switch (kind) {
    case TaskKind::bli_zero: return "bli_zero";
    case TaskKind::bli_fewshot: return "bli_fewshot(" + std::to_string(shots) + ")";
    case TaskKind::bli_bridge: return "bli_bridge";
    case TaskKind::mrc_zero: return "mrc_zero";
    case TaskKind::mrc_bridge: return "mrc_bridge";
    case TaskKind::probe_translation: return "probe_translation";
  }
  return "unknown";
}

std::string Task::template_key() const {
  return kind == TaskKind::bli_fewshot ? std::string("bli_fewshot") : name();
}

Task parse_task(std::string_view raw) {
  const auto t = text::trim(raw);
  if (t == "bli_zero") return {TaskKind::bli_zero};
  if (t == "bli_bridge") return {TaskKind::bli_bridge};
  if (t == "mrc_zero") return {TaskKind::mrc_zero};
  if (t == "mrc_bridge") return {TaskKind::mrc_bridge};
  if (t == "probe_translation") return {TaskKind::probe_translation};
  if (text::starts_with(t, "bli_fewshot(") && t.back() == ')') {
    const auto inner = t.substr(12, t.size() - 13);
    const auto k = text::parse_size(inner, "shot count");
    if (k == 0) throw ConfigError("bli_fewshot needs at least one shot");
    return {TaskKind::bli_fewshot, k};
  }
  throw ConfigError("unknown task '" + std::string(t) + "'");
}

TemplateSet TemplateSet::defaults() {
  TemplateSet t;
  t.set("probe_translation", "Translate the word {w} from {L1} to {L2}. Answer:");
  t.set("bli_zero", "Translate the word {w} from {L1} to {L2}. Answer:");
  t.set("bli_fewshot", "{examples}Translate the word {w} from {L1} to {L2}. Answer:");
  t.set("bli_bridge", "Translate the word {w} from {L1} first into {Lb}, then into {L2}. Answer:");
  t.set("mrc_zero",
        "{passage}\nQuestion: {question}\n{choices}\n"
        "Answer in {L2} with the letter of the correct choice. Answer:");
  t.set("mrc_bridge",
        "{passage}\nQuestion: {question}\n{choices}\n"
        "Reason first in {Lb}, then answer in {L2} with the letter of the correct choice. Answer:");
  return t;
}

TemplateSet TemplateSet::parse(std::istream& in, TemplateSet base) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto eq = body.find('=');
    if (eq == std::string_view::npos)
      throw ParseError("template line " + std::to_string(line_no) + ": expected 'task = template'",
                       line_no);
    auto key = std::string(text::trim(body.substr(0, eq)));
    auto value = std::string(text::trim(body.substr(eq + 1)));
    value = replace_all(std::move(value), "\\n", "\n");
    base.set(std::move(key), std::move(value));
  }
  return base;
}

TemplateSet TemplateSet::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open template config '" + path.string() + "'");
  return parse(in);
}

const std::string* TemplateSet::find(const std::string& key) const {
  const auto it = templates_.find(key);
  return it == templates_.end() ? nullptr : &it->second;
}

PromptSet render_prompts(const BilingualDict& dict, const Task& task,
                         const std::optional<LanguageTag>& bridge, const TemplateSet& templates) {
  if (task.kind == TaskKind::mrc_zero || task.kind == TaskKind::mrc_bridge)
    throw ConfigError("MRC prompts are rendered from MRC items, not a dictionary");
  check_bridge(task, bridge);
  if (dict.empty()) throw InsufficientDataError("cannot render prompts from an empty dictionary");
  const auto& tmpl = require_template(templates, task);

  PromptSet set{task, {dict.source(), dict.target()}, bridge, {}};
  const auto& src = dict.source();
  const auto& tgt = dict.target();
  const std::string lb = bridge ? bridge->display_name() : std::string();

  auto render_one = [&](const std::string& word, const std::string& expected, const LanguageTag& l1,
                        const LanguageTag& l2, std::string examples) {
    Fill f{word, l1.display_name(), l2.display_name(), lb, std::move(examples), {}, {}, {}};
    set.rendered.push_back({fill(tmpl, f), expected, {l1.code(), l2.code()}});
  };

  const auto& pairs = dict.pairs();
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    std::string examples;
    if (task.kind == TaskKind::bli_fewshot) {
      const auto* zero = templates.find("bli_zero");
      if (zero == nullptr) throw ConfigError("bli_fewshot requires a 'bli_zero' template");
      std::size_t taken = 0;
      for (std::size_t j = 0; j < pairs.size() && taken < task.shots; ++j) {
        if (j == i) continue;
        Fill f{pairs[j].source, src.display_name(), tgt.display_name(), lb, {}, {}, {}, {}};
        examples += fill(*zero, f) + " " + pairs[j].target + "\n";
        ++taken;
      }
    }
    render_one(pairs[i].source, pairs[i].target, src, tgt, std::move(examples));
  }
  if (task.kind == TaskKind::probe_translation)
    for (const auto& p : pairs) render_one(p.target, p.source, tgt, src, {});
  return set;
}

PromptSet render_mrc_prompts(const std::vector<MrcItem>& items, const LanguageTag& source,
                             const LanguageTag& target, const Task& task,
                             const std::optional<LanguageTag>& bridge,
                             const TemplateSet& templates) {
  if (task.kind != TaskKind::mrc_zero && task.kind != TaskKind::mrc_bridge)
    throw ConfigError("task '" + task.name() + "' is not an MRC task");
  check_bridge(task, bridge);
  if (items.empty()) throw InsufficientDataError("cannot render prompts from zero MRC items");
  const auto& tmpl = require_template(templates, task);

  PromptSet set{task, {source, target}, bridge, {}};
  for (const auto& item : items) {
    if (item.choices.empty() || item.choices.size() > 26)
      throw ValidationError("MRC item must have between 1 and 26 choices");
    std::string choices;
    for (std::size_t c = 0; c < item.choices.size(); ++c) {
      if (c) choices += "\n";
      choices += std::string(1, static_cast<char>('A' + c)) + ") " + item.choices[c];
    }
    Fill f{{}, source.display_name(), target.display_name(),
           bridge ? bridge->display_name() : std::string(), {}, item.passage, item.question,
           std::move(choices)};
    set.rendered.push_back({fill(tmpl, f), item.answer_label, {source.code(), target.code()}});
  }
  return set;
}

std::string export_prompt_set(const PromptSet& set) {
  std::string out;
  for (const auto& r : set.rendered) {
    nlohmann::ordered_json j;
    j["prompt"] = r.prompt;
    j["expected"] = r.expected;
    j["direction"] = r.direction.first + "-" + r.direction.second;
    j["task"] = set.task.name();
    j["bridge"] = set.bridge ? nlohmann::ordered_json(set.bridge->code()) : nlohmann::ordered_json();
    out += j.dump() + "\n";
  }
  return out;
}

}  // namespace bridgex::corpus
