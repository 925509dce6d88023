#pragma once

#include <cstddef>
#include <filesystem>
#include <istream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "bridgex/language.hpp"

// Bilingual dictionaries, parallel corpora, and prompt rendering.
namespace bridgex::corpus {

struct WordPair {
  std::string source;
  std::string target;

  friend bool operator==(const WordPair&, const WordPair&) = default;
  friend auto operator<=>(const WordPair&, const WordPair&) = default;
};

/// Ordered, duplicate-free word pairs from `source` to `target`.
class BilingualDict {
public:
  BilingualDict(LanguageTag source, LanguageTag target);

  const LanguageTag& source() const noexcept { return source_; }
  const LanguageTag& target() const noexcept { return target_; }
  const std::vector<WordPair>& pairs() const noexcept { return pairs_; }
  std::size_t size() const noexcept { return pairs_.size(); }
  bool empty() const noexcept { return pairs_.empty(); }

  /// Appends the pair unless already present. Returns false for duplicates.
  bool add(WordPair pair);

  /// Same pairs with the two sides swapped, source/target tags swapped.
  BilingualDict reversed() const;

private:
  LanguageTag source_;
  LanguageTag target_;
  std::vector<WordPair> pairs_;
  std::set<WordPair> seen_;
};

/// One pair per line, two whitespace-separated tokens, '#' comments skipped.
BilingualDict parse_dictionary(std::istream& in, const LanguageTag& source,
                               const LanguageTag& target);
BilingualDict parse_dictionary(const std::filesystem::path& path, const LanguageTag& source,
                               const LanguageTag& target);
std::string serialize_dictionary(const BilingualDict& dict);

/// Joins an L_s->pivot and an L_t->pivot dictionary into L_s->L_t. Every
/// (s, t) sharing at least one pivot word is kept, sorted by (s, t).
BilingualDict compose_pivot(const BilingualDict& source_to_pivot,
                            const BilingualDict& target_to_pivot);

inline constexpr std::size_t kDefaultProbePairs = 100;

/// First `d` verified pairs in dictionary order.
BilingualDict select_probe_pairs(const BilingualDict& dict, const std::set<std::size_t>& verified,
                                 std::size_t d = kDefaultProbePairs);

/// One 0-based pair index per line.
std::set<std::size_t> parse_verified_indices(std::istream& in);
std::set<std::size_t> parse_verified_indices(const std::filesystem::path& path);

struct ParallelCorpus {
  LanguageTag language;
  std::vector<std::string> sentences;
  std::optional<std::string> aligned_id;
};

ParallelCorpus parse_parallel_corpus(const std::filesystem::path& path, const LanguageTag& language,
                                     std::optional<std::string> aligned_id = std::nullopt);

/// Throws ValidationError when corpora sharing an aligned_id differ in length.
void check_alignment(const std::vector<ParallelCorpus>& corpora);

// -- prompts ---------------------------------------------------------------

enum class TaskKind { bli_zero, bli_fewshot, bli_bridge, mrc_zero, mrc_bridge, probe_translation };

struct Task {
  TaskKind kind = TaskKind::bli_zero;
  std::size_t shots = 0;  // only meaningful for bli_fewshot

  bool uses_bridge() const noexcept {
    return kind == TaskKind::bli_bridge || kind == TaskKind::mrc_bridge;
  }
  /// "bli_zero", "bli_fewshot(3)", ...
  std::string name() const;
  /// Key into the template set ("bli_fewshot" regardless of shot count).
  std::string template_key() const;

  friend bool operator==(const Task&, const Task&) = default;
};

Task parse_task(std::string_view text);

/// Task name -> template string. Placeholders: {w} {L1} {L2} {Lb}
/// {examples} {passage} {question} {choices}.
class TemplateSet {
public:
  static TemplateSet defaults();
  /// "key = template" per line; '#' comments. Entries override `base`.
  static TemplateSet parse(std::istream& in, TemplateSet base = defaults());
  static TemplateSet load(const std::filesystem::path& path);

  const std::string* find(const std::string& key) const;
  void set(std::string key, std::string tmpl) { templates_[std::move(key)] = std::move(tmpl); }

private:
  std::map<std::string, std::string> templates_;
};

struct RenderedPrompt {
  std::string prompt;
  std::string expected;
  std::pair<std::string, std::string> direction;  // language codes
};

struct PromptSet {
  Task task;
  std::pair<LanguageTag, LanguageTag> direction;
  std::optional<LanguageTag> bridge;
  std::vector<RenderedPrompt> rendered;
};

/// Renders dictionary-driven prompts. probe_translation yields every pair in
/// the forward direction followed by every pair reversed (2·|pairs| prompts).
PromptSet render_prompts(const BilingualDict& dict, const Task& task,
                         const std::optional<LanguageTag>& bridge, const TemplateSet& templates);

struct MrcItem {
  std::string passage;
  std::string question;
  std::vector<std::string> choices;
  std::string answer_label;
};

/// Multiple-choice reading comprehension prompts; choices are labelled A, B, ...
PromptSet render_mrc_prompts(const std::vector<MrcItem>& items, const LanguageTag& source,
                             const LanguageTag& target, const Task& task,
                             const std::optional<LanguageTag>& bridge,
                             const TemplateSet& templates);

/// One JSON object per line: prompt, expected, direction, task, bridge.
std::string export_prompt_set(const PromptSet& set);

}  // namespace bridgex::corpus
