#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

// Scoring of BLI / MRC predictions and the baseline-comparison table.
namespace bridgex::eval {

enum class TaskType { bli, mrc };
TaskType parse_task_type(std::string_view text);
std::string_view to_string(TaskType task);

struct PredictionRow {
  std::string item_id;
  std::vector<std::string> candidates;  // ranked; may be empty when the model produced nothing
  std::vector<std::string> golds;
};

/// Header "# task=bli<TAB>model=..<TAB>method=..<TAB>pair=ar-he", then
/// "item_id<TAB>cand|cand<TAB>gold|gold" rows. Further '#' lines are comments.
struct PredictionFile {
  TaskType task = TaskType::bli;
  std::string model;
  std::string method;  // "zero-shot", "3-shot", "bridge=en", ...
  std::string pair;    // "ar-he"
  std::vector<PredictionRow> rows;
};

/// Throws ParseError (with line number) for duplicate ids, empty golds, a
/// missing header, or a wrong field count.
PredictionFile parse_prediction_file(std::string_view content);
PredictionFile read_prediction_file(const std::filesystem::path& path);
std::string serialize_prediction_file(const PredictionFile& file);

struct NormalizerConfig {
  bool lowercase = true;
  bool strip_punctuation = true;
  bool collapse_whitespace = true;  // trim and squeeze internal runs to one space
  bool fold_diacritics = false;

  /// "lowercase=1,strip_punctuation=1,collapse_whitespace=1,fold_diacritics=0"
  std::string describe() const;
};

/// UTF-8 aware answer normalization. Case folding covers ASCII, Latin-1,
/// Latin Extended-A, Greek and Cyrillic; punctuation covers ASCII, Latin-1
/// and the general/CJK/fullwidth punctuation blocks.
std::string normalize_answer(std::string_view s, const NormalizerConfig& cfg);

struct Score {
  double percentage = 0.0;
  std::size_t correct = 0;
  std::size_t total = 0;
  std::size_t unparsed = 0;  // MRC only
  std::vector<std::string> warnings;
};

/// Share of rows whose top-n normalized candidates contain any normalized
/// gold. Rows with fewer than n candidates are scored on what they have and
/// produce a warning. Throws ConfigError for n = 0 or a non-BLI file and
/// InsufficientDataError for a file without rows.
Score precision_at_n(const PredictionFile& pred, std::size_t n, const NormalizerConfig& cfg = {});

/// First standalone token (split on anything but ASCII letters and digits)
/// that exactly equals one of the labels.
std::optional<std::string> extract_choice_label(std::string_view prediction,
                                                const std::set<std::string>& labels);

/// Exact label accuracy over the first candidate of each row; rows whose
/// prediction has no label count as wrong and as unparsed.
Score mrc_accuracy(const PredictionFile& pred, const std::set<std::string>& labels);

// -- result table ------------------------------------------------------------------

/// Fixed-point value in hundredths of a percentage point.
using Hundredths = std::int64_t;
Hundredths to_hundredths(double value);
/// Parses "47.00", "+17.50", "-9.5"; more than two decimals is a ParseError.
Hundredths parse_hundredths(std::string_view text);
/// "64.50", or "+17.50" / "-9.50" with `signed_delta`.
std::string format_hundredths(Hundredths v, bool signed_delta = false);

enum class MethodGroup { zero_shot, few_shot, bridge };
/// "zero-shot" -> zero_shot, "<k>-shot" -> few_shot, anything else -> bridge.
MethodGroup method_group(std::string_view method);

struct RunScore {
  std::string pair;    // "ar-he"
  std::string method;
  std::optional<std::string> bridge;  // bridge language, when the method has one
  Hundredths value = 0;
  bool is_delta = false;       // value is relative to the pair's zero-shot run
  bool not_applicable = false; // ingested '-' cell
};

/// Builds a run score from a scored prediction file. A method "bridge=xx"
/// sets the bridge language.
RunScore run_score(const PredictionFile& pred, const Score& score);

struct ResultCell {
  std::string method;
  MethodGroup group = MethodGroup::zero_shot;
  std::optional<std::string> bridge;
  Hundredths absolute = 0;
  Hundredths delta = 0;
  bool dash = false;     // bridge equals source or target
  bool max_gain = false; // highest delta in its group for this pair (ties all flagged)
};

struct ResultTable {
  std::vector<std::string> pairs;    // first-appearance order
  std::vector<std::string> methods;  // zero-shot, few-shot, then bridge methods
  std::map<std::string, std::map<std::string, ResultCell>> cells;  // pair -> method -> cell
};

/// Throws ValidationError naming the pair when a pair has no zero-shot run,
/// more than one, or a repeated method label.
ResultTable build_result_table(const std::vector<RunScore>& runs);

/// Long CSV: pair,method,group,bridge,absolute,delta,max_gain.
std::string format_result_csv(const ResultTable& table);
/// Wide aligned text: methods down, pairs across; zero-shot shows absolute
/// values, other rows signed deltas with '*' on max-gain cells.
std::string format_result_text(const ResultTable& table);

/// Table ingest, CSV lines "pair,method,value[,bridge]". A value with a
/// leading sign is a delta, otherwise absolute; '-' marks a not-applicable cell.
std::vector<RunScore> parse_table_file(std::string_view content);
std::vector<RunScore> read_table_file(const std::filesystem::path& path);

}  // namespace bridgex::eval
