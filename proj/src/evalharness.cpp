#include "bridgex/evalharness.hpp"

#include <algorithm>
#include <cmath>
#include <regex>

#include "bridgex/error.hpp"
#include "bridgex/text.hpp"

namespace bridgex::eval {

TaskType parse_task_type(std::string_view raw) {
  const auto t = text::trim(raw);
  if (t == "bli") return TaskType::bli;
  if (t == "mrc") return TaskType::mrc;
  throw ConfigError("unknown prediction task '" + std::string(t) + "'");
}

std::string_view to_string(TaskType task) { return task == TaskType::bli ? "bli" : "mrc"; }

// -- prediction files ------------------------------------------------------------

namespace {

std::vector<std::string> split_list(std::string_view field) {
  std::vector<std::string> out;
  if (text::trim(field).empty()) return out;
  for (auto part : text::split(field, '|')) out.emplace_back(text::trim(part));
  return out;
}

std::string join_list(const std::vector<std::string>& items) {
  std::string out;
  for (std::size_t i = 0; i < items.size(); ++i) {
    if (i) out += '|';
    out += items[i];
  }
  return out;
}

}  // namespace

PredictionFile parse_prediction_file(std::string_view content) {
  PredictionFile file;
  bool have_header = false;
  std::set<std::string> ids;
  std::size_t line_no = 0;
  for (auto raw : text::split(content, '\n')) {
    ++line_no;
    if (!raw.empty() && raw.back() == '\r') raw.remove_suffix(1);
    const auto body = text::trim(raw);
    if (body.empty()) continue;
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (body.front() == '#') {
      if (have_header) continue;
      std::map<std::string, std::string> fields;
      for (auto part : text::split(body.substr(1), '\t')) {
        const auto kv = text::trim(part);
        if (kv.empty()) continue;
        const auto eq = kv.find('=');
        if (eq == std::string_view::npos) throw ParseError(where + "header field without '='", line_no);
        fields[std::string(text::trim(kv.substr(0, eq)))] = std::string(text::trim(kv.substr(eq + 1)));
      }
      if (!fields.count("task")) throw ParseError(where + "header lacks task=", line_no);
      file.task = parse_task_type(fields["task"]);
      file.model = fields["model"];
      file.method = fields["method"];
      file.pair = fields["pair"];
      have_header = true;
      continue;
    }
    if (!have_header) throw ParseError(where + "record before the header", line_no);
    const auto f = text::split(raw, '\t');
    if (f.size() != 3) throw ParseError(where + "expected 3 tab-separated fields", line_no);
    PredictionRow row{std::string(text::trim(f[0])), split_list(f[1]), split_list(f[2])};
    if (row.item_id.empty()) throw ParseError(where + "empty item id", line_no);
    if (row.golds.empty() ||
        std::any_of(row.golds.begin(), row.golds.end(), [](const auto& g) { return g.empty(); }))
      throw ParseError(where + "empty gold answer", line_no);
    if (!ids.insert(row.item_id).second) throw ParseError(where + "duplicate item id '" + row.item_id + "'", line_no);
    file.rows.push_back(std::move(row));
  }
  if (!have_header) throw ParseError("prediction file has no header", 0);
  return file;
}

PredictionFile read_prediction_file(const std::filesystem::path& path) {
  return parse_prediction_file(text::read_file(path));
}

std::string serialize_prediction_file(const PredictionFile& file) {
  std::string out = "# task=" + std::string(to_string(file.task)) + "\tmodel=" + file.model +
                    "\tmethod=" + file.method + "\tpair=" + file.pair + "\n";
  for (const auto& r : file.rows)
    out += r.item_id + "\t" + join_list(r.candidates) + "\t" + join_list(r.golds) + "\n";
  return out;
}

// -- normalization -------------------------------------------------------------------

namespace {

std::vector<char32_t> decode_utf8(std::string_view s) {
  std::vector<char32_t> out;
  std::size_t i = 0;
  while (i < s.size()) {
    const auto c = static_cast<unsigned char>(s[i]);
    std::size_t len = 0;
    char32_t cp = 0;
    if (c < 0x80) { cp = c; len = 1; }
    else if ((c >> 5) == 0x6) { cp = c & 0x1F; len = 2; }
    else if ((c >> 4) == 0xE) { cp = c & 0x0F; len = 3; }
    else if ((c >> 3) == 0x1E) { cp = c & 0x07; len = 4; }
    bool ok = len > 0 && i + len <= s.size();
    for (std::size_t k = 1; ok && k < len; ++k) {
      const auto cc = static_cast<unsigned char>(s[i + k]);
      if ((cc >> 6) != 0x2) ok = false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    if (!ok) {
      out.push_back(0xFFFD);
      ++i;
      continue;
    }
    out.push_back(cp);
    i += len;
  }
  return out;
}

void encode_utf8(char32_t cp, std::string& out) {
  if (cp < 0x80) {
    out += static_cast<char>(cp);
  } else if (cp < 0x800) {
    out += static_cast<char>(0xC0 | (cp >> 6));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else if (cp < 0x10000) {
    out += static_cast<char>(0xE0 | (cp >> 12));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  } else {
    out += static_cast<char>(0xF0 | (cp >> 18));
    out += static_cast<char>(0x80 | ((cp >> 12) & 0x3F));
    out += static_cast<char>(0x80 | ((cp >> 6) & 0x3F));
    out += static_cast<char>(0x80 | (cp & 0x3F));
  }
}

char32_t to_lower(char32_t c) {
  if (c >= 'A' && c <= 'Z') return c + 0x20;
  if (c < 0x80) return c;
  if (c >= 0xC0 && c <= 0xDE && c != 0xD7) return c + 0x20;
  if (c >= 0x100 && c <= 0x137) {
    if (c == 0x130) return 'i';
    if (c == 0x131) return c;
    return (c % 2 == 0) ? c + 1 : c;
  }
  if (c >= 0x139 && c <= 0x148) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x14A && c <= 0x177) return (c % 2 == 0) ? c + 1 : c;
  if (c == 0x178) return 0xFF;
  if (c >= 0x179 && c <= 0x17E) return (c % 2 == 1) ? c + 1 : c;
  if (c >= 0x391 && c <= 0x3A9 && c != 0x3A2) return c + 0x20;
  if (c == 0x386) return 0x3AC;
  if (c >= 0x388 && c <= 0x38A) return c + 0x25;
  if (c == 0x38C) return 0x3CC;
  if (c == 0x38E || c == 0x38F) return c + 0x3F;
  if (c >= 0x410 && c <= 0x42F) return c + 0x20;
  if (c >= 0x400 && c <= 0x40F) return c + 0x50;
  return c;
}

bool is_whitespace(char32_t c) {
  return c == ' ' || (c >= 0x09 && c <= 0x0D) || c == 0xA0 || (c >= 0x2000 && c <= 0x200B) ||
         c == 0x202F || c == 0x205F || c == 0x3000 || c == 0xFEFF;
}

bool is_punctuation(char32_t c) {
  if (c < 0x80) return (c >= 0x21 && c <= 0x2F) || (c >= 0x3A && c <= 0x40) || (c >= 0x5B && c <= 0x60) ||
                       (c >= 0x7B && c <= 0x7E);
  switch (c) {
    case 0xA1: case 0xA7: case 0xAB: case 0xB6: case 0xB7: case 0xBB: case 0xBF:
    case 0x60C: case 0x61B: case 0x61F: case 0x6D4:
    case 0x5BE: case 0x5C0: case 0x5C3: case 0x5F3: case 0x5F4:
    case 0x964: case 0x965: case 0x30FB:
      return true;
    default:
      break;
  }
  return (c >= 0x2010 && c <= 0x2027) || (c >= 0x2030 && c <= 0x205E) || (c >= 0x3001 && c <= 0x3003) ||
         (c >= 0x3008 && c <= 0x3011) || (c >= 0x3014 && c <= 0x301F) || (c >= 0xFF01 && c <= 0xFF0F) ||
         (c >= 0xFF1A && c <= 0xFF20) || (c >= 0xFF3B && c <= 0xFF40) || (c >= 0xFF5B && c <= 0xFF65);
}

// Base letters for U+0100..U+017F; '.' leaves the letter alone.
constexpr std::string_view kLatinExtABase =
    "aaaaaaccccccccddddeeeeeeeeeegggggggghhhhiiiiiiiiii..jjkk.llllllllllnnnnnnn..oooooo..rrrrrrsssssss"
    "sttttttuuuuuuuuuuuuwwyyyzzzzzzs";
static_assert(kLatinExtABase.size() == 128);

constexpr std::string_view kLatin1Base =  // U+00C0..U+00FF
    "aaaaaa.ceeeeiiii.nooooo.ouuuuy..aaaaaa.ceeeeiiii.nooooo.ouuuuy.y";
static_assert(kLatin1Base.size() == 64);

char32_t fold(char32_t c) {
  if (c >= 0xC0 && c <= 0xFF) {
    const char b = kLatin1Base[c - 0xC0];
    if (b != '.') return c < 0xE0 && c != 0xDF ? static_cast<char32_t>(b - 0x20) : static_cast<char32_t>(b);
  }
  if (c >= 0x100 && c <= 0x17F) {
    const char b = kLatinExtABase[c - 0x100];
    if (b != '.') return static_cast<char32_t>(b);
  }
  return c;
}

bool is_combining_mark(char32_t c) { return c >= 0x300 && c <= 0x36F; }

}  // namespace

std::string NormalizerConfig::describe() const {
  return "lowercase=" + std::to_string(lowercase) + ",strip_punctuation=" + std::to_string(strip_punctuation) +
         ",collapse_whitespace=" + std::to_string(collapse_whitespace) +
         ",fold_diacritics=" + std::to_string(fold_diacritics);
}

std::string normalize_answer(std::string_view s, const NormalizerConfig& cfg) {
  std::vector<char32_t> cps;
  for (char32_t c : decode_utf8(s)) {
    if (cfg.strip_punctuation && is_punctuation(c)) continue;
    if (cfg.fold_diacritics) {
      if (is_combining_mark(c)) continue;
      c = fold(c);
    }
    if (cfg.lowercase) c = to_lower(c);
    cps.push_back(c);
  }
  std::string out;
  if (!cfg.collapse_whitespace) {
    for (char32_t c : cps) encode_utf8(c, out);
    return out;
  }
  bool pending_space = false;
  for (char32_t c : cps) {
    if (is_whitespace(c)) {
      pending_space = !out.empty();
      continue;
    }
    if (pending_space) out += ' ';
    pending_space = false;
    encode_utf8(c, out);
  }
  return out;
}

// -- metrics ---------------------------------------------------------------------------

Score precision_at_n(const PredictionFile& pred, std::size_t n, const NormalizerConfig& cfg) {
  if (pred.task != TaskType::bli) throw ConfigError("precision@n needs a BLI prediction file");
  if (n == 0) throw ConfigError("precision@n needs n >= 1");
  if (pred.rows.empty()) throw InsufficientDataError("prediction file has no rows");
  Score s;
  s.total = pred.rows.size();
  for (const auto& row : pred.rows) {
    if (row.candidates.size() < n)
      s.warnings.push_back("item " + row.item_id + ": " + std::to_string(row.candidates.size()) +
                           " candidates for n=" + std::to_string(n));
    std::set<std::string> golds;
    for (const auto& g : row.golds) golds.insert(normalize_answer(g, cfg));
    const auto top = std::min(n, row.candidates.size());
    for (std::size_t k = 0; k < top; ++k)
      if (golds.count(normalize_answer(row.candidates[k], cfg))) {
        ++s.correct;
        break;
      }
  }
  s.percentage = 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.total);
  return s;
}

std::optional<std::string> extract_choice_label(std::string_view prediction,
                                                const std::set<std::string>& labels) {
  std::string token;
  auto check = [&]() -> std::optional<std::string> {
    if (!token.empty() && labels.count(token)) return token;
    token.clear();
    return std::nullopt;
  };
  for (char c : prediction) {
    if (std::isalnum(static_cast<unsigned char>(c)) && static_cast<unsigned char>(c) < 0x80) {
      token += c;
      continue;
    }
    if (auto hit = check()) return hit;
  }
  return check();
}

Score mrc_accuracy(const PredictionFile& pred, const std::set<std::string>& labels) {
  if (pred.task != TaskType::mrc) throw ConfigError("MRC accuracy needs an MRC prediction file");
  if (labels.empty()) throw ConfigError("MRC accuracy needs at least one choice label");
  if (pred.rows.empty()) throw InsufficientDataError("prediction file has no rows");
  Score s;
  s.total = pred.rows.size();
  for (const auto& row : pred.rows) {
    const auto got = row.candidates.empty() ? std::nullopt : extract_choice_label(row.candidates.front(), labels);
    if (!got) {
      ++s.unparsed;
      continue;
    }
    for (const auto& g : row.golds)
      if (extract_choice_label(g, labels) == got) {
        ++s.correct;
        break;
      }
  }
  s.percentage = 100.0 * static_cast<double>(s.correct) / static_cast<double>(s.total);
  return s;
}

// -- result table -------------------------------------------------------------------------

Hundredths to_hundredths(double value) {
  if (!std::isfinite(value)) throw ValidationError("score is not finite");
  return static_cast<Hundredths>(std::llround(value * 100.0));
}

Hundredths parse_hundredths(std::string_view raw) {
  static const std::regex re(R"(([+-]?)(\d+)(?:\.(\d{1,2}))?)");
  const std::string s(text::trim(raw));
  std::smatch m;
  if (!std::regex_match(s, m, re)) throw ParseError("not a two-decimal number: '" + s + "'", 0);
  Hundredths v = std::stoll(m[2].str()) * 100;
  if (m[3].matched) {
    auto frac = m[3].str();
    if (frac.size() == 1) frac += '0';
    v += std::stoll(frac);
  }
  return m[1].str() == "-" ? -v : v;
}

std::string format_hundredths(Hundredths v, bool signed_delta) {
  const auto mag = v < 0 ? -v : v;
  const auto frac = mag % 100;
  std::string out = std::to_string(mag / 100) + "." + (frac < 10 ? "0" : "") + std::to_string(frac);
  if (v < 0) return "-" + out;
  return signed_delta ? "+" + out : out;
}

MethodGroup method_group(std::string_view method) {
  static const std::regex shot(R"(\d+-shot)");
  const auto m = text::to_lower_ascii(text::trim(method));
  if (m == "zero-shot" || m == "0-shot") return MethodGroup::zero_shot;
  if (std::regex_match(m, shot)) return MethodGroup::few_shot;
  return MethodGroup::bridge;
}

namespace {

std::string_view group_name(MethodGroup g) {
  switch (g) {
    case MethodGroup::zero_shot: return "zero_shot";
    case MethodGroup::few_shot: return "few_shot";
    case MethodGroup::bridge: return "bridge";
  }
  return "bridge";
}

std::optional<std::string> bridge_of(const std::string& method) {
  const std::string prefix = "bridge=";
  if (text::starts_with(method, prefix) && method.size() > prefix.size()) return method.substr(prefix.size());
  return std::nullopt;
}

}  // namespace

RunScore run_score(const PredictionFile& pred, const Score& score) {
  if (pred.pair.empty()) throw ValidationError("prediction file has no pair");
  if (pred.method.empty()) throw ValidationError("prediction file has no method");
  RunScore r;
  r.pair = pred.pair;
  r.method = pred.method;
  r.bridge = bridge_of(pred.method);
  r.value = to_hundredths(score.percentage);
  return r;
}

ResultTable build_result_table(const std::vector<RunScore>& runs) {
  ResultTable t;
  std::map<std::string, std::vector<const RunScore*>> by_pair;
  for (const auto& r : runs) {
    if (!by_pair.count(r.pair)) t.pairs.push_back(r.pair);
    by_pair[r.pair].push_back(&r);
  }

  std::vector<std::string> order[3];
  for (const auto& r : runs) {
    auto& bucket = order[static_cast<int>(method_group(r.method))];
    if (std::find(bucket.begin(), bucket.end(), r.method) == bucket.end()) bucket.push_back(r.method);
  }
  for (auto& bucket : order) t.methods.insert(t.methods.end(), bucket.begin(), bucket.end());

  for (const auto& pair : t.pairs) {
    const auto& rs = by_pair[pair];
    const RunScore* base = nullptr;
    std::set<std::string> seen;
    for (const auto* r : rs) {
      if (!seen.insert(r->method).second)
        throw ValidationError("pair " + pair + ": method '" + r->method + "' appears twice");
      if (method_group(r->method) != MethodGroup::zero_shot) continue;
      if (base) throw ValidationError("pair " + pair + ": more than one zero-shot run");
      base = r;
    }
    if (!base || base->not_applicable) throw ValidationError("pair " + pair + ": missing zero-shot baseline");
    if (base->is_delta) throw ValidationError("pair " + pair + ": zero-shot baseline must be absolute");

    const auto dashpos = pair.find('-');
    const auto src = pair.substr(0, dashpos);
    const auto tgt = dashpos == std::string::npos ? std::string() : pair.substr(dashpos + 1);

    auto& row = t.cells[pair];
    for (const auto* r : rs) {
      ResultCell c;
      c.method = r->method;
      c.group = method_group(r->method);
      c.bridge = r->bridge ? r->bridge : bridge_of(r->method);
      c.dash = r->not_applicable || (c.bridge && (*c.bridge == src || *c.bridge == tgt));
      if (!c.dash) {
        c.absolute = r->is_delta ? base->value + r->value : r->value;
        c.delta = c.absolute - base->value;
      }
      row[r->method] = c;
    }
    for (auto g : {MethodGroup::few_shot, MethodGroup::bridge}) {
      std::optional<Hundredths> best;
      for (const auto& [m, c] : row)
        if (c.group == g && !c.dash) best = best ? std::max(*best, c.delta) : c.delta;
      if (!best) continue;
      for (auto& [m, c] : row)
        if (c.group == g && !c.dash && c.delta == *best) c.max_gain = true;
    }
  }
  return t;
}

std::string format_result_csv(const ResultTable& table) {
  std::string out = "pair,method,group,bridge,absolute,delta,max_gain\n";
  for (const auto& pair : table.pairs) {
    const auto& row = table.cells.at(pair);
    for (const auto& method : table.methods) {
      const auto it = row.find(method);
      if (it == row.end()) continue;
      const auto& c = it->second;
      out += text::csv_field(pair) + "," + text::csv_field(method) + "," + std::string(group_name(c.group)) +
             "," + text::csv_field(c.bridge.value_or("")) + "," +
             (c.dash ? "-" : format_hundredths(c.absolute)) + "," +
             (c.dash ? "-" : format_hundredths(c.delta, true)) + "," + (c.max_gain ? "1" : "0") + "\n";
    }
  }
  return out;
}

std::string format_result_text(const ResultTable& table) {
  std::vector<std::vector<std::string>> grid;
  std::vector<std::string> header{"method"};
  header.insert(header.end(), table.pairs.begin(), table.pairs.end());
  grid.push_back(header);
  for (const auto& method : table.methods) {
    std::vector<std::string> line{method};
    for (const auto& pair : table.pairs) {
      const auto& row = table.cells.at(pair);
      const auto it = row.find(method);
      if (it == row.end()) {
        line.emplace_back("");
        continue;
      }
      const auto& c = it->second;
      if (c.dash)
        line.emplace_back("-");
      else if (c.group == MethodGroup::zero_shot)
        line.push_back(format_hundredths(c.absolute));
      else
        line.push_back(format_hundredths(c.delta, true) + (c.max_gain ? "*" : ""));
    }
    grid.push_back(std::move(line));
  }
  std::vector<std::size_t> width(header.size(), 0);
  for (const auto& line : grid)
    for (std::size_t k = 0; k < line.size(); ++k) width[k] = std::max(width[k], line[k].size());
  std::string out;
  for (const auto& line : grid) {
    std::string l;
    for (std::size_t k = 0; k < line.size(); ++k) {
      if (k == 0) {
        l += line[k] + std::string(width[k] - line[k].size(), ' ');
      } else {
        l += "  " + std::string(width[k] - line[k].size(), ' ') + line[k];
      }
    }
    while (!l.empty() && l.back() == ' ') l.pop_back();
    out += l + "\n";
  }
  return out;
}

std::vector<RunScore> parse_table_file(std::string_view content) {
  std::vector<RunScore> out;
  std::size_t line_no = 0;
  for (auto line : text::split(content, '\n')) {
    ++line_no;
    const auto body = text::trim(line);
    if (body.empty() || body.front() == '#') continue;
    const auto f = text::parse_csv_line(body);
    if (f.size() == 3 || f.size() == 4) {
      if (line_no == 1 && f[0] == "pair") continue;  // header row
    } else {
      throw ParseError("table line " + std::to_string(line_no) + ": expected pair,method,value[,bridge]", line_no);
    }
    RunScore r;
    r.pair = std::string(text::trim(f[0]));
    r.method = std::string(text::trim(f[1]));
    const auto value = text::trim(f[2]);
    if (r.pair.empty() || r.method.empty())
      throw ParseError("table line " + std::to_string(line_no) + ": empty pair or method", line_no);
    if (value == "-") {
      r.not_applicable = true;
    } else {
      try {
        r.value = parse_hundredths(value);
      } catch (const ParseError& e) {
        throw ParseError("table line " + std::to_string(line_no) + ": " + e.what(), line_no);
      }
      r.is_delta = value.front() == '+' || value.front() == '-';
    }
    if (f.size() == 4 && !text::trim(f[3]).empty()) r.bridge = std::string(text::trim(f[3]));
    out.push_back(std::move(r));
  }
  return out;
}

std::vector<RunScore> read_table_file(const std::filesystem::path& path) {
  return parse_table_file(text::read_file(path));
}

}  // namespace bridgex::eval
