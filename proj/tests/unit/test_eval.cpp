#include <doctest.h>

#include "bridgex/error.hpp"
#include "bridgex/evalharness.hpp"
#include "oracles.hpp"

using namespace bridgex;
using namespace bridgex::eval;

namespace {

PredictionFile bli(std::vector<PredictionRow> rows, std::string method = "zero-shot") {
  return {TaskType::bli, "toy", std::move(method), "de-en", std::move(rows)};
}

PredictionRow row(std::string id, std::vector<std::string> c, std::vector<std::string> g) {
  return {std::move(id), std::move(c), std::move(g)};
}

RunScore run(std::string pair, std::string method, std::string value) {
  RunScore r{std::move(pair), std::move(method), std::nullopt, 0, false, false};
  if (value == "-") {
    r.not_applicable = true;
  } else {
    r.is_delta = value[0] == '+' || value[0] == '-';
    r.value = parse_hundredths(value);
  }
  return r;
}

const ResultCell& cell(const ResultTable& t, const std::string& pair, const std::string& method) {
  return t.cells.at(pair).at(method);
}

}  // namespace

TEST_SUITE("eval") {
  TEST_CASE("precision at 1 by hand") {
    const auto p = bli({row("1", {"cat"}, {"cat"}), row("2", {"dog"}, {"hound", "dog"}), row("3", {"x"}, {"y"})});
    const auto s = precision_at_n(p, 1);
    CHECK(s.correct == 2);
    CHECK(s.total == 3);
    CHECK(format_hundredths(to_hundredths(s.percentage)) == "66.67");
    CHECK(precision_at_n(bli({row("1", {"a"}, {"a"})}), 1).percentage == 100.0);
  }

  TEST_CASE("normalization makes case and trailing punctuation irrelevant") {
    const auto p = bli({row("1", {"Katze"}, {"katze."})});
    CHECK(precision_at_n(p, 1).correct == 1);
    NormalizerConfig raw{false, false, false, false};
    CHECK(precision_at_n(p, 1, raw).correct == 0);
    CHECK(raw.describe() == "lowercase=0,strip_punctuation=0,collapse_whitespace=0,fold_diacritics=0");
  }

  TEST_CASE("precision is monotone in n and ignores row order") {
    oracle::Gen g(51);
    for (int t = 0; t < 20; ++t) {
      std::vector<PredictionRow> rows;
      for (std::size_t i = 0, n = 1 + g.below(20); i < n; ++i) {
        std::vector<std::string> cands;
        for (std::size_t k = 0, m = g.below(6); k < m; ++k) cands.push_back("w" + std::to_string(g.below(5)));
        rows.push_back(row(std::to_string(i), cands, {"w" + std::to_string(g.below(5))}));
      }
      double last = -1;
      for (std::size_t n = 1; n <= 6; ++n) {
        const double v = precision_at_n(bli(rows), n).percentage;
        CHECK(v >= last);
        last = v;
      }
      auto shuffled = rows;
      std::shuffle(shuffled.begin(), shuffled.end(), g.engine());
      CHECK(precision_at_n(bli(shuffled), 3).percentage == precision_at_n(bli(rows), 3).percentage);
    }
  }

  TEST_CASE("short candidate lists warn; bad arguments throw") {
    const auto s = precision_at_n(bli({row("1", {"a"}, {"b"}), row("2", {}, {"b"})}), 3);
    CHECK(s.warnings.size() == 2);
    CHECK(s.correct == 0);
    CHECK_THROWS_AS(precision_at_n(bli({}), 1), InsufficientDataError);
    CHECK_THROWS_AS(precision_at_n(bli({row("1", {"a"}, {"a"})}), 0), ConfigError);
    auto mrc = bli({row("1", {"A"}, {"A"})});
    mrc.task = TaskType::mrc;
    CHECK_THROWS_AS(precision_at_n(mrc, 1), ConfigError);
  }

  TEST_CASE("choice labels") {
    const std::set<std::string> labels{"A", "B", "C", "D"};
    CHECK(extract_choice_label("B) because", labels) == "B");
    CHECK(extract_choice_label("The answer is C.", labels) == "C");
    CHECK(extract_choice_label("(D)", labels) == "D");
    CHECK_FALSE(extract_choice_label("because", labels).has_value());
    CHECK_FALSE(extract_choice_label("b", labels).has_value());
  }

  TEST_CASE("MRC accuracy counts unparsed rows") {
    PredictionFile p{TaskType::mrc, "toy", "zero-shot", "en-sw",
                     {row("1", {"A"}, {"A"}), row("2", {"B) x"}, {"B"}), row("3", {"C"}, {"C"}), row("4", {"none"}, {"D"})}};
    const auto s = mrc_accuracy(p, {"A", "B", "C", "D"});
    CHECK(s.percentage == 75.0);
    CHECK(s.unparsed == 1);
  }

  TEST_CASE("prediction files") {
    const std::string text = "# task=bli\tmodel=toy\tmethod=bridge=en\tpair=ar-he\n1\tkelev|kelb\tkelev\n# note\n2\t\tchatul\n";
    const auto p = parse_prediction_file(text);
    CHECK(p.method == "bridge=en");
    REQUIRE(p.rows.size() == 2);
    CHECK(p.rows[0].candidates.size() == 2);
    CHECK(p.rows[1].candidates.empty());
    CHECK(parse_prediction_file(serialize_prediction_file(p)).rows[0].golds == p.rows[0].golds);
    try {
      parse_prediction_file(text + "1\ta\tb\n");
      FAIL("expected duplicate id error");
    } catch (const ParseError& e) {
      CHECK(e.location() == 5);
    }
    CHECK_THROWS_AS(parse_prediction_file("1\ta\tb\n"), ParseError);
    CHECK_THROWS_AS(parse_prediction_file("# task=bli\tmodel=m\tmethod=x\tpair=a-b\n1\ta\t\n"), ParseError);
    CHECK_THROWS_AS(parse_prediction_file("# task=bli\tmodel=m\tmethod=x\tpair=a-b\n1\ta\n"), ParseError);
  }

  TEST_CASE("normalizer handles non-ASCII text") {
    const NormalizerConfig cfg;
    CHECK(normalize_answer("  ÉCOLE  normale ", cfg) == "école normale");
    CHECK(normalize_answer("ΚΑΛΗΜΕΡΑ", cfg) == "καλημερα");
    CHECK(normalize_answer("КОШКА!", cfg) == "кошка");
    CHECK(normalize_answer("猫。", cfg) == "猫");
    CHECK(normalize_answer("«Hund»", cfg) == "hund");
    CHECK(normalize_answer("ＡＢＣ！", cfg) == "ＡＢＣ");
    NormalizerConfig fold;
    fold.fold_diacritics = true;
    CHECK(normalize_answer("Ça déjà Łódź", fold) == "ca deja lodz");
    CHECK(normalize_answer("e\xCC\x81t\xC3\xA9", fold) == "ete");
  }

  TEST_CASE("fixed-point arithmetic") {
    CHECK(parse_hundredths("47.00") + parse_hundredths("+17.50") == parse_hundredths("64.50"));
    CHECK(format_hundredths(parse_hundredths("47.00") + parse_hundredths("17.5")) == "64.50");
    CHECK(parse_hundredths("-9.5") == -950);
    CHECK(format_hundredths(-950, true) == "-9.50");
    CHECK(format_hundredths(5, true) == "+0.05");
    CHECK(to_hundredths(66.666666) == 6667);
    CHECK_THROWS_AS(parse_hundredths("1.234"), ParseError);
    CHECK(method_group("0-shot") == MethodGroup::zero_shot);
    CHECK(method_group("3-shot") == MethodGroup::few_shot);
    CHECK(method_group("bridge=en") == MethodGroup::bridge);
  }

  TEST_CASE("result table deltas, dashes and ties") {
    const auto t = build_result_table({run("zh-ja", "zero-shot", "47.00"), run("zh-ja", "3-shot", "+2.00"),
                                       run("zh-ja", "bridge=en", "+17.50"), run("zh-ja", "bridge=ko", "64.50"),
                                       run("zh-ja", "bridge=ja", "50.00"), run("ar-he", "zero-shot", "10.00"),
                                       run("ar-he", "bridge=en", "-")});
    CHECK(t.pairs == std::vector<std::string>{"zh-ja", "ar-he"});
    CHECK(t.methods.front() == "zero-shot");
    CHECK(t.methods[1] == "3-shot");
    CHECK(format_hundredths(cell(t, "zh-ja", "bridge=en").absolute) == "64.50");
    CHECK(cell(t, "zh-ja", "bridge=ko").delta == 1750);
    CHECK(cell(t, "zh-ja", "bridge=en").max_gain);
    CHECK(cell(t, "zh-ja", "bridge=ko").max_gain);
    CHECK(cell(t, "zh-ja", "3-shot").max_gain);
    CHECK(cell(t, "zh-ja", "bridge=ja").dash);
    CHECK_FALSE(cell(t, "zh-ja", "bridge=ja").max_gain);
    CHECK(cell(t, "ar-he", "bridge=en").dash);

    const auto csv = format_result_csv(t);
    CHECK(csv.find("zh-ja,bridge=en,bridge,en,64.50,+17.50,1\n") != std::string::npos);
    CHECK(csv.find("zh-ja,bridge=ja,bridge,ja,-,-,0\n") != std::string::npos);
    const auto text = format_result_text(t);
    CHECK(text.find("+17.50*") != std::string::npos);
  }

  TEST_CASE("result table validation") {
    CHECK_THROWS_WITH_AS(build_result_table({run("zh-ja", "bridge=en", "+1.00")}), doctest::Contains("zh-ja"),
                         ValidationError);
    CHECK_THROWS_AS(build_result_table({run("a-b", "zero-shot", "1.00"), run("a-b", "0-shot", "2.00")}),
                    ValidationError);
    CHECK_THROWS_AS(build_result_table({run("a-b", "zero-shot", "1.00"), run("a-b", "zero-shot", "1.00")}),
                    ValidationError);
    CHECK_THROWS_AS(build_result_table({run("a-b", "zero-shot", "+1.00")}), ValidationError);
  }

  TEST_CASE("table files") {
    const auto runs = parse_table_file("pair,method,value,bridge\nzh-ja,zero-shot,47.00\nzh-ja,bridge=en,+17.50,en\nzh-ja,x,-\n");
    REQUIRE(runs.size() == 3);
    CHECK(runs[1].is_delta);
    CHECK(runs[1].bridge == "en");
    CHECK(runs[2].not_applicable);
    const auto t = build_result_table(runs);
    CHECK(cell(t, "zh-ja", "bridge=en").absolute == 6450);
    CHECK_THROWS_AS(parse_table_file("zh-ja,zero-shot\n"), ParseError);
  }

  TEST_CASE("run scores from prediction files") {
    auto p = bli({row("1", {"a"}, {"a"})}, "bridge=en");
    const auto r = run_score(p, precision_at_n(p, 1));
    CHECK(r.bridge == "en");
    CHECK(r.value == 10000);
    CHECK_FALSE(r.is_delta);
  }
}
