#include <doctest.h>

#include <sstream>

#include "bridgex/activations.hpp"
#include "bridgex/error.hpp"
#include "bridgex/neuron_set.hpp"
#include "bridgex/synthetic.hpp"

using namespace bridgex;
using namespace bridgex::activations;

namespace {

const std::string kHeader =
    "#bridgex-activations\tactivation=post-sigma pre-W2\tmodel=toy\tneurons_per_layer=3\tnum_layers=2\tversion=1\n";

Dump parse(const std::string& body) {
  std::istringstream in(kHeader + body);
  return read_dump(in);
}

ActivationRecord rec(std::string lang, std::int64_t stim, std::int64_t tok, std::uint32_t layer,
                     std::vector<double> v, TokenPart part = TokenPart::answer) {
  return {std::move(lang), stim, tok, layer, part, std::move(v)};
}

}  // namespace

TEST_SUITE("activations") {
  TEST_CASE("neuron set basics") {
    ModelGeometry g{2, 4};
    NeuronSet s(g, {"ar"}, 0.05);
    s.insert({1, 3});
    s.insert({0, 2});
    s.insert({1, 3});
    CHECK(s.size() == 2);
    CHECK(s.contains({0, 2}));
    CHECK(s.ids() == std::vector<NeuronId>{{0, 2}, {1, 3}});
    CHECK_THROWS_AS(s.insert({2, 0}), ValidationError);
    CHECK_THROWS_AS(s.insert({0, 4}), ValidationError);
    NeuronSet other(ModelGeometry{3, 4});
    CHECK_THROWS_AS(set_union(s, other), ConfigError);
  }

  TEST_CASE("dump records parse and round-trip") {
    const auto d = parse("ar\t0\t0\t0\tanswer\t0.5 -1 0\nar\t0\t0\t1\tprompt\t1e-3 0 2\n");
    REQUIRE(d.records.size() == 2);
    CHECK(d.header.model == "toy");
    CHECK(d.records[1].part == TokenPart::prompt);
    CHECK(d.records[1].values[0] == doctest::Approx(0.001));
    std::ostringstream out;
    write_dump(out, d);
    std::istringstream in(out.str());
    const auto back = read_dump(in);
    CHECK(back.records == d.records);
  }

  TEST_CASE("malformed records are format errors naming the record") {
    CHECK_THROWS_WITH_AS(parse("ar\t0\t0\t0\tanswer\t1 2\n"), doctest::Contains("record 0"), FormatError);
    CHECK_THROWS_AS(parse("ar\t0\t0\t5\tanswer\t1 2 3\n"), FormatError);
    CHECK_THROWS_AS(parse("ar\t0\t0\t0\tanswer\t1 nan 3\n"), FormatError);
    CHECK_THROWS_AS(parse("ar\t0\t0\t0\tmiddle\t1 2 3\n"), FormatError);
    CHECK_THROWS_AS(parse("ar\t0\t0\t0\tanswer\t1 2 3\n" + kHeader), FormatError);
    std::istringstream none("");
    CHECK_THROWS_AS(read_dump(none), FormatError);
  }

  TEST_CASE("frequency counts strictly positive values per token") {
    ModelGeometry g{2, 3};
    std::vector<ActivationRecord> r{
        rec("ar", 0, 0, 0, {1.0, 0.0, -1.0}), rec("ar", 0, 0, 1, {0.0, 0.0, 2.0}),
        rec("ar", 0, 1, 0, {1.0, 1.0, 0.0}),  rec("ar", 0, 1, 1, {0.0, 0.0, 0.0}),
        rec("he", 0, 0, 0, {9.0, 9.0, 9.0}),
    };
    const auto p = build_frequency_profile(r, g, "ar");
    CHECK(p.token_count == 2);
    CHECK(p.at(0, 0) == 1.0);
    CHECK(p.at(0, 1) == 0.5);
    CHECK(p.at(0, 2) == 0.0);
    CHECK(p.at(1, 2) == 0.5);

    r.push_back(rec("ar", 0, 1, 1, {1, 1, 1}));
    CHECK_THROWS_AS(build_frequency_profile(r, g, "ar"), FormatError);
    CHECK_THROWS_AS(build_frequency_profile({}, g, "ar"), InsufficientDataError);
  }

  TEST_CASE("answer-only scope ignores prompt tokens") {
    ModelGeometry g{1, 2};
    std::vector<ActivationRecord> r{rec("ar", 0, 0, 0, {1, 1}, TokenPart::prompt), rec("ar", 0, 1, 0, {1, 0})};
    const auto p = build_frequency_profile(r, g, "ar", TokenScope::answer_only);
    CHECK(p.token_count == 1);
    CHECK(p.at(0, 1) == 0.0);
  }

  TEST_CASE("partitioned counting merges to the same profile") {
    ModelGeometry g{1, 2};
    FrequencyCounter a("ar", g), b("ar", g), all("ar", g);
    const auto r1 = rec("ar", 0, 0, 0, {1, 0});
    const auto r2 = rec("ar", 1, 0, 0, {1, 1});
    a.add(r1);
    b.add(r2);
    all.add(r1);
    all.add(r2);
    a.merge(b);
    CHECK(a.finish().freq == all.finish().freq);
    CHECK_THROWS_AS(a.merge(b), FormatError);
  }

  TEST_CASE("profile files round-trip") {
    FrequencyProfile p{"sw", {2, 2}, {0.0, 0.25, 1.0 / 3.0, 1.0}, 12};
    std::istringstream in(serialize_profile(p));
    const auto back = parse_profile(in);
    CHECK(back.language == "sw");
    CHECK(back.freq == p.freq);
    CHECK(back.token_count == 12);
  }

  TEST_CASE("activation matrix reduces tokens and orders directions") {
    ModelGeometry g{1, 2};
    NeuronSet set(g);
    set.insert({0, 1});
    std::vector<ActivationRecord> r{
        rec("ar", 0, 0, 0, {0, 1.0}), rec("ar", 0, 1, 0, {0, 3.0}),
        rec("he", 5, 0, 0, {0, 10.0}), rec("ar", 1, 0, 0, {0, 4.0}), rec("he", 6, 0, 0, {0, 20.0}),
    };
    const auto mean = build_activation_matrix(r, set, {"ar", "he"}, 2, Reduction::mean_over_tokens);
    REQUIRE(mean.values.rows() == 1);
    REQUIRE(mean.values.cols() == 4);
    CHECK(mean.values(0, 0) == 2.0);
    CHECK(mean.values(0, 1) == 4.0);
    CHECK(mean.values(0, 2) == 10.0);
    CHECK(mean.stimulus_ids == std::vector<std::int64_t>{0, 1, 5, 6});
    const auto last = build_activation_matrix(r, set, {"ar", "he"}, 2, Reduction::last_token);
    CHECK(last.values(0, 0) == 3.0);
    CHECK_THROWS_WITH_AS(build_activation_matrix(r, set, {"ar", "he"}, 3), doctest::Contains("ar->he"),
                         InsufficientDataError);
  }

  TEST_CASE("synthetic generator plants frequencies") {
    const auto spec = bridge_scenario({2, 32}, "ar", "he", {{"en", 1.0}, {"de", 0.0}}, {0, 1}, 2, 5, 3);
    const auto dumps = generate_synthetic(spec, 400);
    const auto ar = build_frequency_profile(dumps.corpus.records, spec.geometry, "ar");
    for (const auto& id : spec.planted.front().neurons) CHECK(ar.at(id) > 0.8);
    REQUIRE(dumps.probe);
    CHECK(dumps.probe->records.size() == 2 * 5 * 2);
    const auto again = generate_synthetic(spec, 400);
    CHECK(again.corpus.records == dumps.corpus.records);
  }
}
