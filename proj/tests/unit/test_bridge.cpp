#include <doctest.h>

#include "bridgex/bridge.hpp"
#include "bridgex/error.hpp"
#include "oracles.hpp"
#include "scenario.hpp"

using namespace bridgex;
using namespace bridgex::bridge;

namespace {

Eigen::MatrixXd pool_oracle(const Eigen::MatrixXd& m, std::size_t target) {
  const auto rows = static_cast<std::size_t>(m.rows());
  if (target >= rows) return m;
  Eigen::MatrixXd out(static_cast<Eigen::Index>(target), m.cols());
  for (std::size_t b = 0; b < target; ++b) {
    std::vector<std::size_t> members;
    for (std::size_t r = 0; r < rows; ++r)
      if (r * target / rows == b) members.push_back(r);
    for (Eigen::Index c = 0; c < m.cols(); ++c) {
      double s = 0.0;
      for (auto r : members) s += m(static_cast<Eigen::Index>(r), c);
      out(static_cast<Eigen::Index>(b), c) = s / static_cast<double>(members.size());
    }
  }
  return out;
}

double row_term_oracle(const Eigen::MatrixXd& rows, const Eigen::MatrixXd& pooled) {
  const auto l = oracle::gram_rbf_median(pooled);
  double best = -1e300;
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    best = std::max(best, oracle::hsic_dense(oracle::gram_rbf_median(rows.row(i)), l));
  return best;
}

NeuronSet ids(ModelGeometry g, std::vector<NeuronId> v) { return NeuronSet::from_ids(g, v); }

// Probe matrix over explicit rows with random values.
BridgeInputs hand_inputs(ModelGeometry g, NeuronSet overlap, std::map<std::string, NeuronSet> sets,
                         oracle::Gen& gen) {
  NeuronSet all = overlap;
  for (const auto& [c, s] : sets) all = set_union(all, s);
  activations::ActivationMatrix m;
  m.rows = all.ids();
  for (std::int64_t i = 0; i < 8; ++i) m.stimulus_ids.push_back(i);
  m.direction_split = 4;
  m.values = gen.gaussian(static_cast<Eigen::Index>(m.rows.size()), 8);
  return {{"ar", "he"}, std::move(overlap), std::move(sets), std::move(m)};
}

}  // namespace

TEST_SUITE("bridge") {
  TEST_CASE("exclusion removes the overlap and every other candidate") {
    ModelGeometry g{1, 8};
    const auto ex = exclusion_set(ids(g, {{0, 0}, {0, 1}, {0, 2}, {0, 3}}), ids(g, {{0, 1}}),
                                  {ids(g, {{0, 3}}), ids(g, {{0, 7}})});
    CHECK(ex.ids() == std::vector<NeuronId>{{0, 0}, {0, 2}});
  }

  TEST_CASE("average pooling uses contiguous blocks") {
    Eigen::MatrixXd m(5, 2);
    m << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10;
    const auto p = average_pool_rows(m, 2);
    REQUIRE(p.rows() == 2);
    CHECK(p(0, 0) == 3.0);
    CHECK(p(1, 0) == 8.0);
    CHECK(average_pool_rows(m, 9) == m);
    CHECK_THROWS_AS(average_pool_rows(m, 0), ShapeError);
    oracle::Gen g(21);
    for (int t = 0; t < 20; ++t) {
      const auto x = g.gaussian(static_cast<Eigen::Index>(1 + g.below(12)), 4);
      const auto target = 1 + g.below(12);
      CHECK((average_pool_rows(x, target) - pool_oracle(x, target)).cwiseAbs().maxCoeff() < 1e-14);
    }
  }

  TEST_CASE("bidirectional max matches the oracle") {
    oracle::Gen g(22);
    for (int t = 0; t < 15; ++t) {
      const auto n = static_cast<Eigen::Index>(4 + g.below(12));
      const auto x = g.gaussian(static_cast<Eigen::Index>(1 + g.below(5)), n);
      const auto y = g.gaussian(static_cast<Eigen::Index>(1 + g.below(5)), n);
      HsicConfig cfg;
      const auto pool = static_cast<std::size_t>(std::min(x.rows(), y.rows()));
      const double want =
          0.5 * (row_term_oracle(x, pool_oracle(y, pool)) + row_term_oracle(y, pool_oracle(x, pool)));
      CHECK(bidirectional_max_hsic(x, y, cfg) == doctest::Approx(want).epsilon(1e-10));

      cfg.pool_target = 2;
      const double fixed = 0.5 * (row_term_oracle(x, pool_oracle(y, 2)) + row_term_oracle(y, pool_oracle(x, 2)));
      CHECK(bidirectional_max_hsic(x, y, cfg) == doctest::Approx(fixed).epsilon(1e-10));
    }
  }

  TEST_CASE("adding rows never lowers the row-to-matrix term") {
    oracle::Gen g(23);
    HsicConfig cfg;
    for (int t = 0; t < 20; ++t) {
      const auto x = g.gaussian(2, 10);
      const auto y = g.gaussian(3, 10);
      Eigen::MatrixXd more(3, 10);
      more << x, g.gaussian(1, 10);
      CHECK(row_to_matrix_max_hsic(more, y, cfg) >= row_to_matrix_max_hsic(x, y, cfg));
      Eigen::MatrixXd dup(3, 10);
      dup << x, x.row(0);
      CHECK(row_to_matrix_max_hsic(dup, y, cfg) == row_to_matrix_max_hsic(x, y, cfg));
    }
  }

  TEST_CASE("empty sides are undefined and stimulus counts must agree") {
    HsicConfig cfg;
    CHECK_THROWS_AS(bidirectional_max_hsic(Eigen::MatrixXd(0, 5), Eigen::MatrixXd::Ones(1, 5), cfg), UndefinedError);
    CHECK_THROWS_AS(bidirectional_max_hsic(Eigen::MatrixXd::Ones(1, 4), Eigen::MatrixXd::Ones(1, 5), cfg), ShapeError);
  }

  TEST_CASE("layer windows") {
    CHECK(parse_layer_window("10-21") == LayerWindow{10, 21});
    CHECK(parse_layer_window(" 7 ") == LayerWindow{7, 7});
    CHECK(parse_layer_window("3-5").size() == 3);
    CHECK_THROWS_AS(parse_layer_window("5-3"), ConfigError);
    CHECK_THROWS_AS(parse_layer_window("a-b"), ConfigError);
    HsicConfig cfg;
    cfg.window = {0, 4};
    CHECK_THROWS_AS(cfg.validate({4, 8}), ConfigError);
    cfg.window = {0, 3};
    cfg.pool_target = 0;
    CHECK_THROWS_AS(cfg.validate({4, 8}), ConfigError);
  }

  TEST_CASE("stable window is the longest plateau near the maximum") {
    CHECK(stable_window({0.2, 0.9, 0.91, 0.9, 0.3}, 0.05) == LayerWindow{1, 3});
    CHECK(stable_window({0.9, 0.2, 0.9, 0.9}, 0.0) == LayerWindow{2, 3});
    CHECK(stable_window({0.9, 0.2, 0.9}, 0.0) == LayerWindow{0, 0});
    CHECK(stable_window({0.5}, 0.1) == LayerWindow{0, 0});
    CHECK_THROWS_AS(stable_window({}, 0.1), ValidationError);
  }

  TEST_CASE("layer embedding similarity") {
    std::vector<Eigen::VectorXd> a{Eigen::Vector2d(1, 0), Eigen::Vector2d(1, 1)};
    std::vector<Eigen::VectorXd> b{Eigen::Vector2d(0, 3), Eigen::Vector2d(2, 2)};
    const auto s = layer_embedding_similarity(a, b);
    CHECK(s[0] == doctest::Approx(0.0));
    CHECK(s[1] == doctest::Approx(1.0));
    b[0] = Eigen::Vector2d(0, 0);
    CHECK_THROWS_AS(layer_embedding_similarity(a, b), UndefinedError);
    b.pop_back();
    CHECK_THROWS_AS(layer_embedding_similarity(a, b), ShapeError);
  }

  TEST_CASE("layers without neurons are skipped and reported") {
    oracle::Gen gen(24);
    ModelGeometry g{2, 4};
    auto inputs = hand_inputs(g, ids(g, {{0, 0}, {1, 0}}),
                              {{"en", ids(g, {{0, 1}, {0, 2}})}, {"de", ids(g, {{1, 3}})}, {"fr", ids(g, {{0, 0}})}},
                              gen);
    HsicConfig cfg;
    cfg.window = {0, 1};
    const auto en = score_bridge("en", inputs, {"en", "de"}, cfg);
    CHECK(en.per_layer.size() == 1);
    CHECK(en.skipped_layers == std::vector<std::uint32_t>{1});
    CHECK(en.aggregate == en.per_layer.at(0));

    const auto sel = select_bridge(inputs, {"en", "de", "fr"}, cfg);
    CHECK(sel.unscorable.count("fr") == 1);
    CHECK(sel.ranking.size() == 2);
    const auto report = export_bridge_report(inputs, sel);
    CHECK(report.find("ar,he,en,1,\n") != std::string::npos);
    CHECK(report.find("candidate,aggregate,rank,selected") != std::string::npos);
  }

  TEST_CASE("candidate lists are checked") {
    oracle::Gen gen(25);
    ModelGeometry g{1, 4};
    auto inputs = hand_inputs(g, ids(g, {{0, 0}}), {{"en", ids(g, {{0, 1}})}}, gen);
    HsicConfig cfg;
    CHECK_THROWS_AS(select_bridge(inputs, {"en", "ar"}, cfg), ValidationError);
    CHECK_THROWS_AS(select_bridge(inputs, {"en", "en"}, cfg), ValidationError);
    CHECK_THROWS_AS(select_bridge(inputs, {}, cfg), SelectionError);
    CHECK_THROWS_AS(select_bridge(inputs, {"xx"}, cfg), LookupError);
  }

  TEST_CASE("the planted bridge is recovered on a small model") {
    for (std::uint64_t seed : {1, 2, 3}) {
      const auto r = scenario::recover(seed, {3, 32}, 16);
      CHECK(r.selection.selected == "en");
      CHECK(r.overlap_size > 0);
    }
  }
}
