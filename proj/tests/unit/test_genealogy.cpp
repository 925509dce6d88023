#include <doctest.h>

#include "bridgex/error.hpp"
#include "bridgex/genealogy.hpp"
#include "oracles.hpp"

using namespace bridgex;
using namespace bridgex::genealogy;

namespace {

std::size_t parse_offset(const std::string& text) {
  try {
    parse_newick(text);
  } catch (const ParseError& e) {
    return e.location();
  }
  FAIL("expected a parse error for " << text);
  return 0;
}

}  // namespace

TEST_SUITE("genealogy") {
  TEST_CASE("labels reduce to glottocodes") {
    CHECK(normalize_label("Mandarin Chinese [mand1415]") == "_mand1415_");
    CHECK(normalize_label("[sini1245]") == "_sini1245_");
    CHECK(normalize_label("sini1245") == "_sini1245_");
    CHECK(normalize_label("  English ") == "English");
  }

  TEST_CASE("toy tree") {
    const auto t = parse_newick("((A,B),C);");
    const auto norms = FamilyNorms::defaults();
    CHECK(t.max_leaf_distance() == 3);
    CHECK(node_distance(t, "A", "B") == 2);
    CHECK(similarity(t, "A", "B", norms) == 1.0 / 3.0);
    CHECK(similarity(t, "A", "C", norms) == 0.0);
    CHECK(similarity(t, "C", "C", norms) == 1.0);
  }

  TEST_CASE("newick errors carry the offset") {
    CHECK(parse_offset("((A,B),C)") == 9);
    CHECK(parse_offset("(A,B;") == 4);
    CHECK(parse_offset("(A,,B);") == 2);
    CHECK(parse_offset("(A,B);x") == 6);
    CHECK(parse_offset("(A,B):;") == 6);
    CHECK_THROWS_WITH(parse_newick("(A,B))"), doctest::Contains("at offset 5"));
    CHECK_THROWS_AS(parse_newick("(A,A);"), ValidationError);
  }

  TEST_CASE("quoted labels, lengths, and bracket codes") {
    const auto t = parse_newick("('It''s',(Old English [olde1238]:1.5,'B C':2)Anglic:0.5)Root;");
    CHECK(t.has_leaf("It's"));
    CHECK(t.has_leaf("_olde1238_"));
    CHECK(t.has_leaf("B C"));
    CHECK(t.family() == "Root");
    CHECK(t.depth("_olde1238_") == 2);
    CHECK(t.leaf_labels().size() == 3);
  }

  TEST_CASE("random trees agree with breadth-first distances") {
    oracle::Gen g(31);
    const auto norms = FamilyNorms::defaults();
    for (int trial = 0; trial < 30; ++trial) {
      const auto rt = oracle::random_tree(g, 3 + g.below(12));
      const auto t = parse_newick(rt.newick);
      std::size_t dmax = 0;
      for (const auto& [a, na] : rt.leaf_node)
        for (const auto& [b, nb] : rt.leaf_node) dmax = std::max(dmax, oracle::bfs_distance(rt.adj, na, nb));
      CHECK(t.max_leaf_distance() == dmax);
      for (const auto& [a, na] : rt.leaf_node)
        for (const auto& [b, nb] : rt.leaf_node) {
          const auto d = oracle::bfs_distance(rt.adj, na, nb);
          CHECK(node_distance(t, a, b) == d);
          const double da = static_cast<double>(rt.depth[na]);
          const double db = static_cast<double>(rt.depth[nb]);
          const double want = (1.0 - std::min(1.0, static_cast<double>(d) / static_cast<double>(dmax))) *
                              (1.0 - std::abs(da - db) / std::max(da, db));
          CHECK(similarity(t, a, b, norms) == doctest::Approx(want).epsilon(1e-12));
          CHECK(similarity(t, a, b, norms) == similarity(t, b, a, norms));
        }
    }
  }

  TEST_CASE("family normalizers") {
    const auto norms = FamilyNorms::defaults();
    auto t = parse_newick("((A,B),C)[sini1245];");
    CHECK(t.family() == "_sini1245_");
    CHECK(norms.normalizer(t) == 80.0);
    t.set_family("Indo-European");
    CHECK(norms.normalizer(t) == 75.0);
    auto plain = parse_newick("((A,B),C);");
    plain.set_family("Uralic");
    CHECK(norms.normalizer(plain) == 3.0);
    auto strict = FamilyNorms::defaults();
    strict.set_fallback(FamilyNorms::Fallback::none);
    CHECK_THROWS_AS(strict.normalizer(plain), ConfigError);
    strict.set("uralic", 6);
    CHECK(strict.normalizer(plain) == 6.0);
    CHECK_THROWS_AS(strict.set("x", 0), ConfigError);
  }

  TEST_CASE("matrix over several trees") {
    std::vector<PhyloTree> trees{parse_newick("((A,B),C);"), parse_newick("(D,E);")};
    const auto m = genealogy_matrix(trees, {"a", "b", "c", "d"}, parse_code_table("a A\nb B\n# c\nc C\nd D\n"),
                                    FamilyNorms::defaults());
    CHECK(*m.at("a", "b") == 1.0 / 3.0);
    CHECK(*m.at("a", "d") == 0.0);
    CHECK(*m.at("d", "d") == 1.0);
    CHECK_THROWS_WITH_AS(genealogy_matrix(trees, {"a", "x", "y"}, parse_code_table("a A\n"), FamilyNorms::defaults()),
                         doctest::Contains("x (not found) y (not found)"), LookupError);
    CHECK_THROWS_AS(parse_code_table("a\n"), ParseError);
  }
}
