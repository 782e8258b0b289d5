#include <cmath>
#include <random>

#include "doctest.h"
#include "dendrograph/dendrogram.hpp"
#include "testutil.hpp"

using namespace dendrograph;

namespace {

Dendrogram path3_dendrogram() {
  return Dendrogram::from_merges({"a", "b", "c"}, {{0, 1, 0.5}, {3, 2, 0.75}});
}

// random regular dendrogram with strictly increasing heights
Dendrogram random_regular(int n, unsigned seed) {
  Dendrogram shape = testutil::random_shape(n, [&] {
    std::vector<std::string> labels;
    for (int u = 0; u < n; ++u) labels.push_back("n" + std::to_string(u));
    return labels;
  }(), seed);
  std::mt19937_64 rng(seed ^ 0x9e3779b9);
  std::uniform_real_distribution<double> step(0.01, 1.0);
  std::vector<double> heights;
  double h = 0.0;
  for (int k = 0; k < n - 1; ++k) {
    h += step(rng);
    heights.push_back(h);
  }
  return shape.with_heights(std::move(heights));
}

}  // namespace

TEST_SUITE_BEGIN("dendrogram");

TEST_CASE("construction validates the tree") {
  CHECK_THROWS_AS(Dendrogram::from_merges({"a", "b", "c"}, {{0, 1, 0.5}}), ValidationError);
  // child used twice
  CHECK_THROWS_AS(Dendrogram::from_merges({"a", "b", "c"}, {{0, 1, 0.5}, {0, 2, 0.75}}),
                  ValidationError);
  // forward reference
  CHECK_THROWS_AS(Dendrogram::from_merges({"a", "b", "c"}, {{0, 4, 0.5}, {3, 2, 0.75}}),
                  ValidationError);
  // non-positive height
  CHECK_THROWS_AS(Dendrogram::from_merges({"a", "b"}, {{0, 1, 0.0}}), ValidationError);
  CHECK_NOTHROW(Dendrogram::from_merges({"a", "b"}, {{0, 1, 1.0}}));
}

TEST_CASE("ultrametric distance") {
  const Dendrogram d = path3_dendrogram();
  CHECK(d.ultrametric_distance(0, 1) == 0.5);
  CHECK(d.ultrametric_distance(0, 2) == 0.75);
  CHECK(d.ultrametric_distance(1, 2) == 0.75);
  CHECK(d.ultrametric_distance(2, 0) == d.ultrametric_distance(0, 2));
  CHECK_THROWS_AS(d.ultrametric_distance(1, 1), ValidationError);
}

TEST_CASE("matrix agrees with per-pair distances") {
  for (unsigned seed = 1; seed <= 4; ++seed) {
    const int n = 5 + static_cast<int>(seed) * 11;
    const Dendrogram d = random_regular(n, seed);
    const std::vector<double> parallel = d.ultrametric_matrix(true);
    const std::vector<double> serial = d.ultrametric_matrix(false);
    CHECK(parallel == serial);  // disjoint writes: bitwise equal
    for (int u = 0; u < n; ++u) {
      for (int v = 0; v < n; ++v) {
        const double expected = u == v ? 0.0 : d.ultrametric_distance(u, v);
        CHECK(parallel[static_cast<std::size_t>(u * n + v)] == expected);
      }
    }
  }
}

TEST_CASE("ultrametric triple check") {
  CHECK(check_ultrametric(path3_dendrogram()));
  for (unsigned seed = 1; seed <= 4; ++seed) CHECK(check_ultrametric(random_regular(20, seed)));

  // tampered heights: root below its child
  const Dendrogram bad = Dendrogram::from_merges({"a", "b", "c"}, {{0, 1, 0.75}, {3, 2, 0.5}});
  CHECK_FALSE(bad.regular());
  CHECK_FALSE(check_ultrametric(bad));
}

TEST_CASE("cut by cluster count") {
  const Dendrogram d = path3_dendrogram();
  SUBCASE("k=2 removes the root") {
    const Partition p = cut_k(d, 2);
    REQUIRE(p.blocks.size() == 2);
    CHECK(p.blocks[0] == std::vector<int>{0, 1});
    CHECK(p.blocks[1] == std::vector<int>{2});
  }
  SUBCASE("extremes") {
    CHECK(cut_k(d, 1).blocks == std::vector<std::vector<int>>{{0, 1, 2}});
    CHECK(cut_k(d, 3).blocks == std::vector<std::vector<int>>{{0}, {1}, {2}});
  }
  SUBCASE("out of range") {
    CHECK_THROWS_AS(cut_k(d, 0), ValidationError);
    CHECK_THROWS_AS(cut_k(d, 4), ValidationError);
  }
  SUBCASE("each cut refines the coarser one") {
    const Dendrogram big = random_regular(24, 7);
    for (int k = 2; k <= 24; ++k) {
      const Partition coarse = cut_k(big, k - 1);
      const Partition fine = cut_k(big, k);
      CHECK(fine.blocks.size() == static_cast<std::size_t>(k));
      for (const auto& block : fine.blocks) {
        // every fine block lies inside one coarse block
        int hits = 0;
        for (const auto& super : coarse.blocks) {
          if (std::includes(super.begin(), super.end(), block.begin(), block.end())) ++hits;
        }
        CHECK(hits == 1);
      }
    }
  }
}

TEST_CASE("cut by height") {
  const Dendrogram d = path3_dendrogram();
  CHECK(cut_height(d, 0.6).blocks == std::vector<std::vector<int>>{{0, 1}, {2}});
  CHECK(cut_height(d, 0.0).blocks == std::vector<std::vector<int>>{{0}, {1}, {2}});
  CHECK(cut_height(d, 0.75).blocks == std::vector<std::vector<int>>{{0, 1, 2}});
  CHECK(cut_height(d, 10.0).blocks == std::vector<std::vector<int>>{{0, 1, 2}});
}

TEST_CASE("json round trip") {
  const Dendrogram d = path3_dendrogram();
  const std::string text = to_json(d);
  CHECK(text ==
        R"({"labels":["a","b","c"],"merges":[[0,1,0.5],[3,2,0.75]],"n_leaves":3})");
  const Dendrogram back = dendrogram_from_json(text);
  CHECK(back.labels() == d.labels());
  CHECK(back.merges() == d.merges());

  for (unsigned seed = 1; seed <= 6; ++seed) {
    const Dendrogram r = random_regular(17, seed);
    const Dendrogram rr = dendrogram_from_json(to_json(r));
    CHECK(rr.merges() == r.merges());
    CHECK(rr.labels() == r.labels());
  }
}

TEST_CASE("json rejects bad input") {
  CHECK_THROWS_AS(dendrogram_from_json("not json"), ParseError);
  CHECK_THROWS_AS(dendrogram_from_json(R"({"n_leaves":3,"labels":["a","b","c"]})"), ParseError);
  CHECK_THROWS_AS(
      dendrogram_from_json(R"({"n_leaves":2,"labels":["a","b","c"],"merges":[[0,1,0.5],[3,2,0.75]]})"),
      ParseError);
  // irregular heights
  CHECK_THROWS_AS(
      dendrogram_from_json(R"({"n_leaves":3,"labels":["a","b","c"],"merges":[[0,1,0.75],[3,2,0.5]]})"),
      IrregularDendrogramError);
  // non-binary: node 0 twice
  CHECK_THROWS_AS(
      dendrogram_from_json(R"({"n_leaves":3,"labels":["a","b","c"],"merges":[[0,1,0.5],[3,0,0.75]]})"),
      ValidationError);
}

TEST_CASE("newick export") {
  const Dendrogram d = path3_dendrogram();
  CHECK(to_newick(d) == "((a:0.5,b:0.5):0.25,c:0.75);");
  const Dendrogram unsafe = Dendrogram::from_merges({"a b", "c"}, {{0, 1, 1.0}});
  CHECK_THROWS_AS(to_newick(unsafe), ValidationError);
}

TEST_CASE("newick round trip preserves the ultrametric by label") {
  for (unsigned seed = 1; seed <= 6; ++seed) {
    const int n = 9 + static_cast<int>(seed);
    const Dendrogram d = random_regular(n, seed + 40);
    const Dendrogram back = dendrogram_from_newick(to_newick(d));
    REQUIRE(back.leaf_count() == n);
    const Dendrogram aligned = back.relabeled(d.labels());
    for (int u = 0; u < n; ++u) {
      for (int v = u + 1; v < n; ++v) {
        CHECK(aligned.ultrametric_distance(u, v) ==
              doctest::Approx(d.ultrametric_distance(u, v)).epsilon(1e-9));
      }
    }
  }
}

TEST_CASE("newick rejects bad input") {
  CHECK_THROWS_AS(dendrogram_from_newick("(a:1,b:1"), ParseError);
  CHECK_THROWS_AS(dendrogram_from_newick("(a:1,b:1,c:1);"), ParseError);      // non-binary
  CHECK_THROWS_AS(dendrogram_from_newick("((a:1,b:1):1,c:1.5);"), ParseError);  // not ultrametric
  CHECK_THROWS_AS(dendrogram_from_newick(";"), ParseError);
  CHECK(dendrogram_from_newick("x;").leaf_count() == 1);  // bare leaf: trivial dendrogram
}

TEST_CASE("relabeling permutes leaves") {
  const Dendrogram d = path3_dendrogram();
  const Dendrogram r = d.relabeled({"c", "a", "b"});
  CHECK(r.labels() == std::vector<std::string>{"c", "a", "b"});
  // a<->1, b<->2, c<->0 now; distances must follow the labels
  CHECK(r.ultrametric_distance(1, 2) == 0.5);   // a,b
  CHECK(r.ultrametric_distance(0, 1) == 0.75);  // c,a
  CHECK_THROWS_AS(d.relabeled({"a", "b", "x"}), ValidationError);
}

TEST_SUITE_END();
