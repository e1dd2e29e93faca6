#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <cmath>

#include "msplan/field.hpp"
#include "msplan/metrics.hpp"

using namespace msplan;

TEST_CASE("class codes are fixed", "[field]") {
  STATIC_REQUIRE(index_of(ClassId::soil) == 0);
  STATIC_REQUIRE(index_of(ClassId::crop) == 1);
  STATIC_REQUIRE(index_of(ClassId::weed) == 2);
  STATIC_REQUIRE(kNumClasses == 3);
}

TEST_CASE("LabelGrid rejects inconsistent construction", "[field]") {
  REQUIRE_THROWS_AS(LabelGrid(2, 2, 0.0), InvalidArgument);
  REQUIRE_THROWS_AS(LabelGrid(2, 2, -1.0), InvalidArgument);
  REQUIRE_THROWS_AS(LabelGrid(2, 2, 1.0, {}, std::vector<ClassId>(3)), InvalidArgument);
  REQUIRE_THROWS_AS(LabelGrid(1, 1, 1.0, {}, std::vector<ClassId>{static_cast<ClassId>(3)}),
                    InvalidArgument);
}

TEST_CASE("row 0 is north and the origin is the south-west corner", "[field]") {
  LabelGrid g(4, 3, 0.5, {10.0, 20.0});
  const Point2 nw = g.cell_center(0, 0);
  CHECK(nw.x == Catch::Approx(10.25));
  CHECK(nw.y == Catch::Approx(21.25));
  const Point2 se = g.cell_center(2, 3);
  CHECK(se.x == Catch::Approx(11.75));
  CHECK(se.y == Catch::Approx(20.25));
  CHECK(g.extent() == Rect{10.0, 20.0, 12.0, 21.5});
}

TEST_CASE("crop_window", "[field]") {
  LabelGrid g(10, 10, 1.0);
  for (std::size_t r = 0; r < 10; ++r) {
    for (std::size_t c = 0; c < 10; ++c) g.set(r, c, static_cast<ClassId>((r * 7 + c * 3) % 3));
  }

  SECTION("full extent is the identity") { CHECK(crop_window(g, g.extent()) == g); }

  SECTION("left half") {
    const LabelGrid h = crop_window(g, {0.0, 0.0, 5.0, 10.0});
    REQUIRE(h.width() == 5);
    REQUIRE(h.height() == 10);
    CHECK(h.origin() == Point2{0.0, 0.0});
    for (std::size_t r = 0; r < 10; ++r) {
      for (std::size_t c = 0; c < 5; ++c) CHECK(h.at(r, c) == g.at(r, c));
    }
  }

  SECTION("one pixel at the origin corner") {
    // The cell whose center is (0.5, 0.5) is the south-west one: row 9, col 0.
    const LabelGrid one = crop_window(g, {0.0, 0.0, 1.0, 1.0});
    REQUIRE(one.size() == 1);
    CHECK(one.at(0, 0) == g.at(9, 0));
    const LabelGrid nw = crop_window(g, {0.0, 9.0, 1.0, 10.0});
    CHECK(nw.at(0, 0) == g.at(0, 0));
  }

  SECTION("origin follows the selected block") {
    const LabelGrid w = crop_window(g, {2.0, 3.0, 6.0, 8.0});
    CHECK(w.width() == 4);
    CHECK(w.height() == 5);
    CHECK(w.origin() == Point2{2.0, 3.0});
    CHECK(w.at(0, 0) == g.at(2, 2));
  }

  SECTION("class counts of a window never exceed the source") {
    const auto src = class_counts(g);
    const auto sub = class_counts(crop_window(g, {1.3, 2.7, 8.1, 6.2}));
    for (std::size_t c = 0; c < kNumClasses; ++c) CHECK(sub[c] <= src[c]);
  }

  SECTION("disjoint rectangle is an error") {
    CHECK_THROWS_AS(crop_window(g, {20.0, 20.0, 30.0, 30.0}), InvalidArgument);
  }
}

TEST_CASE("FieldSpec validation", "[field]") {
  FieldSpec s;
  s.width_m = 0.001;
  CHECK_THROWS_AS(generate_field(s), InvalidArgument);
  s = {};
  s.weed_density = 1.5;
  CHECK_THROWS_AS(generate_field(s), InvalidArgument);
  s = {};
  s.row_spacing_m = 0.0;
  CHECK_THROWS_AS(generate_field(s), InvalidArgument);
}

TEST_CASE("degenerate spec yields an all-soil field", "[field]") {
  FieldSpec s;
  s.width_m = 4.0;
  s.height_m = 3.0;
  s.weed_cluster_count = 0;
  s.row_spacing_m = 10.0;  // wider than the field: no rows fit
  const LabelGrid g = generate_field(s);
  CHECK(g.width() == 800);
  CHECK(g.height() == 600);
  CHECK(vegetation_ratio(g) == 0.0);
}

TEST_CASE("generation is a pure function of the spec", "[field]") {
  FieldSpec s;
  s.width_m = 6.0;
  s.height_m = 4.0;
  s.seed = 7;
  const LabelGrid a = generate_field(s);
  const LabelGrid b = generate_field(s);
  CHECK(a == b);
  s.seed = 8;
  CHECK_FALSE(generate_field(s) == a);
}

TEST_CASE("crops sit on rows, weeds overwrite crops", "[field]") {
  FieldSpec s;
  s.width_m = 6.0;
  s.height_m = 4.0;
  s.weed_cluster_count = 0;
  s.crop_jitter_m = 0.0;
  const auto discs = plant_layout(s);
  REQUIRE(discs.size() == 8 * 24);
  for (const PlantDisc& d : discs) {
    const double row = (d.center.y - 0.25) / 0.5;
    CHECK(std::abs(row - std::round(row)) < 1e-9);
  }

  LabelGrid g(20, 20, 0.01);
  const std::array<PlantDisc, 2> overlap{{{{0.1, 0.1}, 0.05, ClassId::crop},
                                          {{0.1, 0.1}, 0.02, ClassId::weed}}};
  rasterize_discs(g, overlap);
  CHECK(g.at(10, 10) == ClassId::weed);
  CHECK(g.at(10, 6) == ClassId::crop);
  CHECK(g.at(0, 0) == ClassId::soil);
}

// Monte-Carlo estimate of the covered area of the planted discs, independent
// of the rasterizer: sample points uniformly and test them against every disc
// through a coarse bucket index.
TEST_CASE("vegetation ratio matches a Monte-Carlo disc-area estimate", "[field][slow]") {
  FieldSpec s;
  s.width_m = 20.0;
  s.height_m = 20.0;
  s.base_resolution = 0.005;
  s.seed = 3;
  const LabelGrid g = generate_field(s);
  REQUIRE(g.width() == 4000);
  REQUIRE(g.height() == 4000);

  const auto discs = plant_layout(s);
  constexpr double bucket = 0.25;
  const auto nb = static_cast<std::size_t>(std::ceil(s.width_m / bucket));
  std::vector<std::vector<std::size_t>> index(nb * nb);
  for (std::size_t i = 0; i < discs.size(); ++i) {
    const PlantDisc& d = discs[i];
    const auto b0 = [&](double v) {
      return static_cast<std::size_t>(std::clamp(std::floor(v / bucket), 0.0, double(nb - 1)));
    };
    for (std::size_t by = b0(d.center.y - d.radius); by <= b0(d.center.y + d.radius); ++by) {
      for (std::size_t bx = b0(d.center.x - d.radius); bx <= b0(d.center.x + d.radius); ++bx) {
        index[by * nb + bx].push_back(i);
      }
    }
  }
  const CounterRng rng(12345, 0);
  constexpr std::size_t n = 200000;
  std::size_t hit = 0;
  for (std::size_t k = 0; k < n; ++k) {
    const double x = rng.uniform(2 * k, 0.0, s.width_m);
    const double y = rng.uniform(2 * k + 1, 0.0, s.height_m);
    const auto bx = std::min(nb - 1, static_cast<std::size_t>(x / bucket));
    const auto by = std::min(nb - 1, static_cast<std::size_t>(y / bucket));
    for (std::size_t i : index[by * nb + bx]) {
      const double dx = x - discs[i].center.x;
      const double dy = y - discs[i].center.y;
      if (dx * dx + dy * dy <= discs[i].radius * discs[i].radius) {
        ++hit;
        break;
      }
    }
  }
  const double estimate = static_cast<double>(hit) / static_cast<double>(n);
  CHECK(std::abs(vegetation_ratio(g) - estimate) <= 0.1);
  CHECK(std::abs(vegetation_ratio(g) - estimate) <= 0.01);
}
