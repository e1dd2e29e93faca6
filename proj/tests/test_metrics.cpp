#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <array>
#include <limits>
#include <numeric>

#include "msplan/metrics.hpp"
#include "msplan/rng.hpp"

using namespace msplan;

namespace {

LabelGrid grid_of(std::size_t w, std::size_t h, std::initializer_list<int> v, double res = 1.0) {
  std::vector<ClassId> cells;
  for (int x : v) cells.push_back(static_cast<ClassId>(x));
  return LabelGrid(w, h, res, {}, std::move(cells));
}

LabelGrid random_grid(std::size_t w, std::size_t h, std::uint64_t seed, double res = 1.0) {
  LabelGrid g(w, h, res);
  const CounterRng rng(seed, 3);
  auto cells = g.mutable_cells();
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = static_cast<ClassId>(rng.bits(i) % 3);
  return g;
}

}  // namespace

TEST_CASE("vegetation ratio", "[metrics]") {
  CHECK(vegetation_ratio(LabelGrid(5, 4, 1.0)) == 0.0);
  CHECK(vegetation_ratio(grid_of(2, 2, {1, 2, 0, 0})) == 0.5);
  CHECK_THROWS_AS(vegetation_ratio(LabelGrid(0, 0, 1.0)), InvalidArgument);

  LabelGrid g = random_grid(64, 64, 1);
  const double v = vegetation_ratio(g);
  auto cells = g.mutable_cells();
  std::reverse(cells.begin(), cells.end());
  CHECK(vegetation_ratio(g) == v);
}

TEST_CASE("mIoU hand cases", "[metrics]") {
  const LabelGrid all = grid_of(3, 1, {0, 1, 2});
  SegStats s = miou(all, all);
  CHECK(s.miou == 1.0);
  for (const auto& iou : s.iou) CHECK(iou == 1.0);

  s = miou(grid_of(2, 2, {0, 0, 0, 0}), grid_of(2, 2, {1, 1, 1, 1}));
  CHECK(s.iou[0] == 0.0);
  CHECK(s.iou[1] == 0.0);
  CHECK_FALSE(s.iou[2].has_value());
  CHECK(s.miou == 0.0);

  s = miou(grid_of(4, 1, {0, 0, 1, 2}), grid_of(4, 1, {0, 1, 1, 2}));
  CHECK(s.iou[0] == 0.5);
  CHECK(s.iou[1] == 0.5);
  CHECK(s.iou[2] == 1.0);
  CHECK(s.miou == Catch::Approx(2.0 / 3.0).epsilon(1e-15));

  CHECK_THROWS_AS(miou(LabelGrid(2, 2, 1.0), LabelGrid(2, 3, 1.0)), InvalidArgument);
  CHECK_THROWS_AS(miou(LabelGrid(2, 2, 1.0), LabelGrid(2, 2, 0.5)), InvalidArgument);
}

TEST_CASE("mIoU symmetry", "[metrics]") {
  for (std::uint64_t s = 0; s < 20; ++s) {
    const LabelGrid a = random_grid(16, 16, s);
    const LabelGrid b = random_grid(16, 16, s + 100);
    const SegStats ab = miou(a, b);
    const SegStats ba = miou(b, a);
    for (std::size_t c = 0; c < kNumClasses; ++c) CHECK(ab.iou[c] == ba.iou[c]);
    CHECK(miou(a, a).miou == 1.0);
  }
}

TEST_CASE("fusion keeps the finest observation", "[metrics]") {
  const LabelGrid like(8, 8, 1.0);
  const LabelGrid coarse(8, 8, 1.0, {}, ClassId::crop);
  const LabelGrid fine(8, 8, 1.0, {}, ClassId::weed);

  FusedMap a(like);
  CHECK(a.unobserved_count() == 64);
  a.fuse(coarse, 0.03, like.extent());
  a.fuse(fine, 0.01, like.extent());
  for (ClassId c : a.labels().cells()) CHECK(c == ClassId::weed);

  FusedMap b(like);
  b.fuse(fine, 0.01, like.extent());
  b.fuse(coarse, 0.03, like.extent());
  CHECK(b.labels() == a.labels());
  CHECK(b.unobserved_count() == 0);

  FusedMap tie(like);
  tie.fuse(coarse, 0.02, like.extent());
  tie.fuse(fine, 0.02, like.extent());  // equal GSD: first write wins
  for (ClassId c : tie.labels().cells()) CHECK(c == ClassId::crop);
}

TEST_CASE("fusion rejects misaligned input", "[metrics]") {
  FusedMap m(LabelGrid(8, 8, 1.0));
  CHECK_THROWS_AS(m.fuse(LabelGrid(4, 4, 0.5), 0.01, {0, 0, 2, 2}), InvalidArgument);
  CHECK_THROWS_AS(m.fuse(LabelGrid(4, 4, 1.0, {0.5, 0.0}), 0.01, {0.5, 0, 4.5, 4}),
                  InvalidArgument);
  CHECK_THROWS_AS(m.fuse(LabelGrid(4, 4, 1.0, {6.0, 0.0}), 0.01, {6, 0, 10, 4}), InvalidArgument);
  CHECK_THROWS_AS(m.fuse(LabelGrid(2, 2, 1.0), 0.01, {0, 0, 4, 4}), InvalidArgument);
}

// Replays interleaved fuses cell by cell: min GSD wins, earliest on ties.
TEST_CASE("interleaved fusion equals a per-cell min-GSD replay", "[metrics]") {
  const LabelGrid like(20, 16, 1.0, {3.0, -2.0});
  for (std::uint64_t s = 0; s < 30; ++s) {
    const CounterRng rng(s, 8);
    struct Op {
      LabelGrid seg;
      double gsd;
      Rect fp;
    };
    std::vector<Op> ops;
    for (std::uint64_t k = 0; k < 12; ++k) {
      const auto w = 1 + rng.bits(5 * k) % 10;
      const auto h = 1 + rng.bits(5 * k + 1) % 10;
      const auto x0 = rng.bits(5 * k + 2) % (20 - w + 1);
      const auto y0 = rng.bits(5 * k + 3) % (16 - h + 1);
      const double gsd = std::array{0.01, 0.02, 0.03}[rng.bits(5 * k + 4) % 3];
      LabelGrid seg = random_grid(w, h, s * 100 + k);
      seg = LabelGrid(w, h, 1.0, {3.0 + double(x0), -2.0 + double(y0)},
                      std::vector<ClassId>(seg.cells().begin(), seg.cells().end()));
      ops.push_back({seg, gsd, seg.extent()});
    }
    FusedMap m(like);
    for (const Op& op : ops) m.fuse(op.seg, op.gsd, op.fp);

    for (std::size_t r = 0; r < like.height(); ++r) {
      for (std::size_t c = 0; c < like.width(); ++c) {
        const Point2 p = like.cell_center(r, c);
        double best = std::numeric_limits<double>::infinity();
        ClassId label = ClassId::soil;
        for (const Op& op : ops) {
          if (p.x < op.fp.x_min || p.x >= op.fp.x_max || p.y < op.fp.y_min || p.y >= op.fp.y_max) {
            continue;
          }
          if (op.gsd < best) {
            best = op.gsd;
            const auto cc = static_cast<std::size_t>(p.x - op.fp.x_min);
            const auto rr = op.seg.height() - 1 - static_cast<std::size_t>(p.y - op.fp.y_min);
            label = op.seg.at(rr, cc);
          }
        }
        const std::size_t k = r * like.width() + c;
        REQUIRE(m.labels().at(r, c) == label);
        REQUIRE(double(m.provenance()[k]) == Catch::Approx(best));
      }
    }
  }
}

TEST_CASE("fusion order does not matter for distinct GSDs", "[metrics]") {
  const LabelGrid like(10, 10, 1.0);
  const std::array<double, 3> gsds{0.03, 0.02, 0.01};
  std::array<LabelGrid, 3> segs{random_grid(6, 6, 1), random_grid(6, 6, 2), random_grid(6, 6, 3)};
  const std::array<Point2, 3> at{Point2{0, 0}, Point2{3, 2}, Point2{4, 4}};
  for (std::size_t i = 0; i < 3; ++i) {
    segs[i] = LabelGrid(6, 6, 1.0, at[i], std::vector<ClassId>(segs[i].cells().begin(), segs[i].cells().end()));
  }
  std::array<std::size_t, 3> order{0, 1, 2};
  FusedMap ref(like);
  for (std::size_t i : order) ref.fuse(segs[i], gsds[i], segs[i].extent());
  while (std::next_permutation(order.begin(), order.end())) {
    FusedMap m(like);
    for (std::size_t i : order) m.fuse(segs[i], gsds[i], segs[i].extent());
    CHECK(m.labels() == ref.labels());
    CHECK(m.provenance() == ref.provenance());
  }
}

TEST_CASE("field mIoU counts unobserved cells as wrong", "[metrics]") {
  const LabelGrid gt = grid_of(4, 1, {0, 1, 1, 2});
  FusedMap m(gt);
  m.fuse(gt, 0.01, {0, 0, 2, 1});  // observe the two western cells only
  const SegStats s = field_miou(m, gt);
  CHECK(s.iou[0] == 1.0);
  CHECK(s.iou[1] == 0.5);
  CHECK(s.iou[2] == 0.0);
  CHECK(s.miou == Catch::Approx(0.5));

  m.fuse(gt, 0.01, gt.extent());
  CHECK(field_miou(m, gt).miou == 1.0);
}
