#include <random>

#include "crds/group.hpp"
#include "doctest.h"
#include "oracles.hpp"

using crds::compose;
using crds::Fraction;
using crds::FolnerWindow;
using crds::GroupElement;

TEST_SUITE("group") {
  TEST_CASE("compose is coordinate-wise addition") {
    CHECK(compose(GroupElement(0), GroupElement(5)) == GroupElement(5));
    CHECK(compose(GroupElement(2), GroupElement(3)) == GroupElement(5));
    CHECK(compose(GroupElement(1, -1), GroupElement(2, 2)) == GroupElement(3, 1));
    CHECK_THROWS_AS(compose(GroupElement(1), GroupElement(1, 1)), std::invalid_argument);
  }

  TEST_CASE("group axioms on random triples") {
    std::mt19937_64 rng(7);
    std::uniform_int_distribution<std::int64_t> coord(-1'000'000, 1'000'000);
    for (int i = 0; i < 1000; ++i) {
      const bool planar = i % 2 == 1;
      auto draw = [&] { return planar ? GroupElement(coord(rng), coord(rng)) : GroupElement(coord(rng)); };
      const GroupElement g = draw();
      const GroupElement h = draw();
      const GroupElement k = draw();
      const GroupElement e = GroupElement::identity(planar ? 2 : 1);
      REQUIRE(compose(compose(g, h), k) == compose(g, compose(h, k)));
      REQUIRE(compose(g, h) == compose(h, g));
      REQUIRE(compose(g, e) == g);
      REQUIRE(compose(g, g.inverse()) == e);
    }
  }

  TEST_CASE("box windows") {
    const auto w1 = FolnerWindow::box(1, 3);
    REQUIRE(w1.size() == 3);
    CHECK(w1[0] == GroupElement(0));
    CHECK(w1[2] == GroupElement(2));
    CHECK(FolnerWindow::box(1, 1).size() == 1);

    const auto w2 = FolnerWindow::box(2, 2);
    const std::vector<GroupElement> expected = {{0, 0}, {0, 1}, {1, 0}, {1, 1}};
    REQUIRE(w2.size() == 4);
    for (std::size_t i = 0; i < 4; ++i) CHECK(w2[i] == expected[i]);
    CHECK(FolnerWindow::box(2, 5).size() == 25);
    CHECK(w2.index() == 2);

    CHECK_THROWS_AS(FolnerWindow::box(1, 0), std::invalid_argument);
    CHECK(FolnerWindow::box(2, 6) == FolnerWindow::box(2, 6));
  }

  TEST_CASE("custom windows are sorted and deduplicated") {
    const auto w = FolnerWindow::from_elements({GroupElement(3), GroupElement(-1), GroupElement(3)});
    REQUIRE(w.size() == 2);
    CHECK(w[0] == GroupElement(-1));
    CHECK(w.contains(GroupElement(3)));
    CHECK_FALSE(w.contains(GroupElement(0)));
    CHECK(FolnerWindow::box(1, 3).is_subset_of(FolnerWindow::box(1, 4)));
    CHECK_FALSE(FolnerWindow::box(1, 4).is_subset_of(FolnerWindow::box(1, 3)));
    CHECK(FolnerWindow::box(1, 3).translated(GroupElement(2)) ==
          FolnerWindow::from_elements({GroupElement(2), GroupElement(3), GroupElement(4)}));
    CHECK_THROWS(FolnerWindow::from_elements({}));
  }

  TEST_CASE("folner defect examples") {
    CHECK(crds::folner_defect(FolnerWindow::box(1, 10), GroupElement(1)) == Fraction{1, 5});
    CHECK(crds::folner_defect(FolnerWindow::box(1, 7), GroupElement(0)) == Fraction{0, 1});
    CHECK(crds::folner_defect(FolnerWindow::box(2, 4), GroupElement(1, 0)) == Fraction{1, 2});
  }

  TEST_CASE("folner defect agrees with set enumeration and converges") {
    for (int dim = 1; dim <= 2; ++dim) {
      const GroupElement g = dim == 1 ? GroupElement(1) : GroupElement(1, 0);
      double previous = 2.0;
      for (std::int64_t n = 1; n <= 64; ++n) {
        const auto w = FolnerWindow::box(dim, n);
        const Fraction f = crds::folner_defect(w, g);
        const auto diff = static_cast<std::int64_t>(oracle::symmetric_difference_size(w, g));
        // Same rational: diff / |F| == num / den.
        REQUIRE(diff * f.den == f.num * static_cast<std::int64_t>(w.size()));
        REQUIRE(f.num * n <= 2 * dim * f.den);
        REQUIRE(f.value() <= previous);
        previous = f.value();
      }
    }
    const GroupElement diag(2, -3);
    const auto w = FolnerWindow::box(2, 6);
    const Fraction f = crds::folner_defect(w, diag);
    CHECK(static_cast<std::int64_t>(oracle::symmetric_difference_size(w, diag)) * f.den == f.num * 36);
  }
}
