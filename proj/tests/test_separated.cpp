#include <algorithm>
#include <random>

#include "crds/errors.hpp"
#include "crds/models.hpp"
#include "crds/separated.hpp"
#include "doctest.h"
#include "instances.hpp"
#include "oracles.hpp"

using crds::EnvironmentPath;
using crds::FiberModel;
using crds::FolnerWindow;
using crds::GroupElement;
using crds::Method;
using crds::Point;

namespace {

// Identity dynamics on Z/10, so grid point j sits at j/10.
std::unique_ptr<crds::ModelSystem> tenths() {
  return crds::make_circle_expansion(crds::SymbolLaw::point_mass(1), 10);
}

EnvironmentPath env(const crds::ModelSystem& sys, std::uint64_t index = 0) {
  return crds::sample_environment(sys.law(), sys.group_dimension(), 77, index);
}

FiberModel four_points() { return FiberModel{"tenths", {Point{0, 0}, Point{3, 0}, Point{6, 0}, Point{9, 0}}}; }

using instances::Instance;
using instances::exact_sep;
using instances::small_systems;

}  // namespace

TEST_SUITE("separated") {
  TEST_CASE("method names") {
    CHECK(crds::parse_method("exact") == Method::exact);
    CHECK(crds::parse_method("greedy") == Method::greedy);
    CHECK(crds::parse_method("volume") == Method::volume);
    CHECK(crds::to_string(Method::volume) == "volume");
    CHECK_THROWS_AS(crds::parse_method("fast"), crds::ConfigError);
  }

  TEST_CASE("is_separated on the circle") {
    const auto sys = tenths();
    const auto omega = env(*sys);
    const auto w = FolnerWindow::box(1, 1);
    const std::vector<Point> one = {Point{4, 0}};
    const std::vector<Point> three = {Point{0, 0}, Point{3, 0}, Point{6, 0}};
    const std::vector<Point> wrap = {Point{0, 0}, Point{9, 0}};
    CHECK(crds::is_separated(*sys, one, omega, w, 0.25));
    CHECK(crds::is_separated(*sys, three, omega, w, 0.25));
    CHECK_FALSE(crds::is_separated(*sys, wrap, omega, w, 0.25));
    // Strict inequality: distance exactly eps is not separated.
    CHECK_FALSE(crds::is_separated(*sys, three, omega, w, 0.3));
  }

  TEST_CASE("exact and greedy on {0, 0.3, 0.6, 0.9}") {
    const auto sys = tenths();
    const auto omega = env(*sys);
    const auto w = FolnerWindow::box(1, 1);
    const auto fiber = four_points();
    const auto ex = crds::max_separated_exact(*sys, fiber, omega, w, 0.25);
    CHECK(ex.cardinality == 3);
    CHECK(ex.witness == std::vector<std::size_t>{0, 1, 2});
    CHECK(crds::is_separated(*sys, crds::witness_points(fiber, ex), omega, w, 0.25));
    const auto gr = crds::max_separated_greedy(*sys, fiber, omega, w, 0.25);
    CHECK(gr.cardinality == 3);
    CHECK(gr.witness == std::vector<std::size_t>{0, 1, 2});
    CHECK(crds::max_separated_greedy(*sys, fiber, omega, w, 0.6).cardinality == 1);
    CHECK(crds::spanning_number(*sys, fiber, omega, w, 0.35) <= 2);
    const FiberModel single{"one", {Point{7, 0}}};
    CHECK(crds::max_separated_exact(*sys, single, omega, w, 0.1).cardinality == 1);
    CHECK(crds::spanning_number(*sys, single, omega, w, 0.1) == 1);
  }

  TEST_CASE("discrete metric: every point counts") {
    const auto sys = crds::make_discrete_points(8);
    const auto omega = env(*sys);
    const auto fiber = sys->fiber(omega);
    for (int n = 1; n <= 3; ++n) {
      const auto w = FolnerWindow::box(1, n);
      CHECK(crds::max_separated_exact(*sys, fiber, omega, w, 0.5).cardinality == 8);
      CHECK(crds::max_separated_greedy(*sys, fiber, omega, w, 0.99).cardinality == 8);
      CHECK(crds::spanning_number(*sys, fiber, omega, w, 0.5) == 8);
    }
  }

  TEST_CASE("exact solver refuses fibers above the cap") {
    const auto sys = crds::make_circle_expansion(crds::SymbolLaw::point_mass(2), 64);
    const auto omega = env(*sys);
    const auto fiber = sys->fiber(omega);
    CHECK_THROWS_AS(crds::max_separated_exact(*sys, fiber, omega, FolnerWindow::box(1, 2), 0.1), crds::ResourceCapError);
    CHECK(crds::max_separated_exact(*sys, fiber, omega, FolnerWindow::box(1, 2), 0.1, 64).cardinality > 0);
  }

  TEST_CASE("full shift Sep = 4 at k=2, m=1, n=2") {
    CHECK(oracle::full_shift_sep_bruteforce(2, 1, 2) == 4);
    const auto sys = crds::make_full_shift(2, 1, 2);
    const auto omega = env(*sys);
    const auto fiber = sys->fiber(omega);
    CHECK(crds::max_separated_exact(*sys, fiber, omega, FolnerWindow::box(1, 2), 0.5).cardinality == 4);
  }

  TEST_CASE("full shift periodic fibers agree with the word brute force") {
    // k^{n+2m-2} <= 16 words keeps the brute force cheap.
    struct Case { int k, m, n; };
    for (const Case c : {Case{2, 1, 2}, Case{2, 1, 3}, Case{2, 1, 4}, Case{2, 2, 1}, Case{2, 2, 2}, Case{3, 1, 2}}) {
      const auto sys = crds::make_full_shift(c.k, c.m, c.n);
      const auto omega = env(*sys);
      const auto fiber = sys->fiber(omega);
      INFO("k=" << c.k << " m=" << c.m << " n=" << c.n);
      CHECK(crds::max_separated_exact(*sys, fiber, omega, FolnerWindow::box(1, c.n), std::ldexp(1.0, -c.m))
                .cardinality == oracle::full_shift_sep_bruteforce(c.k, c.m, c.n));
    }
  }

  TEST_CASE("exact solver equals brute-force enumeration on random instances") {
    const auto systems = small_systems();
    std::mt19937_64 rng(2024);
    for (int i = 0; i < 200; ++i) {
      const Instance in = instances::draw(systems, rng);
      const auto w = FolnerWindow::box(in.system->group_dimension(), in.n);
      const auto r = crds::max_separated_exact(*in.system, in.fiber, in.omega, w, in.eps);
      INFO(in.system->label() << " |E|=" << in.fiber.points.size() << " n=" << in.n << " eps=" << in.eps);
      REQUIRE(r.cardinality == oracle::max_separated_bruteforce(*in.system, in.fiber.points, in.omega, w, in.eps));
      REQUIRE(crds::is_separated(*in.system, crds::witness_points(in.fiber, r), in.omega, w, in.eps));
    }
  }

  TEST_CASE("greedy is maximal and bracketed by Sep(2 eps) and Sep(eps)") {
    const auto systems = small_systems();
    std::mt19937_64 rng(99);
    for (int i = 0; i < 200; ++i) {
      const Instance in = instances::draw(systems, rng);
      const auto w = FolnerWindow::box(in.system->group_dimension(), in.n);
      const auto g = crds::max_separated_greedy(*in.system, in.fiber, in.omega, w, in.eps);
      const auto pts = crds::witness_points(in.fiber, g);
      REQUIRE(crds::is_separated(*in.system, pts, in.omega, w, in.eps));
      REQUIRE(g.cardinality >= exact_sep(in, in.n, 2 * in.eps));
      REQUIRE(g.cardinality <= exact_sep(in, in.n, in.eps));
      // Maximal: every other point is within eps of the witness.
      for (const auto& x : in.fiber.points) {
        bool near = false;
        for (const auto& y : pts) near = near || crds::bowen_distance(*in.system, in.omega, w, x, y) <= in.eps;
        REQUIRE(near);
      }
      const std::size_t span = crds::spanning_number(*in.system, in.fiber, in.omega, w, in.eps);
      REQUIRE(span >= exact_sep(in, in.n, 2 * in.eps));
    }
  }

  TEST_CASE("Sep is monotone in eps and in the window") {
    const auto systems = small_systems();
    std::mt19937_64 rng(7);
    for (int i = 0; i < 200; ++i) {
      const Instance in = instances::draw(systems, rng);
      const std::size_t base = exact_sep(in, in.n, in.eps);
      REQUIRE(exact_sep(in, in.n, in.eps * 1.5) <= base);
      REQUIRE(exact_sep(in, in.n + 1, in.eps) >= base);
    }
  }

  TEST_CASE("ball volume brackets Sep on translation-invariant systems") {
    const std::vector<std::shared_ptr<const crds::ModelSystem>> systems = {
        crds::make_circle_expansion(crds::SymbolLaw::point_mass(2), 16),
        crds::make_random_expansion(crds::SymbolLaw({2, 3}, {0.5, 0.5}), 4),
        crds::make_circle_expansion(crds::SymbolLaw({2, 3}, {0.5, 0.5}), 18),
        crds::make_toral_automorphism({2, 1, 1, 1}, 2), crds::make_toral_automorphism({1, 1, 0, 1}, 2)};
    for (const auto& sys : systems) {
      REQUIRE(sys->translation_invariant());
      for (std::uint64_t s = 0; s < 4; ++s) {
        const auto omega = env(*sys, s);
        const auto fiber = sys->fiber(omega);
        for (int n = 1; n <= 3; ++n) {
          const auto w = FolnerWindow::box(sys->group_dimension(), n);
          for (double eps : {0.05, 0.1, 0.2, 0.3}) {
            const double ratio = static_cast<double>(fiber.points.size()) /
                                 static_cast<double>(crds::bowen_ball_volume(*sys, fiber, omega, w, eps));
            const auto upper = crds::max_separated_exact(*sys, fiber, omega, w, eps).cardinality;
            const auto lower = crds::max_separated_exact(*sys, fiber, omega, w, 2 * eps).cardinality;
            INFO(sys->label() << " n=" << n << " eps=" << eps);
            REQUIRE(ratio <= static_cast<double>(upper) + 1e-12);
            REQUIRE(ratio >= static_cast<double>(lower) - 1e-12);
          }
        }
      }
    }
    const auto full = crds::make_full_shift(2, 1, 2);
    CHECK_FALSE(full->translation_invariant());
    const auto omega = env(*full);
    CHECK_THROWS_AS(crds::bowen_ball_volume(*full, full->fiber(omega), omega, FolnerWindow::box(1, 1), 0.5),
                    std::invalid_argument);
  }
}
