#include <atomic>
#include <cmath>
#include <sstream>

#include "crds/errors.hpp"
#include "crds/estimators.hpp"
#include "doctest.h"

using crds::EntropyRow;
using crds::EntropyTable;
using crds::Method;
using crds::RunOptions;

namespace {

EntropyRow synthetic_row(std::int64_t n, std::vector<double> rates, double count = 1.0) {
  EntropyRow r;
  r.n = n;
  r.eps = 0.25;
  r.method = "exact";
  r.omega_samples = rates.size();
  double sum = 0.0;
  for (double x : rates) sum += x;
  r.mean_rate = sum / static_cast<double>(rates.size());
  r.sample_rates = std::move(rates);
  r.mean_count = count;
  return r;
}

std::string csv_of(const EntropyTable& t) {
  std::ostringstream out;
  t.write_csv(out);
  return out.str();
}

}  // namespace

TEST_SUITE("estimators") {
  TEST_CASE("table keys and csv layout") {
    EntropyTable t("sys;a=1");
    t.add(synthetic_row(2, {0.5}));
    CHECK_THROWS_AS(t.add(synthetic_row(2, {0.7})), std::invalid_argument);
    t.add(synthetic_row(4, {0.25, 0.75}));
    REQUIRE(t.find(4, 0.25, "exact") != nullptr);
    CHECK(t.find(4, 0.25, "greedy") == nullptr);
    const std::string csv = csv_of(t);
    CHECK(csv.rfind("system,n,eps,omega_samples,method,mean_rate,std_error\n", 0) == 0);
    CHECK(csv.find("sys;a=1,2,0.25,1,exact,0.5,0\n") != std::string::npos);
    CHECK(csv.find("sys;a=1,4,0.25,2,exact,0.5,") != std::string::npos);
  }

  TEST_CASE("parallel_for covers every index and rethrows the lowest failure") {
    std::vector<std::atomic<int>> hits(100);
    crds::parallel_for(100, 4, [&](std::size_t i) { hits[i]++; });
    for (const auto& h : hits) CHECK(h.load() == 1);
    try {
      crds::parallel_for(50, 3, [](std::size_t i) {
        if (i == 7 || i == 30) throw std::runtime_error("index " + std::to_string(i));
      });
      FAIL("no exception");
    } catch (const std::runtime_error& e) {
      CHECK(std::string(e.what()) == "index 7");
    }
  }

  TEST_CASE("deterministic systems have zero standard error") {
    const auto doubling = crds::make_random_expansion(crds::SymbolLaw::point_mass(2), 10);
    const auto row = crds::sep_entropy_rate(*doubling, 4, 1.0 / 32, 5, Method::greedy, {});
    CHECK(row.std_error == 0.0);
    CHECK(row.omega_samples == 5);
    CHECK(row.sample_rates.size() == 5);
    REQUIRE(row.upper_rate);
    CHECK(*row.upper_rate >= row.mean_rate);
  }

  TEST_CASE("discrete points: rate log k / n") {
    const auto sys = crds::make_discrete_points(8);
    const auto row = crds::sep_entropy_rate(*sys, 3, 0.5, 2, Method::exact, {});
    CHECK(row.mean_rate == doctest::Approx(std::log(2.0)).epsilon(1e-14));
    CHECK(row.mean_count == doctest::Approx(8.0));
  }

  TEST_CASE("methods refuse what they cannot do") {
    const auto full = crds::make_full_shift(2, 1, 8);
    const auto omega = crds::sample_environment(full->law(), 1, 0, 0);
    CHECK_THROWS_AS(crds::log_separated_count(*full, omega, crds::FolnerWindow::box(1, 2), 0.5, Method::volume),
                    crds::ConfigError);
    const auto doubling = crds::make_random_expansion(crds::SymbolLaw::point_mass(2), 8);
    const auto w = crds::sample_environment(doubling->law(), 1, 0, 0);
    CHECK_THROWS_AS(crds::log_separated_count(*doubling, w, crds::FolnerWindow::box(1, 2), 0.1, Method::exact),
                    crds::ResourceCapError);
  }

  TEST_CASE("volume estimate sits between the greedy rows at eps and eps/2") {
    const auto cat = crds::make_toral_automorphism({2, 1, 1, 1}, 8);
    for (std::int64_t n = 1; n <= 4; ++n) {
      const auto vol = crds::sep_entropy_rate(*cat, n, 0.125, 1, Method::volume, {});
      const auto vol_half = crds::sep_entropy_rate(*cat, n, 0.0625, 1, Method::volume, {});
      REQUIRE(vol.upper_rate);
      CHECK(*vol.upper_rate == doctest::Approx(vol_half.mean_rate).epsilon(1e-14));
      CHECK(vol.mean_rate <= *vol.upper_rate + 1e-14);
    }
  }

  TEST_CASE("full shift headline is log 2") {
    const auto sys = crds::make_full_shift(2, 1, 64);
    const auto top = crds::estimate_h_top(*sys, {16, 32, 64}, {0.5}, 1, Method::exact, {});
    CHECK(std::abs(top.estimate.value - std::log(2.0)) < 1e-9);
    CHECK(top.estimate.extrapolation == crds::Extrapolation::linear_in_inverse_n);
    CHECK(top.estimate.fit_ns == std::vector<std::int64_t>{16, 32, 64});
    CHECK(top.table.rows().size() == 3);

    // A second box subsequence gives the same value.
    const auto odd = crds::estimate_h_top(*sys, {9, 27, 63}, {0.5}, 1, Method::exact, {});
    CHECK(std::abs(odd.estimate.value - std::log(2.0)) < 1e-9);

    const auto small = crds::make_full_shift(2, 1, 2);
    const auto row = crds::sep_entropy_rate(*small, 2, 0.5, 1, Method::exact, {});
    CHECK(row.mean_rate == doctest::Approx(0.5 * std::log(4.0)).epsilon(1e-15));
    CHECK(row.mean_count == doctest::Approx(4.0));
  }

  TEST_CASE("fiber entropy of the symbol partition is log k at every n") {
    for (int k = 2; k <= 3; ++k) {
      const auto sys = crds::make_full_shift(k, 1, 64);
      const auto symbol = crds::find_partition(*sys, "symbol");
      for (std::int64_t n = 1; n <= 64; ++n) {
        const auto row = crds::fiber_partition_entropy_rate(*sys, symbol, n, 1, {});
        REQUIRE(std::abs(row.mean_rate - std::log(static_cast<double>(k))) <= 1e-12);
      }
    }
    // Enumerated path on a small fiber.
    const auto small = crds::make_full_shift(2, 1, 10);
    const auto symbol = crds::find_partition(*small, "symbol");
    for (std::int64_t n = 1; n <= 10; ++n) {
      REQUIRE(std::abs(crds::fiber_partition_entropy_rate(*small, symbol, n, 1, {}).mean_rate - std::log(2.0)) <=
              1e-12);
    }
  }

  TEST_CASE("trivial partition has zero fiber entropy") {
    const std::vector<std::shared_ptr<const crds::ModelSystem>> systems = {
        crds::make_full_shift(2, 1, 8), crds::make_random_expansion(crds::SymbolLaw::point_mass(2), 8),
        crds::make_toral_automorphism({2, 1, 1, 1}, 4), crds::make_discrete_points(8)};
    for (const auto& sys : systems) {
      const auto row = crds::fiber_partition_entropy_rate(*sys, crds::trivial_partition(), 3, 1, {});
      CHECK(row.mean_rate == 0.0);
      CHECK(row.method == "fiber:trivial");
    }
  }

  TEST_CASE("doubling half-circle fiber entropy at n = 10") {
    const auto sys = crds::make_random_expansion(crds::SymbolLaw::point_mass(2), 16);
    const auto row = crds::fiber_partition_entropy_rate(*sys, crds::find_partition(*sys, "half"), 10, 1, {});
    CHECK(std::abs(row.mean_rate - std::log(2.0)) <= 0.02 * std::log(2.0));
    CHECK(row.eps == doctest::Approx(0.5));
  }

  TEST_CASE("extrapolation recovers the intercept of h + c/n") {
    std::vector<EntropyRow> rows;
    for (std::int64_t n : {2, 4, 8, 16}) {
      const double base = 0.7 + 0.9 / static_cast<double>(n);
      rows.push_back(synthetic_row(n, {base - 0.01, base + 0.01}));
    }
    std::vector<const EntropyRow*> ptrs;
    for (const auto& r : rows) ptrs.push_back(&r);
    const auto e = crds::extrapolate(ptrs, 1.0, 0.0);
    CHECK(e.value == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(e.fit_ns == std::vector<std::int64_t>{4, 8, 16});
    // Intercepts 0.69 and 0.71: standard error 0.01, residual 0.
    CHECK(e.ci_halfwidth == doctest::Approx(1.96 * 0.01).epsilon(1e-9));

    const auto single = crds::extrapolate({ptrs.front()}, 1.0, 0.0);
    CHECK(single.extrapolation == crds::Extrapolation::none);
    CHECK(single.value == doctest::Approx(rows.front().mean_rate));
  }

  TEST_CASE("occupancy guard drops saturated rows") {
    std::vector<EntropyRow> rows;
    const double counts[] = {2, 4, 8, 16, 500};
    std::int64_t n = 1;
    for (double c : counts) rows.push_back(synthetic_row(n++, {1.0}, c));
    std::vector<const EntropyRow*> ptrs;
    for (const auto& r : rows) ptrs.push_back(&r);
    // fiber of 1024: admissible means count <= 32.
    CHECK(crds::extrapolate(ptrs, 1024.0, 1.0 / 1024).fit_ns == std::vector<std::int64_t>{2, 3, 4});
    CHECK(crds::extrapolate(ptrs, 1024.0, 0.0).fit_ns == std::vector<std::int64_t>{3, 4, 5});
    CHECK(crds::extrapolate(ptrs, 16.0, 1.0 / 16).fit_ns == std::vector<std::int64_t>{1});
  }

  TEST_CASE("list validation") {
    CHECK_NOTHROW(crds::validate_n_list({1, 2, 5}));
    CHECK_THROWS_AS(crds::validate_n_list({}), crds::ConfigError);
    CHECK_THROWS_AS(crds::validate_n_list({2, 2}), crds::ConfigError);
    CHECK_THROWS_AS(crds::validate_n_list({0, 1}), crds::ConfigError);
    CHECK_NOTHROW(crds::validate_eps_list({0.5, 0.25}, 0.01));
    CHECK_THROWS_AS(crds::validate_eps_list({0.25, 0.5}, 0.0), crds::ConfigError);
    CHECK_THROWS_AS(crds::validate_eps_list({0.04}, 0.01), crds::ConfigError);
    try {
      crds::validate_eps_list({0.04}, 0.01);
    } catch (const crds::ConfigError& e) {
      CHECK(std::string(e.what()).find("eps_list") != std::string::npos);
    }
  }

  TEST_CASE("worker count does not change results") {
    const auto sys = crds::make_random_expansion(crds::SymbolLaw({2, 3}, {0.5, 0.5}), 10);
    RunOptions serial;
    serial.master_seed = 17;
    RunOptions parallel = serial;
    parallel.workers = 3;
    const auto a = crds::estimate_h_top(*sys, {1, 2, 3, 4}, {1.0 / 16}, 12, Method::greedy, serial);
    const auto b = crds::estimate_h_top(*sys, {1, 2, 3, 4}, {1.0 / 16}, 12, Method::greedy, parallel);
    CHECK(csv_of(a.table) == csv_of(b.table));
    CHECK(a.estimate.value == b.estimate.value);
    CHECK(a.table.rows().back().std_error > 0.0);
  }
}
