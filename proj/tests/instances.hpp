// Random separated-set instances shared by the unit and acceptance tests.
#pragma once

#include <algorithm>
#include <memory>
#include <random>
#include <vector>

#include "crds/models.hpp"

namespace instances {

// A subfiber of at most 16 points of one of the small systems, a box window
// index and a scale.
struct Instance {
  std::shared_ptr<const crds::ModelSystem> system;
  crds::EnvironmentPath omega;
  crds::FiberModel fiber;
  std::int64_t n;
  double eps;
};

inline std::vector<std::shared_ptr<const crds::ModelSystem>> small_systems() {
  return {crds::make_circle_expansion(crds::SymbolLaw::point_mass(2), 64),
          crds::make_random_expansion(crds::SymbolLaw({2, 3}, {0.5, 0.5}), 7),
          crds::make_toral_automorphism({2, 1, 1, 1}, 3), crds::make_full_shift(2, 2, 3),
          crds::make_discrete_points(12)};
}

inline Instance draw(const std::vector<std::shared_ptr<const crds::ModelSystem>>& systems, std::mt19937_64& rng) {
  const auto& sys = systems[rng() % systems.size()];
  const auto omega = crds::sample_environment(sys->law(), sys->group_dimension(), 77, rng() % 5);
  auto all = sys->fiber(omega).points;
  std::shuffle(all.begin(), all.end(), rng);
  const std::size_t size = 1 + rng() % std::min<std::size_t>(16, all.size());
  std::vector<crds::Point> pts(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(size));
  std::sort(pts.begin(), pts.end());
  const std::int64_t n = 1 + static_cast<std::int64_t>(rng() % 4);
  static const double scales[] = {0.03, 0.07, 0.125, 0.2, 0.26, 0.4, 0.5, 0.75};
  return Instance{sys, omega, crds::FiberModel{"sub", pts}, n, scales[rng() % 8]};
}

inline std::size_t exact_sep(const Instance& in, std::int64_t n, double eps) {
  return crds::max_separated_exact(*in.system, in.fiber, in.omega,
                                   crds::FolnerWindow::box(in.system->group_dimension(), n), eps)
      .cardinality;
}

}  // namespace instances
