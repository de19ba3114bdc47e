#include "crds/system.hpp"

#include <algorithm>

#include "crds/errors.hpp"

namespace crds {

namespace {

class GenericOrbit final : public OrbitEvaluator {
 public:
  GenericOrbit(const RandomDynamicalSystem& system, EnvironmentPath omega, FolnerWindow window)
      : system_(system), omega_(std::move(omega)), window_(std::move(window)) {}

  void orbit(const Point& x, std::span<Point> out) const override {
    for (std::size_t i = 0; i < window_.size(); ++i) out[i] = system_.map(window_[i], omega_, x);
  }

 private:
  const RandomDynamicalSystem& system_;
  EnvironmentPath omega_;
  FolnerWindow window_;
};

}  // namespace

std::unique_ptr<OrbitEvaluator> RandomDynamicalSystem::bind(const EnvironmentPath& omega,
                                                            const FolnerWindow& window) const {
  check_window_domain(*this, window);
  return std::make_unique<GenericOrbit>(*this, omega, window);
}

std::unique_ptr<ProximityIndex> RandomDynamicalSystem::proximity_index(double) const {
  return std::make_unique<ProximityIndex>();
}

bool in_domain(const RandomDynamicalSystem& system, const GroupElement& g) {
  if (g.dimension() != system.group_dimension()) return false;
  if (system.invertible()) return true;
  for (int i = 0; i < g.dimension(); ++i) {
    if (g[i] < 0) return false;
  }
  return true;
}

void check_window_domain(const RandomDynamicalSystem& system, const FolnerWindow& window) {
  for (const auto& g : window.elements()) {
    if (!in_domain(system, g)) {
      throw DomainError(system.name() + ": window element " + g.to_string() +
                        " is outside the cocycle domain");
    }
  }
}

Point apply_cocycle(const RandomDynamicalSystem& system, const GroupElement& g,
                    const EnvironmentPath& omega, const Point& x) {
  if (!in_domain(system, g)) {
    throw DomainError(system.name() + ": group element " + g.to_string() +
                      " is outside the cocycle domain");
  }
  return system.map(g, omega, x);
}

std::pair<EnvironmentPath, Point> skew_step(const RandomDynamicalSystem& system,
                                            const GroupElement& g, const EnvironmentPath& omega,
                                            const Point& x) {
  Point y = apply_cocycle(system, g, omega, x);
  return {shift_environment(g, omega), y};
}

double bowen_distance(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                      const FolnerWindow& window, const Point& x, const Point& y) {
  double d = 0.0;
  for (const auto& s : window.elements()) {
    d = std::max(d, system.distance(apply_cocycle(system, s, omega, x),
                                    apply_cocycle(system, s, omega, y)));
  }
  return d;
}

double orbit_distance(const RandomDynamicalSystem& system, std::span<const Point> x,
                      std::span<const Point> y) {
  double d = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) d = std::max(d, system.distance(x[i], y[i]));
  return d;
}

bool orbits_within(const RandomDynamicalSystem& system, std::span<const Point> x,
                   std::span<const Point> y, double eps) {
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (system.distance(x[i], y[i]) > eps) return false;
  }
  return true;
}

bool cocycle_audit(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                   const GroupElement& g1, const GroupElement& g2, const Point& x) {
  const Point first = apply_cocycle(system, g1, omega, x);
  const Point lhs = apply_cocycle(system, g2, shift_environment(g1, omega), first);
  const Point rhs = apply_cocycle(system, compose(g2, g1), omega, x);
  return lhs == rhs;
}

}  // namespace crds
