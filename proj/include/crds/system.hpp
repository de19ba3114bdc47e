#pragma once

#include <compare>
#include <cstdint>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crds/environment.hpp"
#include "crds/group.hpp"

namespace crds {

/// A point of a finite fiber model. Its meaning is owned by the system that
/// produced it (grid index, torus pair, packed word); all systems keep the
/// encoding exact so that point identity is bitwise.
struct Point {
  std::uint64_t a = 0;
  std::uint64_t b = 0;
  friend auto operator<=>(const Point&, const Point&) = default;
};

/// Finite subset of E_ω, in a fixed order. The metric lives on the system.
struct FiberModel {
  std::string label;
  std::vector<Point> points;
};

/// Evaluates the orbit (F_{s,ω} x)_{s ∈ F} for one bound (ω, F) pair.
class OrbitEvaluator {
 public:
  virtual ~OrbitEvaluator() = default;
  /// out.size() must equal |F|; out[i] = F_{F[i], ω} x.
  virtual void orbit(const Point& x, std::span<Point> out) const = 0;
};

/// Bucketing of fiber points such that any two points within the bound radius
/// of each other fall in the same or neighboring cells.
class ProximityIndex {
 public:
  virtual ~ProximityIndex() = default;
  virtual std::size_t cell_count() const { return 1; }
  virtual std::size_t cell_of(const Point&) const { return 0; }
  /// Cells that may hold points within the radius of a point in `cell`,
  /// `cell` included.
  virtual void neighbor_cells(std::size_t cell, std::vector<std::size_t>& out) const {
    (void)cell;
    out.assign(1, 0);
  }
};

/// Continuous bundle random dynamical system over Z^d with finite fibers:
/// cocycle maps F_{g,ω}: E_ω → E_{gω} and a base metric d on X.
class RandomDynamicalSystem {
 public:
  virtual ~RandomDynamicalSystem() = default;

  virtual std::string name() const = 0;
  virtual int group_dimension() const { return 1; }
  /// True when the cocycle is defined on the whole group; otherwise only on
  /// the forward monoid (all coordinates >= 0).
  virtual bool invertible() const = 0;
  virtual std::shared_ptr<const SymbolLaw> law() const = 0;

  /// Base metric d on X.
  virtual double distance(const Point& x, const Point& y) const = 0;
  /// F_{g,ω} x without the domain check; use apply_cocycle from callers.
  virtual Point map(const GroupElement& g, const EnvironmentPath& omega, const Point& x) const = 0;

  virtual std::uint64_t fiber_size(const EnvironmentPath& omega) const = 0;
  /// Enumerates E_ω; throws ResourceCapError when it is too large.
  virtual FiberModel fiber(const EnvironmentPath& omega) const = 0;
  virtual bool in_fiber(const EnvironmentPath& omega, const Point& x) const = 0;
  /// Deterministic pseudo-random point of E_ω derived from `key`.
  virtual Point random_point(const EnvironmentPath& omega, std::uint64_t key) const = 0;

  /// True when E_ω is an abelian group with zero Point{}, every F_{g,ω} is a
  /// homomorphism and d is translation invariant, so d^ω_F(x, y) depends on
  /// x - y only.
  virtual bool translation_invariant() const { return false; }

  /// Spacing of the underlying grid, or 0 when the fiber model is exact.
  virtual double grid_spacing() const { return 0.0; }

  /// Generic evaluator calls `map` for every window element. Systems override
  /// it to precompute per-ω data.
  virtual std::unique_ptr<OrbitEvaluator> bind(const EnvironmentPath& omega,
                                               const FolnerWindow& window) const;
  virtual std::unique_ptr<ProximityIndex> proximity_index(double radius) const;
};

bool in_domain(const RandomDynamicalSystem& system, const GroupElement& g);
/// Throws DomainError if some window element is outside the cocycle domain.
void check_window_domain(const RandomDynamicalSystem& system, const FolnerWindow& window);

/// F_{g,ω} x. Throws DomainError outside the declared domain.
Point apply_cocycle(const RandomDynamicalSystem& system, const GroupElement& g,
                    const EnvironmentPath& omega, const Point& x);

/// Θ_g(ω, x) = (gω, F_{g,ω} x).
std::pair<EnvironmentPath, Point> skew_step(const RandomDynamicalSystem& system,
                                            const GroupElement& g, const EnvironmentPath& omega,
                                            const Point& x);

/// d^ω_F(x, y) = max_{s∈F} d(F_{s,ω} x, F_{s,ω} y).
double bowen_distance(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                      const FolnerWindow& window, const Point& x, const Point& y);

/// Max of base distances along two precomputed orbits.
double orbit_distance(const RandomDynamicalSystem& system, std::span<const Point> x,
                      std::span<const Point> y);
/// True iff every base distance along the orbits is <= eps (early exit).
bool orbits_within(const RandomDynamicalSystem& system, std::span<const Point> x,
                   std::span<const Point> y, double eps);

/// F_{g2, g1ω} ∘ F_{g1, ω} (x) == F_{g2 g1, ω} (x), compared exactly.
bool cocycle_audit(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                   const GroupElement& g1, const GroupElement& g2, const Point& x);

}  // namespace crds
