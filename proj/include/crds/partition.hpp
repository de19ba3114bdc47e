#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "crds/separated.hpp"
#include "crds/system.hpp"

namespace crds {

/// Finite partition of X, restricted to whichever fiber it is applied to.
struct PartitionSpec {
  std::string name;
  std::vector<std::string> labels;
  /// Cell index in [0, labels.size()).
  std::function<std::size_t(const Point&)> classify;
  /// Upper bound on the base-metric diameter of every cell; nullopt = unbounded.
  std::optional<double> declared_diameter;
  /// Symbolic systems only: coordinates whose symbols determine the cell.
  std::vector<std::int64_t> coordinates;

  std::size_t size() const { return labels.size(); }
  /// classify() with a range check.
  std::size_t cell_of(const Point& x) const;
};

PartitionSpec trivial_partition();

/// Every fiber point classified into a valid cell (so exactly one).
bool covers_exactly_once(const PartitionSpec& partition, const FiberModel& fiber);
/// Largest base-metric diameter of a cell, computed exhaustively over the fiber.
double measured_diameter(const RandomDynamicalSystem& system, const PartitionSpec& partition,
                         const FiberModel& fiber);

/// Probability measure with finite support on a fiber. Support is sorted and
/// unique; weights are aligned with it.
struct FiberMeasure {
  std::vector<Point> support;
  std::vector<double> weights;

  static FiberMeasure uniform(std::vector<Point> points);
  /// Sorts and merges duplicate points by summing their weights.
  static FiberMeasure from_pairs(std::vector<std::pair<Point, double>> pairs);

  double total() const;
  double weight_of(const Point& x) const;
};

double total_variation(const FiberMeasure& a, const FiberMeasure& b);

/// -Σ p log p with 0 log 0 = 0. Rejects negative weights and vectors whose
/// sum is off 1 by more than 1e-9.
double shannon_entropy(std::span<const double> weights);

struct BoundSides {
  double lhs = 0.0;
  double rhs = 0.0;
};

/// Both sides of Σ p_m (a_m - log p_m) <= log Σ e^{a_m}.
BoundSides entropy_bound_check(std::span<const double> p, std::span<const double> a);

/// ⋁_{g∈F} F_{g,ω}^{-1} C(gω) on the given fiber. Cells are the nonempty
/// itinerary classes, labelled "c0.c1...." and ordered lexicographically by
/// itinerary. The returned classifier keeps a reference to `system`.
PartitionSpec joined_partition(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                               const FolnerWindow& window, const PartitionSpec& partition,
                               const FiberModel& fiber);

struct JoinedEntropy {
  double entropy = 0.0;
  std::size_t nonempty_cells = 0;
};

/// H_μ(C_F(ω)) computed directly from itineraries of the support points.
JoinedEntropy joined_partition_entropy(const RandomDynamicalSystem& system,
                                       const EnvironmentPath& omega, const FolnerWindow& window,
                                       const PartitionSpec& partition, const FiberMeasure& measure);

/// H_μ(α | C). Cells of C with zero mass contribute nothing.
double conditional_partition_entropy(const FiberMeasure& measure, const PartitionSpec& alpha,
                                     const PartitionSpec& conditioning);

/// ν_ω: uniform measure on the solver's witness.
FiberMeasure empirical_nu(const RandomDynamicalSystem& system, const FiberModel& fiber,
                          const EnvironmentPath& omega, const FolnerWindow& window, double eps,
                          Method method, std::size_t exact_cap = kDefaultExactCap);

struct PushedMeasure {
  EnvironmentPath environment;
  FiberMeasure measure;
  double weight = 0.0;
};

/// μ = (1/|F|) Σ_{g∈F} (Θ_g)_* ν, one entry per g in window order.
std::vector<PushedMeasure> empirical_mu(const RandomDynamicalSystem& system, const FiberMeasure& nu,
                                        const EnvironmentPath& omega, const FolnerWindow& window);

/// True iff no cell of the joined partition C_F(ω) holds two witness points.
/// Guaranteed when diam(C) <= eps and the witness is (ω, F, eps)-separated.
bool atom_injectivity_check(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                            const FolnerWindow& window, double eps, const PartitionSpec& partition,
                            std::span<const Point> witness);

}  // namespace crds
