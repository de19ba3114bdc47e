#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "crds/system.hpp"

namespace crds {

enum class Method { exact, greedy, volume };

std::string_view to_string(Method method);
/// Throws ConfigError for anything but "exact", "greedy" or "volume".
Method parse_method(std::string_view text);

/// Default size cap for the exhaustive solver, in fiber points.
inline constexpr std::size_t kDefaultExactCap = 24;

/// An (ω, F, ε)-separated subset of a fiber together with how it was found.
struct SeparatedSetResult {
  std::size_t cardinality = 0;
  /// Indices into FiberModel::points, ascending.
  std::vector<std::size_t> witness;
  Method method = Method::greedy;
  double epsilon = 0.0;
  FolnerWindow window = FolnerWindow::box(1, 1);
};

std::vector<Point> witness_points(const FiberModel& fiber, const SeparatedSetResult& result);

/// True iff every distinct pair has Bowen distance strictly greater than eps.
bool is_separated(const RandomDynamicalSystem& system, std::span<const Point> points,
                  const EnvironmentPath& omega, const FolnerWindow& window, double eps);

/// Maximum-cardinality separated subset by branch and bound over the graph
/// joining pairs with d^ω_F <= eps. Among maximum sets the lexicographically
/// smallest index list is returned. Throws ResourceCapError when the fiber has
/// more than `cap` points.
SeparatedSetResult max_separated_exact(const RandomDynamicalSystem& system, const FiberModel& fiber,
                                       const EnvironmentPath& omega, const FolnerWindow& window,
                                       double eps, std::size_t cap = kDefaultExactCap);

/// Lexicographic greedy sweep: a point is kept unless it lies within eps of a
/// point already kept. The result is maximal by inclusion.
SeparatedSetResult max_separated_greedy(const RandomDynamicalSystem& system,
                                        const FiberModel& fiber, const EnvironmentPath& omega,
                                        const FolnerWindow& window, double eps);

/// Number of centers of a greedy eps-covering of the fiber in d^ω_F: every
/// fiber point ends within distance eps of some center.
std::size_t spanning_number(const RandomDynamicalSystem& system, const FiberModel& fiber,
                            const EnvironmentPath& omega, const FolnerWindow& window, double eps);

/// |{v ∈ E_ω : d^ω_F(0, v) <= eps}| for translation-invariant systems. Since
/// a maximal eps-separated set spans and eps-balls around a 2eps-separated
/// set are disjoint, |E_ω| / volume lies in [Sep(2 eps), Sep(eps)]. Throws
/// std::invalid_argument when the system is not translation invariant.
std::uint64_t bowen_ball_volume(const RandomDynamicalSystem& system, const FiberModel& fiber,
                                const EnvironmentPath& omega, const FolnerWindow& window, double eps);

}  // namespace crds
