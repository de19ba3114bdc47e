#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "crds/environment.hpp"
#include "crds/partition.hpp"
#include "crds/separated.hpp"
#include "crds/system.hpp"

namespace crds {

struct OracleValue {
  double value = 0.0;
  std::string derivation;
};

/// Parameters a system suggests when the caller supplies none.
struct SystemDefaults {
  std::vector<std::int64_t> n_list;
  std::vector<double> eps_list;
  Method method = Method::greedy;
  std::size_t omega_samples = 1;
};

/// A random dynamical system bundled with an invariant fiber measure,
/// canonical partitions and a closed-form entropy value.
class ModelSystem : public RandomDynamicalSystem {
 public:
  /// Name plus parameters, e.g. "full-shift;k=2;m=1;n_max=64". Contains no commas.
  virtual std::string label() const = 0;

  /// μ_ω of the known invariant measure μ = ∫ μ_ω dP.
  virtual FiberMeasure invariant_measure(const EnvironmentPath& omega) const = 0;
  virtual std::vector<PartitionSpec> canonical_partitions() const = 0;
  /// Name of a canonical partition whose fiber entropy attains the oracle, or
  /// empty when none is declared.
  virtual std::string generating_partition() const { return {}; }
  /// A partition with every cell of base-metric diameter <= r.
  virtual PartitionSpec partition_with_diameter(double r) const = 0;
  virtual OracleValue oracle() const = 0;
  virtual SystemDefaults defaults() const = 0;

  /// Exact log Sep(ω, F, eps) from the structure of the system, for fibers too
  /// large to enumerate.
  virtual std::optional<double> structured_log_sep(const EnvironmentPath& omega,
                                                   const FolnerWindow& window, double eps) const;
  /// Exact H_{μ_ω}(⋁ F_{g,ω}^{-1} α) from the structure of the system.
  virtual std::optional<double> structured_partition_entropy(const EnvironmentPath& omega,
                                                             const FolnerWindow& window,
                                                             const PartitionSpec& alpha) const;

  /// Total variation between (F_{g,ω})_* μ_ω and μ_{gω}. Grid systems compare
  /// on the coarsest blocks the pushed grid resolves.
  virtual double invariance_defect(const EnvironmentPath& omega, const GroupElement& g) const;
};

/// Looks up a canonical partition (or "trivial") by name; throws ConfigError.
PartitionSpec find_partition(const ModelSystem& system, std::string_view name);
double oracle_entropy(const ModelSystem& system);

/// Fiber-enumeration cap shared by all finite models.
inline constexpr std::uint64_t kFiberCap = std::uint64_t{1} << 24;

/// Two-sided full shift on k symbols with the cylinder metric
/// d(x, y) = 2^{-min{|i| : x_i != y_i}}. Fibers are the periodic words of
/// period n_max + 2m - 2, so that Sep(F_n, 2^{-m}) = k^{n+2m-2} for n <= n_max.
std::unique_ptr<ModelSystem> make_full_shift(int k, int m, int n_max);

/// x -> m(ω_0) x mod N on the grid Z/N, forward monoid only; m drawn i.i.d.
/// from `multipliers`.
std::unique_ptr<ModelSystem> make_circle_expansion(const SymbolLaw& multipliers, std::uint64_t modulus);
/// Grid Z/2^Q.
std::unique_ptr<ModelSystem> make_random_expansion(const SymbolLaw& multipliers, int grid_exponent);

/// Unimodular integer matrix acting on (Z/2^Q)^2 with the sup torus metric.
std::unique_ptr<ModelSystem> make_toral_automorphism(const std::array<std::int64_t, 4>& matrix,
                                                     int grid_exponent);

/// k points, discrete metric, identity dynamics.
std::unique_ptr<ModelSystem> make_discrete_points(std::size_t k);

struct SystemInfo {
  std::string name;
  std::string summary;
  std::string default_params;
};

std::vector<SystemInfo> list_systems();

/// Builds a system from its registry name and key=value parameters. Throws
/// ConfigError on unknown names, unknown keys or bad values.
std::unique_ptr<ModelSystem> make_system(std::string_view name,
                                         const std::map<std::string, std::string>& params);

}  // namespace crds
