#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "crds/models.hpp"
#include "crds/partition.hpp"
#include "crds/separated.hpp"

namespace crds {

/// One (n, eps, method) cell of an entropy table.
struct EntropyRow {
  std::int64_t n = 0;
  /// Separation scale; for fiber rows the declared partition diameter
  /// (infinity when unbounded).
  double eps = 0.0;
  std::size_t omega_samples = 0;
  /// "exact", "greedy", "volume", or "fiber:<partition>".
  std::string method;
  double mean_rate = 0.0;
  double std_error = 0.0;

  /// Per-sample rates in sample-index order.
  std::vector<double> sample_rates;
  /// Mean separated-set size, or mean number of nonempty joined cells.
  double mean_count = 0.0;
  /// Greedy and volume rows: the same estimator at eps/2, an upper bracket
  /// for log Sep(eps).
  std::optional<double> upper_rate;
  std::vector<double> sample_upper_rates;
};

/// Rows keyed uniquely by (n, eps, method), kept in insertion order.
class EntropyTable {
 public:
  EntropyTable() = default;
  explicit EntropyTable(std::string system) : system_(std::move(system)) {}

  const std::string& system() const { return system_; }
  const std::vector<EntropyRow>& rows() const { return rows_; }
  /// Throws std::invalid_argument on a duplicate key.
  void add(EntropyRow row);
  void append(const EntropyTable& other);
  const EntropyRow* find(std::int64_t n, double eps, const std::string& method) const;

  static constexpr const char* kCsvHeader = "system,n,eps,omega_samples,method,mean_rate,std_error";
  /// Header plus one line per row; reals printed with %.17g.
  void write_csv(std::ostream& out) const;

 private:
  std::string system_;
  std::vector<EntropyRow> rows_;
};

enum class Extrapolation { none, linear_in_inverse_n };
std::string_view to_string(Extrapolation e);

struct EntropyEstimate {
  double value = 0.0;
  double epsilon_used = 0.0;
  double ci_halfwidth = 0.0;
  Extrapolation extrapolation = Extrapolation::none;
  /// Greedy and volume runs: the same extrapolation applied to the eps/2 rates.
  std::optional<double> upper_value;
  /// Window indices that entered the fit.
  std::vector<std::int64_t> fit_ns;
};

struct RunOptions {
  std::uint64_t master_seed = 0;
  /// Worker threads for the ω-samples; results do not depend on it.
  std::size_t workers = 1;
  std::size_t exact_cap = kDefaultExactCap;
  /// Greedy and volume runs also compute the eps/2 bracket.
  bool upper_bracket = true;
};

/// Runs body(i) for i in [0, count) on up to `workers` threads. Exceptions
/// are rethrown on the caller's thread (lowest index first).
void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body);

/// log Sep(ω, F, eps) by the given method. Enumerates the fiber when it fits
/// (exact: within exact_cap; greedy, volume: within kFiberCap) and otherwise
/// uses the system's structural count, which is exact. Volume returns
/// log(|E_ω| / |B_F(eps)|), bracketed like greedy.
double log_separated_count(const ModelSystem& system, const EnvironmentPath& omega,
                           const FolnerWindow& window, double eps, Method method,
                           std::size_t exact_cap = kDefaultExactCap);

/// ω-average of (1/|F_n|) log Sep(ω, F_n, eps) over omega_samples environments.
EntropyRow sep_entropy_rate(const ModelSystem& system, std::int64_t n, double eps,
                            std::size_t omega_samples, Method method, const RunOptions& options);

/// ω-average of (1/|F_n|) H_{μ_ω}(⋁_{g∈F_n} F_{g,ω}^{-1} α) under the
/// system's invariant fiber measures.
EntropyRow fiber_partition_entropy_rate(const ModelSystem& system, const PartitionSpec& alpha,
                                        std::int64_t n, std::size_t omega_samples,
                                        const RunOptions& options);

/// Fit rows: on grid systems only rows whose mean count is at most
/// fiber_size / kOccupancyDivisor, i.e. well below saturation of the grid.
inline constexpr double kOccupancyDivisor = 32.0;

/// Least-squares fit rate ≈ h + c/n over the three largest admissible rows,
/// done per ω-sample. ci = 1.96 · standard error of the per-sample intercepts
/// plus the largest residual of the mean fit. `rows` must share eps, method
/// and sample count and be sorted by n.
EntropyEstimate extrapolate(const std::vector<const EntropyRow*>& rows, double fiber_size, double grid_spacing);

struct TopResult {
  EntropyEstimate estimate;
  EntropyTable table;
};

/// Fills the table for all (n, eps) and extrapolates at the smallest eps.
/// Throws ConfigError when n_list is not strictly increasing, eps_list not
/// strictly decreasing, or some eps <= 4 · grid spacing.
TopResult estimate_h_top(const ModelSystem& system, const std::vector<std::int64_t>& n_list,
                         const std::vector<double>& eps_list, std::size_t omega_samples, Method method,
                         const RunOptions& options);

struct FiberResult {
  std::string partition;
  EntropyEstimate estimate;
  EntropyTable table;
};

FiberResult estimate_fiber_entropy(const ModelSystem& system, const PartitionSpec& alpha,
                                   const std::vector<std::int64_t>& n_list, std::size_t omega_samples,
                                   const RunOptions& options);

void validate_n_list(const std::vector<std::int64_t>& n_list);
void validate_eps_list(const std::vector<double>& eps_list, double grid_spacing);

}  // namespace crds
