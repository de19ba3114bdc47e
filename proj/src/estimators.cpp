#include "crds/estimators.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "crds/errors.hpp"

namespace crds {

void EntropyTable::add(EntropyRow row) {
  if (find(row.n, row.eps, row.method) != nullptr) {
    throw std::invalid_argument("entropy table: duplicate row for n=" + std::to_string(row.n) +
                                " method=" + row.method);
  }
  rows_.push_back(std::move(row));
}

void EntropyTable::append(const EntropyTable& other) {
  for (const auto& r : other.rows()) add(r);
}

const EntropyRow* EntropyTable::find(std::int64_t n, double eps, const std::string& method) const {
  for (const auto& r : rows_) {
    if (r.n == n && r.eps == eps && r.method == method) return &r;
  }
  return nullptr;
}

void EntropyTable::write_csv(std::ostream& out) const {
  out << kCsvHeader << '\n';
  char buf[64];
  auto real = [&buf](double v) {
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return std::string(buf);
  };
  for (const auto& r : rows_) {
    out << system_ << ',' << r.n << ',' << real(r.eps) << ',' << r.omega_samples << ',' << r.method << ','
        << real(r.mean_rate) << ',' << real(r.std_error) << '\n';
  }
}

std::string_view to_string(Extrapolation e) {
  return e == Extrapolation::none ? "none" : "linear-in-1/n";
}

void parallel_for(std::size_t count, std::size_t workers, const std::function<void(std::size_t)>& body) {
  workers = std::clamp<std::size_t>(workers, 1, std::max<std::size_t>(count, 1));
  std::vector<std::exception_ptr> errors(count);
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) {
      try {
        body(i);
      } catch (...) {
        errors[i] = std::current_exception();
        break;
      }
    }
  } else {
    std::atomic<std::size_t> next{0};
    std::atomic<bool> failed{false};
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
      pool.emplace_back([&] {
        for (std::size_t i = next++; i < count && !failed; i = next++) {
          try {
            body(i);
          } catch (...) {
            errors[i] = std::current_exception();
            failed = true;
          }
        }
      });
    }
  }
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

namespace {

struct Summary {
  double mean = 0.0;
  double std_error = 0.0;
};

// Fixed-order accumulation so every worker count gives the same bits.
Summary summarize(const std::vector<double>& xs) {
  Summary s;
  if (xs.empty()) return s;
  double sum = 0.0;
  for (double x : xs) sum += x;
  s.mean = sum / static_cast<double>(xs.size());
  // Identical samples (deterministic systems) give exactly zero spread.
  if (std::all_of(xs.begin(), xs.end(), [&](double x) { return x == xs.front(); })) {
    s.mean = xs.front();
    return s;
  }
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - s.mean) * (x - s.mean);
    s.std_error = std::sqrt(ss / static_cast<double>(xs.size() - 1)) / std::sqrt(static_cast<double>(xs.size()));
  }
  return s;
}

EnvironmentPath environment_for(const ModelSystem& system, const RunOptions& options, std::size_t index) {
  return sample_environment(system.law(), system.group_dimension(), options.master_seed, index);
}

bool upper_allowed(const ModelSystem& system, double eps) {
  return system.grid_spacing() == 0.0 || eps / 2.0 > 4.0 * system.grid_spacing();
}

}  // namespace

double log_separated_count(const ModelSystem& system, const EnvironmentPath& omega,
                           const FolnerWindow& window, double eps, Method method, std::size_t exact_cap) {
  const std::uint64_t size = system.fiber_size(omega);
  if (method == Method::volume) {
    if (!system.translation_invariant()) {
      throw ConfigError("method: volume needs a translation-invariant system, " + system.name() + " is not");
    }
    if (size > kFiberCap) {
      if (auto structured = system.structured_log_sep(omega, window, eps)) return *structured;
      throw ResourceCapError("fiber of " + std::to_string(size) + " points exceeds the enumeration cap " +
                             std::to_string(kFiberCap));
    }
    const FiberModel fiber = system.fiber(omega);
    const std::uint64_t volume = bowen_ball_volume(system, fiber, omega, window, eps);
    return std::log(static_cast<double>(fiber.points.size())) - std::log(static_cast<double>(volume));
  }
  const std::uint64_t limit = method == Method::exact ? std::min<std::uint64_t>(exact_cap, 64) : kFiberCap;
  if (size <= limit) {
    const FiberModel fiber = system.fiber(omega);
    const SeparatedSetResult r = method == Method::exact
                                     ? max_separated_exact(system, fiber, omega, window, eps, exact_cap)
                                     : max_separated_greedy(system, fiber, omega, window, eps);
    return std::log(static_cast<double>(r.cardinality));
  }
  if (auto structured = system.structured_log_sep(omega, window, eps)) return *structured;
  if (method == Method::exact) {
    throw ResourceCapError("fiber of " + std::to_string(size) + " points is too large for exact (cap " +
                           std::to_string(limit) + "); use the greedy method");
  }
  throw ResourceCapError("fiber of " + std::to_string(size) + " points exceeds the enumeration cap " +
                         std::to_string(kFiberCap));
}

EntropyRow sep_entropy_rate(const ModelSystem& system, std::int64_t n, double eps,
                            std::size_t omega_samples, Method method, const RunOptions& options) {
  if (omega_samples < 1) throw ConfigError("omega_samples: must be >= 1");
  if (!(eps > 0.0)) throw ConfigError("eps: must be > 0");
  const FolnerWindow window = FolnerWindow::box(system.group_dimension(), n);
  const bool upper = method != Method::exact && options.upper_bracket && upper_allowed(system, eps);
  const double size = static_cast<double>(window.size());

  std::vector<double> logs(omega_samples);
  std::vector<double> upper_logs(upper ? omega_samples : 0);
  parallel_for(omega_samples, options.workers, [&](std::size_t s) {
    const EnvironmentPath omega = environment_for(system, options, s);
    logs[s] = log_separated_count(system, omega, window, eps, method, options.exact_cap);
    if (upper) upper_logs[s] = log_separated_count(system, omega, window, eps / 2.0, method, options.exact_cap);
  });

  EntropyRow row;
  row.n = n;
  row.eps = eps;
  row.omega_samples = omega_samples;
  row.method = std::string(to_string(method));
  double count_sum = 0.0;
  for (double l : logs) {
    row.sample_rates.push_back(l / size);
    count_sum += std::exp(l);
  }
  row.mean_count = count_sum / static_cast<double>(omega_samples);
  const Summary s = summarize(row.sample_rates);
  row.mean_rate = s.mean;
  row.std_error = s.std_error;
  if (upper) {
    for (double l : upper_logs) row.sample_upper_rates.push_back(l / size);
    row.upper_rate = summarize(row.sample_upper_rates).mean;
  }
  return row;
}

EntropyRow fiber_partition_entropy_rate(const ModelSystem& system, const PartitionSpec& alpha,
                                        std::int64_t n, std::size_t omega_samples,
                                        const RunOptions& options) {
  if (omega_samples < 1) throw ConfigError("omega_samples: must be >= 1");
  const FolnerWindow window = FolnerWindow::box(system.group_dimension(), n);
  const double size = static_cast<double>(window.size());

  std::vector<double> entropies(omega_samples);
  std::vector<double> cells(omega_samples);
  parallel_for(omega_samples, options.workers, [&](std::size_t s) {
    const EnvironmentPath omega = environment_for(system, options, s);
    if (system.fiber_size(omega) <= kFiberCap) {
      const JoinedEntropy j =
          joined_partition_entropy(system, omega, window, alpha, system.invariant_measure(omega));
      entropies[s] = j.entropy;
      cells[s] = static_cast<double>(j.nonempty_cells);
      return;
    }
    if (auto h = system.structured_partition_entropy(omega, window, alpha)) {
      entropies[s] = *h;
      cells[s] = std::exp(*h);
      return;
    }
    throw ResourceCapError("fiber entropy: fiber exceeds the enumeration cap " + std::to_string(kFiberCap) +
                           " and partition " + alpha.name + " has no structural formula");
  });

  EntropyRow row;
  row.n = n;
  row.eps = alpha.declared_diameter.value_or(std::numeric_limits<double>::infinity());
  row.omega_samples = omega_samples;
  row.method = "fiber:" + alpha.name;
  double cell_sum = 0.0;
  for (std::size_t s = 0; s < omega_samples; ++s) {
    row.sample_rates.push_back(entropies[s] / size);
    cell_sum += cells[s];
  }
  row.mean_count = cell_sum / static_cast<double>(omega_samples);
  const Summary sm = summarize(row.sample_rates);
  row.mean_rate = sm.mean;
  row.std_error = sm.std_error;
  return row;
}

namespace {

struct LineFit {
  double intercept = 0.0;
  double slope = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const auto k = static_cast<double>(x.size());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
  }
  const double mx = sx / k;
  const double my = sy / k;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  LineFit f;
  f.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  f.intercept = my - f.slope * mx;
  return f;
}

std::optional<double> fit_upper(const std::vector<const EntropyRow*>& fit) {
  std::vector<double> x;
  std::vector<double> y;
  for (const auto* r : fit) {
    if (!r->upper_rate) return std::nullopt;
    x.push_back(1.0 / static_cast<double>(r->n));
    y.push_back(*r->upper_rate);
  }
  if (fit.size() == 1) return y.front();
  return least_squares(x, y).intercept;
}

}  // namespace

EntropyEstimate extrapolate(const std::vector<const EntropyRow*>& rows, double fiber_size, double grid_spacing) {
  if (rows.empty()) throw std::invalid_argument("extrapolate: no rows");
  std::vector<const EntropyRow*> admissible;
  for (const auto* r : rows) {
    if (grid_spacing == 0.0 || r->mean_count <= fiber_size / kOccupancyDivisor) admissible.push_back(r);
  }
  // Every row saturates the grid: fall back to the smallest window.
  if (admissible.empty()) admissible.push_back(rows.front());
  const std::size_t take = std::min<std::size_t>(3, admissible.size());
  const std::vector<const EntropyRow*> fit(admissible.end() - static_cast<std::ptrdiff_t>(take), admissible.end());

  EntropyEstimate e;
  e.epsilon_used = fit.front()->eps;
  for (const auto* r : fit) e.fit_ns.push_back(r->n);
  const std::size_t samples = fit.front()->sample_rates.size();

  if (fit.size() == 1) {
    const Summary s = summarize(fit.front()->sample_rates);
    e.value = s.mean;
    e.ci_halfwidth = 1.96 * s.std_error;
    e.extrapolation = Extrapolation::none;
    e.upper_value = fit_upper(fit);
    return e;
  }

  std::vector<double> x;
  for (const auto* r : fit) x.push_back(1.0 / static_cast<double>(r->n));
  std::vector<double> intercepts(samples);
  std::vector<double> y(fit.size());
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t j = 0; j < fit.size(); ++j) y[j] = fit[j]->sample_rates[s];
    intercepts[s] = least_squares(x, y).intercept;
  }
  const Summary s = summarize(intercepts);

  for (std::size_t j = 0; j < fit.size(); ++j) y[j] = fit[j]->mean_rate;
  const LineFit mean_fit = least_squares(x, y);
  double residual = 0.0;
  for (std::size_t j = 0; j < fit.size(); ++j) {
    residual = std::max(residual, std::abs(y[j] - (mean_fit.intercept + mean_fit.slope * x[j])));
  }

  e.value = s.mean;
  e.ci_halfwidth = 1.96 * s.std_error + residual;
  e.extrapolation = Extrapolation::linear_in_inverse_n;
  e.upper_value = fit_upper(fit);
  return e;
}

void validate_n_list(const std::vector<std::int64_t>& n_list) {
  if (n_list.empty()) throw ConfigError("n_list: must not be empty");
  for (std::size_t i = 0; i < n_list.size(); ++i) {
    if (n_list[i] < 1) throw ConfigError("n_list: window indices must be >= 1");
    if (i > 0 && n_list[i] <= n_list[i - 1]) throw ConfigError("n_list: must be strictly increasing");
  }
}

void validate_eps_list(const std::vector<double>& eps_list, double grid_spacing) {
  if (eps_list.empty()) throw ConfigError("eps_list: must not be empty");
  for (std::size_t i = 0; i < eps_list.size(); ++i) {
    const double eps = eps_list[i];
    if (!(eps > 0.0) || !std::isfinite(eps)) throw ConfigError("eps_list: values must be finite and > 0");
    if (i > 0 && eps >= eps_list[i - 1]) throw ConfigError("eps_list: must be strictly decreasing");
    if (grid_spacing > 0.0 && !(eps > 4.0 * grid_spacing)) {
      throw ConfigError("eps_list: eps " + std::to_string(eps) + " violates the grid guard eps > 4 * spacing = " +
                        std::to_string(4.0 * grid_spacing));
    }
  }
}

TopResult estimate_h_top(const ModelSystem& system, const std::vector<std::int64_t>& n_list,
                         const std::vector<double>& eps_list, std::size_t omega_samples, Method method,
                         const RunOptions& options) {
  validate_n_list(n_list);
  validate_eps_list(eps_list, system.grid_spacing());
  if (omega_samples < 1) throw ConfigError("omega_samples: must be >= 1");

  TopResult result;
  result.table = EntropyTable(system.label());
  for (double eps : eps_list) {
    for (std::int64_t n : n_list) {
      result.table.add(sep_entropy_rate(system, n, eps, omega_samples, method, options));
    }
  }

  const double eps = eps_list.back();
  std::vector<const EntropyRow*> headline;
  for (std::int64_t n : n_list) headline.push_back(result.table.find(n, eps, std::string(to_string(method))));
  const EnvironmentPath omega0 = environment_for(system, options, 0);
  result.estimate = extrapolate(headline, static_cast<double>(system.fiber_size(omega0)), system.grid_spacing());
  return result;
}

FiberResult estimate_fiber_entropy(const ModelSystem& system, const PartitionSpec& alpha,
                                   const std::vector<std::int64_t>& n_list, std::size_t omega_samples,
                                   const RunOptions& options) {
  validate_n_list(n_list);
  if (omega_samples < 1) throw ConfigError("omega_samples: must be >= 1");

  FiberResult result;
  result.partition = alpha.name;
  result.table = EntropyTable(system.label());
  for (std::int64_t n : n_list) {
    result.table.add(fiber_partition_entropy_rate(system, alpha, n, omega_samples, options));
  }
  std::vector<const EntropyRow*> rows;
  for (const auto& r : result.table.rows()) rows.push_back(&r);
  const EnvironmentPath omega0 = environment_for(system, options, 0);
  result.estimate = extrapolate(rows, static_cast<double>(system.fiber_size(omega0)), system.grid_spacing());
  return result;
}

}  // namespace crds
