#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "crds/audit.hpp"
#include "crds/estimators.hpp"
#include "crds/models.hpp"

namespace crds {

/// Experiment settings as read from a config file or the command line. Empty
/// or unset fields fall back to the system's defaults at resolve time.
struct ExperimentConfig {
  std::string system;
  std::map<std::string, std::string> params;
  std::vector<std::int64_t> n_list;
  std::vector<double> eps_list;
  std::optional<std::int64_t> omega_samples;
  std::optional<std::uint64_t> seed;
  std::optional<Method> method;
  std::vector<std::string> partitions;
  std::string out;
  std::optional<std::int64_t> workers;
};

/// Accepts decimals and fractions such as "1/64".
double parse_real(std::string_view field, std::string_view text);
std::int64_t parse_integer(std::string_view field, std::string_view text);

/// Flat "key = value" lines; '#' starts a comment. Keys: system, n, eps,
/// omega_samples, seed, method, partitions, out, workers, param.<name>.
/// List values are comma separated. Throws ConfigError naming the line.
ExperimentConfig parse_config_text(std::string_view text);
ExperimentConfig load_config_file(const std::string& path);

/// Fields set in `top` replace those in `base`; params merge key by key.
void overlay(ExperimentConfig& base, const ExperimentConfig& top);

/// A validated config bound to a constructed system, defaults filled in.
struct Experiment {
  std::shared_ptr<const ModelSystem> system;
  std::vector<std::int64_t> n_list;
  std::vector<double> eps_list;
  std::size_t omega_samples = 1;
  std::uint64_t seed = 0;
  Method method = Method::greedy;
  std::vector<std::string> partitions;
  std::string out;
  std::size_t workers = 1;

  RunOptions options() const;
};

/// Throws ConfigError naming the violated field.
Experiment resolve(const ExperimentConfig& config);

/// Writes the CSV to experiment.out, or to `csv_fallback` when out is empty.
void emit_table(const Experiment& experiment, const EntropyTable& table, std::ostream& csv_fallback);

TopResult run_estimate_top(const Experiment& experiment);
/// One row group per requested partition, in request order.
std::vector<FiberResult> run_estimate_fiber(const Experiment& experiment);

struct PartitionGap {
  std::string partition;
  EntropyEstimate fiber;
  double gap = 0.0;
  double tolerance = 0.0;
  bool within = true;
};

struct VarprinReport {
  EntropyEstimate top;
  double oracle = 0.0;
  std::vector<PartitionGap> partitions;
  std::string best_partition;
  double best_fiber = 0.0;
  double gap = 0.0;
  double tolerance = 0.0;
  bool pass = true;
  std::string generating_partition;
  std::optional<double> generating_gap;
  std::optional<double> generating_slack;
  std::optional<bool> generating_closes;
  EntropyTable table;

  void write(std::ostream& out) const;
};

/// Fiber side ≤ top side + tolerance for every partition, where tolerance =
/// ci_top + ci_fiber + log|α| / n_fit and the top side is the greedy upper
/// bracket when one exists. The generating partition closes the gap when
/// |top − fiber| is within the same tolerance.
VarprinReport run_varprin(const Experiment& experiment);

void write_top_summary(std::ostream& out, const Experiment& experiment, const EntropyEstimate& estimate);
void write_fiber_summary(std::ostream& out, const FiberResult& result);

}  // namespace crds
