#include "crds/experiment.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "crds/errors.hpp"

namespace crds {

namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split_list(std::string_view s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const auto comma = s.find(',', start);
    const auto end = comma == std::string_view::npos ? s.size() : comma;
    const std::string item = trim(s.substr(start, end - start));
    if (!item.empty()) out.push_back(item);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

std::string fmt(double v, const char* spec = "%.6f") {
  char buf[64];
  std::snprintf(buf, sizeof buf, spec, v);
  return buf;
}

std::vector<std::int64_t> parse_n_values(std::string_view field, std::string_view text) {
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(text)) {
    const auto dots = item.find("..");
    if (dots == std::string::npos) {
      out.push_back(parse_integer(field, item));
      continue;
    }
    const auto lo = parse_integer(field, item.substr(0, dots));
    const auto hi = parse_integer(field, item.substr(dots + 2));
    if (hi < lo || hi - lo > 100000) throw ConfigError(std::string(field) + ": bad range '" + item + "'");
    for (auto n = lo; n <= hi; ++n) out.push_back(n);
  }
  return out;
}

}  // namespace

double parse_real(std::string_view field, std::string_view text) {
  const std::string t = trim(text);
  const auto slash = t.find('/');
  if (slash != std::string::npos) {
    const double den = parse_real(field, t.substr(slash + 1));
    if (den == 0.0) throw ConfigError(std::string(field) + ": division by zero in '" + t + "'");
    return parse_real(field, t.substr(0, slash)) / den;
  }
  try {
    std::size_t used = 0;
    const double v = std::stod(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string(field) + ": expected a number, got '" + t + "'");
}

std::int64_t parse_integer(std::string_view field, std::string_view text) {
  const std::string t = trim(text);
  try {
    std::size_t used = 0;
    const long long v = std::stoll(t, &used);
    if (used == t.size()) return v;
  } catch (const std::exception&) {
  }
  throw ConfigError(std::string(field) + ": expected an integer, got '" + t + "'");
}

ExperimentConfig parse_config_text(std::string_view text) {
  ExperimentConfig c;
  std::istringstream in{std::string(text)};
  std::string line;
  int number = 0;
  while (std::getline(in, line)) {
    ++number;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    const std::string body = trim(line);
    if (body.empty()) continue;
    const auto eq = body.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("config line " + std::to_string(number) + ": expected key = value");
    }
    const std::string key = trim(std::string_view(body).substr(0, eq));
    const std::string value = trim(std::string_view(body).substr(eq + 1));
    if (key == "system") {
      c.system = value;
    } else if (key == "n") {
      c.n_list = parse_n_values("n", value);
    } else if (key == "eps") {
      c.eps_list.clear();
      for (const auto& item : split_list(value)) c.eps_list.push_back(parse_real("eps", item));
    } else if (key == "omega_samples") {
      c.omega_samples = parse_integer("omega_samples", value);
    } else if (key == "seed") {
      c.seed = static_cast<std::uint64_t>(parse_integer("seed", value));
    } else if (key == "method") {
      c.method = parse_method(value);
    } else if (key == "partitions") {
      c.partitions = split_list(value);
    } else if (key == "out") {
      c.out = value;
    } else if (key == "workers") {
      c.workers = parse_integer("workers", value);
    } else if (key.rfind("param.", 0) == 0 && key.size() > 6) {
      c.params[key.substr(6)] = value;
    } else {
      throw ConfigError("config line " + std::to_string(number) + ": unknown key '" + key + "'");
    }
  }
  return c;
}

ExperimentConfig load_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("config: cannot read '" + path + "'");
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config_text(text.str());
}

void overlay(ExperimentConfig& base, const ExperimentConfig& top) {
  if (!top.system.empty()) base.system = top.system;
  for (const auto& [k, v] : top.params) base.params[k] = v;
  if (!top.n_list.empty()) base.n_list = top.n_list;
  if (!top.eps_list.empty()) base.eps_list = top.eps_list;
  if (top.omega_samples) base.omega_samples = top.omega_samples;
  if (top.seed) base.seed = top.seed;
  if (top.method) base.method = top.method;
  if (!top.partitions.empty()) base.partitions = top.partitions;
  if (!top.out.empty()) base.out = top.out;
  if (top.workers) base.workers = top.workers;
}

RunOptions Experiment::options() const {
  RunOptions o;
  o.master_seed = seed;
  o.workers = workers;
  return o;
}

Experiment resolve(const ExperimentConfig& config) {
  if (config.system.empty()) throw ConfigError("system: required (see list-systems)");
  Experiment e;
  e.system = make_system(config.system, config.params);
  const SystemDefaults d = e.system->defaults();

  e.n_list = config.n_list.empty() ? d.n_list : config.n_list;
  validate_n_list(e.n_list);
  e.eps_list = config.eps_list.empty() ? d.eps_list : config.eps_list;
  validate_eps_list(e.eps_list, e.system->grid_spacing());

  const std::int64_t samples = config.omega_samples.value_or(static_cast<std::int64_t>(d.omega_samples));
  if (samples < 1) throw ConfigError("omega_samples: must be >= 1, got " + std::to_string(samples));
  e.omega_samples = static_cast<std::size_t>(samples);

  const std::int64_t workers = config.workers.value_or(1);
  if (workers < 1 || workers > 256) throw ConfigError("workers: must be in [1, 256], got " + std::to_string(workers));
  e.workers = static_cast<std::size_t>(workers);

  e.seed = config.seed.value_or(0);
  e.method = config.method.value_or(d.method);
  if (e.method == Method::volume && !e.system->translation_invariant()) {
    throw ConfigError("method: volume needs a translation-invariant system, " + e.system->name() + " is not");
  }
  e.out = config.out;

  if (config.partitions.empty()) {
    for (const auto& p : e.system->canonical_partitions()) e.partitions.push_back(p.name);
    e.partitions.emplace_back("trivial");
  } else {
    e.partitions = config.partitions;
  }
  for (std::size_t i = 0; i < e.partitions.size(); ++i) {
    find_partition(*e.system, e.partitions[i]);
    if (std::find(e.partitions.begin(), e.partitions.begin() + static_cast<std::ptrdiff_t>(i), e.partitions[i]) !=
        e.partitions.begin() + static_cast<std::ptrdiff_t>(i)) {
      throw ConfigError("partitions: '" + e.partitions[i] + "' listed twice");
    }
  }
  return e;
}

void emit_table(const Experiment& experiment, const EntropyTable& table, std::ostream& csv_fallback) {
  if (experiment.out.empty()) {
    table.write_csv(csv_fallback);
    return;
  }
  std::ofstream file(experiment.out, std::ios::binary | std::ios::trunc);
  if (!file) throw ConfigError("out: cannot write '" + experiment.out + "'");
  table.write_csv(file);
}

TopResult run_estimate_top(const Experiment& experiment) {
  return estimate_h_top(*experiment.system, experiment.n_list, experiment.eps_list, experiment.omega_samples,
                        experiment.method, experiment.options());
}

std::vector<FiberResult> run_estimate_fiber(const Experiment& experiment) {
  std::vector<FiberResult> out;
  for (const auto& name : experiment.partitions) {
    out.push_back(estimate_fiber_entropy(*experiment.system, find_partition(*experiment.system, name),
                                         experiment.n_list, experiment.omega_samples, experiment.options()));
  }
  return out;
}

VarprinReport run_varprin(const Experiment& experiment) {
  const ModelSystem& sys = *experiment.system;
  VarprinReport r;
  r.oracle = sys.oracle().value;
  TopResult top = run_estimate_top(experiment);
  r.top = top.estimate;
  r.table = top.table;
  const double top_side = std::max(r.top.value, r.top.upper_value.value_or(r.top.value));
  r.generating_partition = sys.generating_partition();

  bool first = true;
  for (auto& f : run_estimate_fiber(experiment)) {
    r.table.append(f.table);
    const PartitionSpec alpha = find_partition(sys, f.partition);
    const double n_fit = static_cast<double>(f.estimate.fit_ns.back());
    const double slack = std::log(static_cast<double>(std::max<std::size_t>(alpha.size(), 1))) / n_fit;
    PartitionGap g;
    g.partition = f.partition;
    g.fiber = f.estimate;
    g.gap = r.top.value - f.estimate.value;
    g.tolerance = r.top.ci_halfwidth + f.estimate.ci_halfwidth + slack;
    g.within = f.estimate.value <= top_side + g.tolerance;
    r.pass = r.pass && g.within;
    if (first || f.estimate.value > r.best_fiber) {
      r.best_fiber = f.estimate.value;
      r.best_partition = f.partition;
      r.gap = g.gap;
      r.tolerance = g.tolerance;
      first = false;
    }
    if (f.partition == r.generating_partition) {
      r.generating_gap = g.gap;
      r.generating_slack = g.tolerance;
      r.generating_closes = std::abs(g.gap) <= g.tolerance;
    }
    r.partitions.push_back(std::move(g));
  }
  return r;
}

void VarprinReport::write(std::ostream& out) const {
  out << "h_top      " << fmt(top.value) << " +/- " << fmt(top.ci_halfwidth);
  if (top.upper_value) out << "  (upper bracket " << fmt(*top.upper_value) << ")";
  out << "\noracle     " << fmt(oracle) << '\n';
  for (const auto& p : partitions) {
    out << (p.within ? "  ok   " : "  FAIL ") << "fiber[" << p.partition << "] " << fmt(p.fiber.value) << " +/- "
        << fmt(p.fiber.ci_halfwidth) << "  gap " << fmt(p.gap) << "  tolerance " << fmt(p.tolerance) << '\n';
  }
  out << "best       " << best_partition << " " << fmt(best_fiber) << "  gap " << fmt(gap) << "  tolerance "
      << fmt(tolerance) << '\n';
  if (generating_closes) {
    out << "generating " << generating_partition << " gap " << fmt(*generating_gap) << " slack "
        << fmt(*generating_slack) << (*generating_closes ? " closed" : " open") << '\n';
  } else {
    out << "generating none declared or not requested\n";
  }
  out << (pass ? "PASS" : "FAIL") << '\n';
}

void write_top_summary(std::ostream& out, const Experiment& experiment, const EntropyEstimate& estimate) {
  out << "system        " << experiment.system->label() << '\n';
  out << "h_top         " << fmt(estimate.value, "%.12f") << " +/- " << fmt(estimate.ci_halfwidth, "%.6g") << '\n';
  if (estimate.upper_value) out << "upper bracket " << fmt(*estimate.upper_value, "%.12f") << '\n';
  out << "eps           " << fmt(estimate.epsilon_used, "%.9g") << '\n';
  out << "extrapolation " << to_string(estimate.extrapolation) << " over n =";
  for (auto n : estimate.fit_ns) out << ' ' << n;
  out << '\n';
  out << "oracle        " << fmt(experiment.system->oracle().value, "%.12f") << "  ("
      << experiment.system->oracle().derivation << ")\n";
}

void write_fiber_summary(std::ostream& out, const FiberResult& result) {
  out << "fiber[" << result.partition << "] " << fmt(result.estimate.value, "%.12f") << " +/- "
      << fmt(result.estimate.ci_halfwidth, "%.6g") << "  (" << to_string(result.estimate.extrapolation) << ")\n";
}

}  // namespace crds
