// crds: command-line runner for the entropy estimators.
//
// Exit codes: 0 success, 1 config error, 2 resource cap, 3 property failure.

#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "crds/audit.hpp"
#include "crds/errors.hpp"
#include "crds/experiment.hpp"

namespace {

struct Flags {
  std::string config_path;
  std::string system;
  std::vector<std::string> params;
  std::vector<std::string> n;
  std::vector<std::string> eps;
  std::string omega_samples;
  std::string seed;
  std::string method;
  std::vector<std::string> partitions;
  std::string out;
  std::string workers;
};

void add_common(CLI::App* cmd, Flags& f, bool with_partitions) {
  cmd->add_option("--config", f.config_path, "key = value config file; flags override it");
  cmd->add_option("--system", f.system, "model system name (see list-systems)");
  cmd->add_option("--param", f.params, "system parameter key=value (repeatable)");
  cmd->add_option("--n", f.n, "window index, or a range a..b (repeatable)");
  cmd->add_option("--eps", f.eps, "separation scale, decimal or fraction like 1/64 (repeatable)");
  cmd->add_option("--omega-samples", f.omega_samples, "number of sampled environments");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--method", f.method, "exact, greedy or volume");
  cmd->add_option("--out", f.out, "CSV output path (default: standard output)");
  cmd->add_option("--workers", f.workers, "worker threads for environment samples");
  if (with_partitions) cmd->add_option("--partition", f.partitions, "partition name (repeatable)");
}

crds::ExperimentConfig flags_to_config(const Flags& f) {
  crds::ExperimentConfig c;
  c.system = f.system;
  for (const auto& p : f.params) {
    const auto eq = p.find('=');
    if (eq == std::string::npos || eq == 0) throw crds::ConfigError("param: expected key=value, got '" + p + "'");
    c.params[p.substr(0, eq)] = p.substr(eq + 1);
  }
  std::string joined;
  for (const auto& n : f.n) joined += n + ",";
  if (!joined.empty()) c.n_list = crds::parse_config_text("n = " + joined).n_list;
  for (const auto& e : f.eps) c.eps_list.push_back(crds::parse_real("eps", e));
  if (!f.omega_samples.empty()) c.omega_samples = crds::parse_integer("omega_samples", f.omega_samples);
  if (!f.seed.empty()) c.seed = static_cast<std::uint64_t>(crds::parse_integer("seed", f.seed));
  if (!f.method.empty()) c.method = crds::parse_method(f.method);
  c.partitions = f.partitions;
  c.out = f.out;
  if (!f.workers.empty()) c.workers = crds::parse_integer("workers", f.workers);
  return c;
}

crds::Experiment load(const Flags& f) {
  crds::ExperimentConfig config;
  if (!f.config_path.empty()) config = crds::load_config_file(f.config_path);
  crds::overlay(config, flags_to_config(f));
  return crds::resolve(config);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Separated-set and fiber entropy of random dynamical systems"};
  app.require_subcommand(1);

  Flags flags;
  auto* list_cmd = app.add_subcommand("list-systems", "list model systems and their parameters");
  auto* top_cmd = app.add_subcommand("estimate-top", "estimate topological entropy from separated sets");
  add_common(top_cmd, flags, false);
  auto* fiber_cmd = app.add_subcommand("estimate-fiber", "estimate fiber entropy of partitions");
  add_common(fiber_cmd, flags, true);
  auto* varprin_cmd = app.add_subcommand("varprin", "compare topological and fiber entropy");
  add_common(varprin_cmd, flags, true);
  auto* audit_cmd = app.add_subcommand("audit", "run the invariant suites on all model systems");
  audit_cmd->add_option("--seed", flags.seed, "master seed");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (list_cmd->parsed()) {
      for (const auto& s : crds::list_systems()) {
        std::cout << s.name << "\n    " << s.summary << "\n    defaults: " << s.default_params << '\n';
      }
      return 0;
    }
    if (audit_cmd->parsed()) {
      const std::uint64_t seed =
          flags.seed.empty() ? 0 : static_cast<std::uint64_t>(crds::parse_integer("seed", flags.seed));
      const crds::AuditReport report = crds::run_audit(crds::audit_systems(), seed);
      report.write(std::cout);
      return report.passed() ? 0 : 3;
    }

    const crds::Experiment experiment = load(flags);
    if (top_cmd->parsed()) {
      const crds::TopResult r = crds::run_estimate_top(experiment);
      // With no --out the CSV owns standard output and the summary goes to stderr.
      crds::emit_table(experiment, r.table, std::cout);
      crds::write_top_summary(experiment.out.empty() ? std::cerr : std::cout, experiment, r.estimate);
      return 0;
    }
    if (fiber_cmd->parsed()) {
      const auto results = crds::run_estimate_fiber(experiment);
      crds::EntropyTable table(experiment.system->label());
      for (const auto& r : results) {
        table.append(r.table);
        crds::write_fiber_summary(std::cerr, r);
      }
      crds::emit_table(experiment, table, std::cout);
      return 0;
    }
    if (varprin_cmd->parsed()) {
      const crds::VarprinReport r = crds::run_varprin(experiment);
      if (!experiment.out.empty()) crds::emit_table(experiment, r.table, std::cout);
      r.write(std::cout);
      return r.pass ? 0 : 3;
    }
  } catch (const crds::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 1;
  } catch (const crds::DomainError& e) {
    std::cerr << "domain error: " << e.what() << '\n';
    return 1;
  } catch (const crds::ResourceCapError& e) {
    std::cerr << "resource cap: " << e.what() << '\n';
    return 2;
  }
  return 1;
}
