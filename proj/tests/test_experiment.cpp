#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <sys/wait.h>
#include <unistd.h>

#include <cmath>

#include "crds/errors.hpp"
#include "crds/experiment.hpp"
#include "doctest.h"

namespace fs = std::filesystem;

namespace {

struct CliResult {
  int status = -1;
  std::string out;
};

// Runs the CLI through the shell, stderr discarded.
CliResult run_cli(const std::string& args) {
  const std::string cmd = std::string(CRDS_CLI_PATH) + " " + args + " 2>/dev/null";
  CliResult r;
  FILE* pipe = popen(cmd.c_str(), "r");
  REQUIRE(pipe != nullptr);
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) r.out.append(buf.data(), got);
  const int status = pclose(pipe);
  r.status = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

fs::path scratch(const std::string& name) {
  const fs::path dir = fs::temp_directory_path() / ("crds_tests_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return dir / name;
}

// Doubling map whose time-3 map is off by one grid point, so the cocycle law
// fails while the identity law still holds.
class BrokenCocycle final : public crds::ModelSystem {
 public:
  BrokenCocycle() : inner_(crds::make_random_expansion(crds::SymbolLaw::point_mass(2), 6)) {}
  std::string name() const override { return "broken"; }
  std::string label() const override { return "broken"; }
  bool invertible() const override { return false; }
  std::shared_ptr<const crds::SymbolLaw> law() const override { return inner_->law(); }
  double distance(const crds::Point& x, const crds::Point& y) const override { return inner_->distance(x, y); }
  crds::Point map(const crds::GroupElement& g, const crds::EnvironmentPath& w, const crds::Point& x) const override {
    crds::Point y = inner_->map(g, w, x);
    if (g[0] == 3) y.a = (y.a + 1) % 64;
    return y;
  }
  std::uint64_t fiber_size(const crds::EnvironmentPath& w) const override { return inner_->fiber_size(w); }
  crds::FiberModel fiber(const crds::EnvironmentPath& w) const override { return inner_->fiber(w); }
  bool in_fiber(const crds::EnvironmentPath& w, const crds::Point& x) const override { return inner_->in_fiber(w, x); }
  crds::Point random_point(const crds::EnvironmentPath& w, std::uint64_t key) const override {
    return inner_->random_point(w, key);
  }
  crds::FiberMeasure invariant_measure(const crds::EnvironmentPath& w) const override {
    return inner_->invariant_measure(w);
  }
  std::vector<crds::PartitionSpec> canonical_partitions() const override { return inner_->canonical_partitions(); }
  crds::PartitionSpec partition_with_diameter(double r) const override { return inner_->partition_with_diameter(r); }
  crds::OracleValue oracle() const override { return inner_->oracle(); }
  crds::SystemDefaults defaults() const override { return inner_->defaults(); }

 private:
  std::unique_ptr<crds::ModelSystem> inner_;
};

crds::ExperimentConfig config_for(std::string system) {
  crds::ExperimentConfig c;
  c.system = std::move(system);
  return c;
}

}  // namespace

TEST_SUITE("experiment") {
  TEST_CASE("config text parsing") {
    const auto c = crds::parse_config_text(
        "# doubling run\n"
        "system = doubling\n"
        "param.Q = 12   # grid\n"
        "n = 1..3, 8\n"
        "eps = 1/16, 0.03125\n"
        "omega_samples = 4\n"
        "seed = 9\n"
        "method = greedy\n"
        "partitions = half, trivial\n"
        "workers = 2\n"
        "\n");
    CHECK(c.system == "doubling");
    CHECK(c.params.at("Q") == "12");
    CHECK(c.n_list == std::vector<std::int64_t>{1, 2, 3, 8});
    CHECK(c.eps_list == std::vector<double>{0.0625, 0.03125});
    CHECK(*c.omega_samples == 4);
    CHECK(*c.seed == 9);
    CHECK(*c.method == crds::Method::greedy);
    CHECK(c.partitions == std::vector<std::string>{"half", "trivial"});
    CHECK(*c.workers == 2);

    CHECK_THROWS_WITH_AS(crds::parse_config_text("system = a\ncolour = red\n"), "config line 2: unknown key 'colour'",
                         crds::ConfigError);
    CHECK_THROWS_AS(crds::parse_config_text("system\n"), crds::ConfigError);
    CHECK_THROWS_AS(crds::parse_config_text("n = 3..1\n"), crds::ConfigError);
    CHECK_THROWS_AS(crds::parse_config_text("eps = 1/0\n"), crds::ConfigError);
    CHECK_THROWS_AS(crds::parse_config_text("omega_samples = many\n"), crds::ConfigError);
    CHECK_THROWS_AS(crds::parse_config_text("method = random\n"), crds::ConfigError);
  }

  TEST_CASE("overlay lets the top layer win") {
    auto base = crds::parse_config_text("system = doubling\nparam.Q = 12\nseed = 1\nn = 1,2\n");
    const auto top = crds::parse_config_text("param.Q = 10\nseed = 5\n");
    crds::overlay(base, top);
    CHECK(base.system == "doubling");
    CHECK(base.params.at("Q") == "10");
    CHECK(*base.seed == 5);
    CHECK(base.n_list == std::vector<std::int64_t>{1, 2});
  }

  TEST_CASE("resolve fills defaults and names violated fields") {
    const auto e = crds::resolve(config_for("full-shift"));
    CHECK(e.n_list == std::vector<std::int64_t>{16, 32, 64});
    CHECK(e.method == crds::Method::exact);
    CHECK(e.partitions == std::vector<std::string>{"symbol", "block3", "trivial"});

    auto expect_field = [](crds::ExperimentConfig c, const std::string& field) {
      try {
        crds::resolve(c);
        FAIL("accepted a bad config for " << field);
      } catch (const crds::ConfigError& err) {
        CHECK_MESSAGE(std::string(err.what()).find(field) != std::string::npos, err.what());
      }
    };
    auto c = config_for("doubling");
    c.omega_samples = 0;
    expect_field(c, "omega_samples");
    c = config_for("doubling");
    c.n_list = {4, 2};
    expect_field(c, "n_list");
    c = config_for("doubling");
    c.eps_list = {1.0 / 16, 1.0 / 8};
    expect_field(c, "eps_list");
    c = config_for("doubling");
    c.params["Q"] = "8";
    c.eps_list = {1.0 / 64};
    expect_field(c, "eps_list");
    c = config_for("full-shift");
    c.method = crds::Method::volume;
    expect_field(c, "method");
    c = config_for("doubling");
    c.partitions = {"half", "half"};
    expect_field(c, "partitions");
    c = config_for("doubling");
    c.partitions = {"thirds"};
    expect_field(c, "thirds");
    c = config_for("doubling");
    c.workers = 0;
    expect_field(c, "workers");
    expect_field(crds::ExperimentConfig{}, "system");
    c = config_for("doubling");
    c.params["modulus"] = "abc";
    expect_field(c, "modulus");
  }

  TEST_CASE("varprin on the full shift: symbol partition closes the gap") {
    auto c = config_for("full-shift");
    c.partitions = {"symbol", "trivial"};
    const auto r = crds::run_varprin(crds::resolve(c));
    CHECK(r.pass);
    REQUIRE(r.generating_gap);
    CHECK(*r.generating_gap >= -1e-9);
    CHECK(*r.generating_gap <= 1.0 / 64);
    CHECK(*r.generating_closes);
    REQUIRE(r.partitions.size() == 2);
    CHECK(r.partitions[1].fiber.value == 0.0);
    CHECK(r.partitions[1].gap == doctest::Approx(r.top.value));
    std::ostringstream out;
    r.write(out);
    CHECK(out.str().find("PASS") != std::string::npos);
  }

  TEST_CASE("varprin on discrete points") {
    const auto r = crds::run_varprin(crds::resolve(config_for("discrete")));
    CHECK(r.pass);
  }

  TEST_CASE("fiber estimates come back in request order") {
    auto c = config_for("full-shift");
    c.params["n_max"] = "8";
    c.partitions = {"trivial", "symbol"};
    const auto results = crds::run_estimate_fiber(crds::resolve(c));
    REQUIRE(results.size() == 2);
    CHECK(results[0].partition == "trivial");
    CHECK(results[1].partition == "symbol");
    for (const auto& row : results[0].table.rows()) CHECK(row.mean_rate == 0.0);
    for (const auto& row : results[1].table.rows()) CHECK(row.mean_rate == doctest::Approx(std::log(2.0)).epsilon(1e-12));
  }

  TEST_CASE("audit: pristine PASS, broken cocycle named") {
    const auto report = crds::run_audit(crds::audit_systems(), 0);
    CHECK(report.passed());
    CHECK(report.first_failure() == nullptr);

    std::vector<std::shared_ptr<const crds::ModelSystem>> systems = {std::make_shared<BrokenCocycle>()};
    const auto broken = crds::run_audit(systems, 0);
    CHECK_FALSE(broken.passed());
    REQUIRE(broken.first_failure() != nullptr);
    CHECK(broken.first_failure()->name == "cocycle_audit");
    std::ostringstream out;
    broken.write(out);
    CHECK(out.str().find("FAIL cocycle_audit") != std::string::npos);
  }

  TEST_CASE("cli: exit codes") {
    CHECK(run_cli("list-systems").status == 0);
    CHECK(run_cli("list-systems").out.find("random-expansion") != std::string::npos);
    CHECK(run_cli("estimate-top --system doubling --omega-samples 0").status == 1);
    CHECK(run_cli("estimate-top --system nowhere").status == 1);
    CHECK(run_cli("estimate-top --system doubling --eps 1/8 --eps 1/4").status == 1);
    CHECK(run_cli("estimate-top --system doubling --bogus").status == 1);
    CHECK(run_cli("estimate-top --system doubling --method exact --n 3").status == 2);
    CHECK(run_cli("estimate-top --system full-shift --param k=4 --param m=60").status == 2);
    CHECK(run_cli("varprin --system discrete").status == 0);
    CHECK(run_cli("estimate-top --config /nonexistent/file.cfg").status == 1);
  }

  TEST_CASE("cli: estimate-top CSV and headline") {
    const auto r = run_cli("estimate-top --system full-shift");
    CHECK(r.status == 0);
    CHECK(r.out.rfind("system,n,eps,omega_samples,method,mean_rate,std_error\n", 0) == 0);
    CHECK(r.out.find("full-shift;k=2;m=1;n_max=64,64,0.5,1,exact,") != std::string::npos);

    const fs::path csv = scratch("top.csv");
    const auto s = run_cli("estimate-top --system full-shift --out " + csv.string());
    CHECK(s.status == 0);
    CHECK(slurp(csv) == r.out);
    CHECK(s.out.find("h_top         0.693147180560") != std::string::npos);
  }

  TEST_CASE("cli: config file with flag overrides") {
    const fs::path cfg = scratch("run.cfg");
    {
      std::ofstream f(cfg);
      f << "system = doubling\nparam.Q = 10\nn = 1..4\neps = 1/16\nomega_samples = 2\nseed = 3\n";
    }
    const auto a = run_cli("estimate-top --config " + cfg.string());
    const auto b = run_cli("estimate-top --config " + cfg.string() + " --n 1 --n 2");
    CHECK(a.status == 0);
    CHECK(b.status == 0);
    CHECK(a.out.find("doubling;Q=10,4,0.0625,2,greedy,") != std::string::npos);
    CHECK(b.out.find("doubling;Q=10,4,") == std::string::npos);
    CHECK(b.out.find("doubling;Q=10,2,0.0625,2,greedy,") != std::string::npos);
  }

  TEST_CASE("cli: byte-identical CSV across runs and worker counts") {
    const std::string base =
        "--system random-expansion --param Q=12 --n 1..5 --eps 1/32 --omega-samples 16 --seed 21";
    const fs::path one = scratch("w1.csv");
    const fs::path three = scratch("w3.csv");
    const fs::path again = scratch("w1b.csv");
    REQUIRE(run_cli("estimate-top " + base + " --workers 1 --out " + one.string()).status == 0);
    REQUIRE(run_cli("estimate-top " + base + " --workers 3 --out " + three.string()).status == 0);
    REQUIRE(run_cli("estimate-top " + base + " --workers 1 --out " + again.string()).status == 0);
    CHECK(slurp(one) == slurp(three));
    CHECK(slurp(one) == slurp(again));
    CHECK(slurp(one).size() > 100);

    const fs::path f1 = scratch("f1.csv");
    const fs::path f2 = scratch("f2.csv");
    const std::string fiber = "--system random-expansion --param Q=12 --n 1..4 --omega-samples 8 --partition half";
    REQUIRE(run_cli("estimate-fiber " + fiber + " --workers 1 --out " + f1.string()).status == 0);
    REQUIRE(run_cli("estimate-fiber " + fiber + " --workers 2 --out " + f2.string()).status == 0);
    CHECK(slurp(f1) == slurp(f2));
    CHECK(slurp(f1).find("fiber:half") != std::string::npos);
  }

  TEST_CASE("cli: audit is deterministic") {
    const auto a = run_cli("audit --seed 4");
    const auto b = run_cli("audit --seed 4");
    CHECK(a.status == 0);
    CHECK(a.out == b.out);
    CHECK(a.out.find("PASS") != std::string::npos);
  }
}
