#include "crds/audit.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "crds/estimators.hpp"
#include "crds/partition.hpp"
#include "crds/separated.hpp"

namespace crds {

bool AuditReport::passed() const { return first_failure() == nullptr; }

const CheckResult* AuditReport::first_failure() const {
  for (const auto& c : checks) {
    if (!c.passed) return &c;
  }
  return nullptr;
}

void AuditReport::write(std::ostream& out) const {
  for (const auto& c : checks) {
    out << (c.passed ? "ok   " : "FAIL ") << c.name << " [" << c.subject << "]";
    if (!c.detail.empty()) out << " " << c.detail;
    out << '\n';
  }
  if (const auto* f = first_failure()) {
    out << "FAIL " << f->name << '\n';
  } else {
    out << "PASS " << checks.size() << " checks\n";
  }
}

std::vector<std::shared_ptr<const ModelSystem>> audit_systems() {
  std::vector<std::shared_ptr<const ModelSystem>> out;
  out.push_back(make_full_shift(2, 1, 10));
  out.push_back(make_full_shift(3, 2, 4));
  out.push_back(make_random_expansion(SymbolLaw::point_mass(2), 12));
  out.push_back(make_random_expansion(SymbolLaw::uniform({2, 3}), 12));
  out.push_back(make_toral_automorphism({2, 1, 1, 1}, 8));
  out.push_back(make_discrete_points(8));
  return out;
}

namespace {

constexpr std::uint64_t kSmallFiber = 4096;

class Auditor {
 public:
  explicit Auditor(std::uint64_t seed) : rng_(seed), seed_(seed) {}

  AuditReport report;

  void check(std::string name, std::string subject, bool ok, std::string detail = {}) {
    report.checks.push_back({std::move(name), std::move(subject), ok, ok ? std::string() : std::move(detail)});
  }

  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    return std::uniform_int_distribution<std::int64_t>(lo, hi)(rng_);
  }
  double uniform_real() { return std::uniform_real_distribution<double>(0.0, 1.0)(rng_); }
  std::uint64_t bits() { return rng_(); }
  std::uint64_t seed() const { return seed_; }

  GroupElement random_element(const RandomDynamicalSystem& sys, std::int64_t reach) {
    const std::int64_t lo = sys.invertible() ? -reach : 0;
    const std::int64_t hi = sys.invertible() ? reach : 2 * reach;
    if (sys.group_dimension() == 2) return {uniform_int(lo, hi), uniform_int(lo, hi)};
    return GroupElement(uniform_int(lo, hi));
  }

  EnvironmentPath environment(const RandomDynamicalSystem& sys, std::size_t index) const {
    return sample_environment(sys.law(), sys.group_dimension(), seed_, index);
  }

 private:
  std::mt19937_64 rng_;
  std::uint64_t seed_;
};

void group_checks(Auditor& a) {
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 1000 && ok; ++i) {
    const int dim = 1 + i % 2;
    auto draw = [&] {
      return dim == 1 ? GroupElement(a.uniform_int(-1000, 1000))
                      : GroupElement(a.uniform_int(-1000, 1000), a.uniform_int(-1000, 1000));
    };
    const GroupElement g = draw();
    const GroupElement h = draw();
    const GroupElement k = draw();
    const GroupElement e = GroupElement::identity(dim);
    ok = compose(compose(g, h), k) == compose(g, compose(h, k)) && compose(g, e) == g &&
         compose(g, g.inverse()) == e && compose(g, h) == compose(h, g);
    if (!ok) detail = "g=" + g.to_string() + " h=" + h.to_string() + " k=" + k.to_string();
  }
  a.check("group_axioms", "-", ok, detail);

  ok = true;
  for (int dim = 1; dim <= 2 && ok; ++dim) {
    const GroupElement g = dim == 1 ? GroupElement(1) : GroupElement(1, 0);
    double previous = 2.0;
    for (std::int64_t n = 1; n <= 64 && ok; ++n) {
      const Fraction f = folner_defect(FolnerWindow::box(dim, n), g);
      // f <= 2d/n, compared exactly on integers.
      const bool bounded = f.num * n <= 2 * dim * f.den;
      ok = bounded && f.value() <= previous;
      previous = f.value();
      if (!ok) detail = "d=" + std::to_string(dim) + " n=" + std::to_string(n);
    }
  }
  a.check("folner_convergence", "-", ok, detail);

  ok = true;
  const auto law = std::make_shared<SymbolLaw>(SymbolLaw::uniform({0, 1, 2}));
  for (int i = 0; i < 100 && ok; ++i) {
    const EnvironmentPath omega = sample_environment(law, 1, a.seed(), static_cast<std::uint64_t>(i));
    const GroupElement h(a.uniform_int(-100, 100));
    const GroupElement g(a.uniform_int(-100, 100));
    ok = shift_environment(h, omega).symbol_at(g) == omega.symbol_at(compose(h, g));
    if (!ok) detail = "h=" + h.to_string() + " g=" + g.to_string();
  }
  a.check("shift_equivariance", "-", ok, detail);
}

std::vector<Point> probe_points(Auditor& a, const ModelSystem& sys, const EnvironmentPath& omega, std::size_t count) {
  if (sys.fiber_size(omega) <= kSmallFiber) return sys.fiber(omega).points;
  std::vector<Point> pts;
  for (std::size_t i = 0; i < count; ++i) pts.push_back(sys.random_point(omega, a.bits()));
  return pts;
}

void system_checks(Auditor& a, const ModelSystem& sys) {
  const std::string who = sys.label();
  std::string detail;

  bool ok = true;
  for (std::size_t s = 0; s < 5 && ok; ++s) {
    const EnvironmentPath omega = a.environment(sys, s);
    const GroupElement e = GroupElement::identity(sys.group_dimension());
    for (const Point& x : probe_points(a, sys, omega, 1000)) {
      if (apply_cocycle(sys, e, omega, x) != x) {
        ok = false;
        detail = "identity moved a point of sample " + std::to_string(s);
        break;
      }
    }
  }
  a.check("identity_axiom", who, ok, detail);

  ok = true;
  for (int i = 0; i < 1000 && ok; ++i) {
    const EnvironmentPath omega = a.environment(sys, static_cast<std::size_t>(i % 20));
    const GroupElement g1 = a.random_element(sys, 3);
    const GroupElement g2 = a.random_element(sys, 3);
    const Point x = sys.random_point(omega, a.bits());
    if (!cocycle_audit(sys, omega, g1, g2, x)) {
      ok = false;
      detail = "g1=" + g1.to_string() + " g2=" + g2.to_string();
    }
  }
  a.check("cocycle_audit", who, ok, detail);

  ok = true;
  {
    const EnvironmentPath omega = a.environment(sys, 0);
    for (int i = 0; i < 500 && ok; ++i) {
      const Point x = sys.random_point(omega, a.bits());
      const Point y = sys.random_point(omega, a.bits());
      const Point z = sys.random_point(omega, a.bits());
      const double dxy = sys.distance(x, y);
      ok = sys.distance(x, x) == 0.0 && dxy == sys.distance(y, x) && (x == y || dxy > 0.0) &&
           sys.distance(x, z) <= dxy + sys.distance(y, z) + 1e-12;
      if (!ok) detail = "probe " + std::to_string(i);
    }
  }
  a.check("metric_axioms", who, ok, detail);

  ok = true;
  for (int i = 0; i < 200 && ok; ++i) {
    const EnvironmentPath omega = a.environment(sys, static_cast<std::size_t>(i % 5));
    const auto n = a.uniform_int(1, 6);
    const FolnerWindow small = FolnerWindow::box(sys.group_dimension(), n);
    const FolnerWindow large = FolnerWindow::box(sys.group_dimension(), n + 1);
    const Point x = sys.random_point(omega, a.bits());
    const Point y = sys.random_point(omega, a.bits());
    const double ds = bowen_distance(sys, omega, small, x, y);
    ok = ds <= bowen_distance(sys, omega, large, x, y) && ds == bowen_distance(sys, omega, small, y, x) &&
         ds >= sys.distance(x, y);
    if (!ok) detail = "n=" + std::to_string(n);
  }
  a.check("bowen_monotonicity", who, ok, detail);

  const EnvironmentPath omega0 = a.environment(sys, 0);
  if (sys.fiber_size(omega0) <= (std::uint64_t{1} << 20)) {
    ok = true;
    double worst = 0.0;
    for (std::size_t s = 0; s < 3; ++s) {
      const EnvironmentPath omega = a.environment(sys, s);
      std::vector<GroupElement> gs = {GroupElement(1), GroupElement(2)};
      if (sys.invertible()) gs.push_back(GroupElement(-1));
      for (const auto& g : gs) worst = std::max(worst, sys.invariance_defect(omega, g));
    }
    ok = worst <= 1e-9;
    a.check("invariance", who, ok, "total variation " + std::to_string(worst));
  }

  if (sys.fiber_size(omega0) <= kSmallFiber) {
    const FiberModel fiber = sys.fiber(omega0);
    ok = true;
    for (const auto& p : sys.canonical_partitions()) {
      if (!covers_exactly_once(p, fiber)) {
        ok = false;
        detail = p.name + " misses a point";
      } else if (p.declared_diameter && measured_diameter(sys, p, fiber) > *p.declared_diameter + 1e-12) {
        ok = false;
        detail = p.name + " exceeds its declared diameter";
      }
    }
    a.check("partition_diameter", who, ok, detail);

    ok = true;
    for (int i = 0; i < 10 && ok; ++i) {
      const EnvironmentPath omega = a.environment(sys, static_cast<std::size_t>(i));
      const auto n = a.uniform_int(1, 4);
      const FolnerWindow window = FolnerWindow::box(sys.group_dimension(), n);
      const double eps = std::ldexp(1.0, -static_cast<int>(a.uniform_int(1, 3)));
      const PartitionSpec c = sys.partition_with_diameter(eps);
      const FiberModel f = sys.fiber(omega);
      const SeparatedSetResult l = max_separated_greedy(sys, f, omega, window, eps);
      const auto witness = witness_points(f, l);
      ok = atom_injectivity_check(sys, omega, window, eps, c, witness);
      if (!ok) {
        detail = "n=" + std::to_string(n) + " eps=" + std::to_string(eps);
        break;
      }
      // Entropy of any measure on the joined partition is at most the log of
      // its nonempty atoms; with one witness point per atom it equals log |L|.
      const JoinedEntropy j = joined_partition_entropy(sys, omega, window, c, sys.invariant_measure(omega));
      const JoinedEntropy jw = joined_partition_entropy(sys, omega, window, c, FiberMeasure::uniform(witness));
      ok = j.entropy <= std::log(static_cast<double>(j.nonempty_cells)) + 1e-12 &&
           std::abs(jw.entropy - std::log(static_cast<double>(witness.size()))) <= 1e-12;
      if (!ok) detail = "joined entropy bound, n=" + std::to_string(n);
    }
    a.check("atom_injectivity", who, ok, detail);
  }
}

void separated_checks(Auditor& a) {
  // Random sub-fibers of the doubling map on Z/64 with up to 12 points.
  const auto sys = make_circle_expansion(SymbolLaw::point_mass(2), 64);
  const EnvironmentPath omega = a.environment(*sys, 0);
  bool bracket_ok = true;
  bool monotone_ok = true;
  std::string bracket_detail;
  std::string monotone_detail;
  for (int i = 0; i < 200; ++i) {
    FiberModel f;
    const auto size = a.uniform_int(1, 12);
    std::vector<std::uint64_t> ids;
    while (static_cast<std::int64_t>(ids.size()) < size) {
      const auto v = static_cast<std::uint64_t>(a.uniform_int(0, 63));
      if (std::find(ids.begin(), ids.end(), v) == ids.end()) ids.push_back(v);
    }
    std::sort(ids.begin(), ids.end());
    for (auto v : ids) f.points.push_back(Point{v, 0});
    const auto n = a.uniform_int(1, 3);
    const FolnerWindow w = FolnerWindow::box(1, n);
    const FolnerWindow w1 = FolnerWindow::box(1, n + 1);
    const double eps = static_cast<double>(a.uniform_int(1, 12)) / 64.0;
    const std::size_t sep = max_separated_exact(*sys, f, omega, w, eps).cardinality;
    const std::size_t sep2 = max_separated_exact(*sys, f, omega, w, 2 * eps).cardinality;
    const std::size_t sep_wide = max_separated_exact(*sys, f, omega, w1, eps).cardinality;
    const std::size_t greedy = max_separated_greedy(*sys, f, omega, w, eps).cardinality;
    if (greedy < sep2 || greedy > sep) {
      bracket_ok = false;
      bracket_detail = "instance " + std::to_string(i);
    }
    if (sep2 > sep || sep_wide < sep) {
      monotone_ok = false;
      monotone_detail = "instance " + std::to_string(i);
    }
  }
  a.check("greedy_bracketing", "-", bracket_ok, bracket_detail);
  a.check("sep_monotonicity", "-", monotone_ok, monotone_detail);
}

void inequality_checks(Auditor& a) {
  bool ok = true;
  std::string detail;
  for (int i = 0; i < 1000 && ok; ++i) {
    const auto k = static_cast<std::size_t>(a.uniform_int(1, 8));
    std::vector<double> p(k);
    std::vector<double> v(k);
    double total = 0.0;
    for (auto& x : p) total += (x = a.uniform_real());
    for (auto& x : p) x /= total;
    for (auto& x : v) x = 10.0 * a.uniform_real() - 5.0;
    const BoundSides s = entropy_bound_check(p, v);
    ok = s.lhs <= s.rhs + 1e-12;
    // Gibbs case: p proportional to e^a attains equality.
    double z = 0.0;
    for (double x : v) z += std::exp(x);
    for (std::size_t m = 0; m < k; ++m) p[m] = std::exp(v[m]) / z;
    const BoundSides g = entropy_bound_check(p, v);
    ok = ok && std::abs(g.lhs - g.rhs) <= 1e-12;
    if (!ok) detail = "draw " + std::to_string(i);
  }
  a.check("standard_inequality", "-", ok, detail);

  ok = true;
  for (int i = 0; i < 200 && ok; ++i) {
    const auto points = static_cast<std::size_t>(a.uniform_int(1, 40));
    const auto l = static_cast<std::size_t>(a.uniform_int(1, 6));
    std::vector<std::size_t> alpha_cell(points);
    std::vector<std::size_t> c_cell(points);
    std::vector<std::pair<Point, double>> weights;
    double c0 = 0.0;
    double total = 0.0;
    for (std::size_t x = 0; x < points; ++x) {
      alpha_cell[x] = static_cast<std::size_t>(a.uniform_int(0, static_cast<std::int64_t>(l) - 1));
      // C_m ⊆ A_m for m >= 1; everything else lands in C_0.
      c_cell[x] = a.uniform_real() < 0.5 ? 0 : alpha_cell[x] + 1;
      const double w = a.uniform_real();
      weights.emplace_back(Point{x, 0}, w);
      total += w;
    }
    for (auto& [pt, w] : weights) {
      w /= total;
      if (c_cell[pt.a] == 0) c0 += w;
    }
    const FiberMeasure mu = FiberMeasure::from_pairs(weights);
    PartitionSpec alpha;
    alpha.name = "alpha";
    alpha.labels.assign(l, "A");
    alpha.classify = [&alpha_cell](const Point& x) { return alpha_cell[x.a]; };
    PartitionSpec c;
    c.name = "C";
    c.labels.assign(l + 1, "C");
    c.classify = [&c_cell](const Point& x) { return c_cell[x.a]; };
    const double h = conditional_partition_entropy(mu, alpha, c);
    ok = h <= c0 * std::log(static_cast<double>(l)) + 1e-12;
    if (!ok) detail = "draw " + std::to_string(i);
  }
  a.check("conditional_bound", "-", ok, detail);
}

}  // namespace

AuditReport run_audit(const std::vector<std::shared_ptr<const ModelSystem>>& systems, std::uint64_t seed) {
  Auditor a(seed);
  group_checks(a);
  for (const auto& sys : systems) system_checks(a, *sys);
  separated_checks(a);
  inequality_checks(a);
  return std::move(a.report);
}

}  // namespace crds
