#include "crds/models.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "crds/errors.hpp"

namespace crds {

std::optional<double> ModelSystem::structured_log_sep(const EnvironmentPath&, const FolnerWindow&,
                                                      double) const {
  return std::nullopt;
}

std::optional<double> ModelSystem::structured_partition_entropy(const EnvironmentPath&,
                                                                const FolnerWindow&,
                                                                const PartitionSpec&) const {
  return std::nullopt;
}

double ModelSystem::invariance_defect(const EnvironmentPath& omega, const GroupElement& g) const {
  const FiberMeasure mu = invariant_measure(omega);
  std::vector<std::pair<Point, double>> images;
  images.reserve(mu.support.size());
  for (std::size_t i = 0; i < mu.support.size(); ++i) {
    images.emplace_back(apply_cocycle(*this, g, omega, mu.support[i]), mu.weights[i]);
  }
  return total_variation(FiberMeasure::from_pairs(std::move(images)),
                         invariant_measure(shift_environment(g, omega)));
}

PartitionSpec find_partition(const ModelSystem& system, std::string_view name) {
  if (name == "trivial") return trivial_partition();
  for (auto& p : system.canonical_partitions()) {
    if (p.name == name) return p;
  }
  std::string known = "trivial";
  for (const auto& p : system.canonical_partitions()) known += ", " + p.name;
  throw ConfigError("partitions: unknown partition '" + std::string(name) + "' for " +
                    system.name() + " (known: " + known + ")");
}

double oracle_entropy(const ModelSystem& system) { return system.oracle().value; }

namespace {

__extension__ using u128 = unsigned __int128;

std::uint64_t circle_units(std::uint64_t x, std::uint64_t y, std::uint64_t n) {
  const std::uint64_t diff = x > y ? x - y : y - x;
  return std::min(diff, n - diff);
}

std::uint64_t reduce(std::int64_t v, std::uint64_t n) {
  const auto sn = static_cast<std::int64_t>(n);
  return static_cast<std::uint64_t>(((v % sn) + sn) % sn);
}

std::vector<std::int64_t> default_n_range(std::int64_t lo, std::int64_t hi) {
  std::vector<std::int64_t> out;
  for (std::int64_t n = lo; n <= hi; ++n) out.push_back(n);
  return out;
}

// Arc partition of Z/N into `cells` near-equal arcs.
PartitionSpec arc_partition(std::string name, std::uint64_t modulus, std::uint64_t cells) {
  cells = std::clamp<std::uint64_t>(cells, 1, modulus);
  PartitionSpec p;
  p.name = std::move(name);
  for (std::uint64_t c = 0; c < cells; ++c) p.labels.push_back("arc" + std::to_string(c));
  p.classify = [modulus, cells](const Point& x) {
    return static_cast<std::size_t>(static_cast<u128>(x.a) * cells / modulus);
  };
  const std::uint64_t widest = (modulus + cells - 1) / cells;
  p.declared_diameter = static_cast<double>(widest - 1) / static_cast<double>(modulus);
  return p;
}

std::uint64_t units_for_radius(double r, std::uint64_t modulus) {
  if (!(r >= 0.0)) throw ConfigError("partition diameter must be >= 0");
  const double scaled = std::floor(r * static_cast<double>(modulus));
  if (scaled >= static_cast<double>(modulus)) return modulus;
  return static_cast<std::uint64_t>(scaled) + 1;
}

// Cells of width `width` along a circle of `modulus` units; the last cell
// absorbs the remainder, so points within the radius share or neighbor a cell.
struct CircleCells {
  std::uint64_t modulus = 1;
  std::uint64_t width = 1;
  std::size_t count = 1;

  CircleCells(std::uint64_t n, double radius) : modulus(n) {
    width = std::min<std::uint64_t>(units_for_radius(radius, n), n);
    count = static_cast<std::size_t>(std::max<std::uint64_t>(1, n / width));
  }
  std::size_t cell(std::uint64_t x) const {
    return std::min<std::size_t>(static_cast<std::size_t>(x / width), count - 1);
  }
  void neighbors(std::size_t c, std::vector<std::size_t>& out) const {
    out.clear();
    if (count <= 3) {
      for (std::size_t i = 0; i < count; ++i) out.push_back(i);
      return;
    }
    out.push_back((c + count - 1) % count);
    out.push_back(c);
    out.push_back((c + 1) % count);
  }
};

class CircleIndex final : public ProximityIndex {
 public:
  CircleIndex(std::uint64_t n, double radius) : cells_(n, radius) {}
  std::size_t cell_count() const override { return cells_.count; }
  std::size_t cell_of(const Point& x) const override { return cells_.cell(x.a); }
  void neighbor_cells(std::size_t cell, std::vector<std::size_t>& out) const override {
    cells_.neighbors(cell, out);
  }

 private:
  CircleCells cells_;
};

class TorusIndex final : public ProximityIndex {
 public:
  TorusIndex(std::uint64_t n, double radius) : cells_(n, radius) {}
  std::size_t cell_count() const override { return cells_.count * cells_.count; }
  std::size_t cell_of(const Point& x) const override {
    return cells_.cell(x.a) * cells_.count + cells_.cell(x.b);
  }
  void neighbor_cells(std::size_t cell, std::vector<std::size_t>& out) const override {
    cells_.neighbors(cell / cells_.count, rows_);
    cells_.neighbors(cell % cells_.count, cols_);
    out.clear();
    for (std::size_t r : rows_)
      for (std::size_t c : cols_) out.push_back(r * cells_.count + c);
  }

 private:
  CircleCells cells_;
  mutable std::vector<std::size_t> rows_;
  mutable std::vector<std::size_t> cols_;
};

std::string join_ints(const std::vector<int>& xs, char sep) {
  std::string s;
  for (std::size_t i = 0; i < xs.size(); ++i) {
    if (i != 0) s += sep;
    s += std::to_string(xs[i]);
  }
  return s;
}

std::string format_double(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

// ---------------------------------------------------------------------------
// Full shift

class FullShift final : public ModelSystem {
 public:
  FullShift(int k, int m, int n_max)
      : k_(static_cast<std::uint64_t>(k)), m_(m), n_max_(n_max), period_(n_max + 2 * m - 2),
        law_(std::make_shared<SymbolLaw>(SymbolLaw::point_mass(0))) {
    if (k < 2) throw ConfigError("k: full shift needs at least 2 symbols, got " + std::to_string(k));
    if (m < 1) throw ConfigError("m: resolution exponent must be >= 1, got " + std::to_string(m));
    if (n_max < 1) throw ConfigError("n_max: must be >= 1, got " + std::to_string(n_max));
    u128 pw = 1;
    fits64_ = true;
    for (int r = 0; r < period_; ++r) {
      powers_.push_back(pw);
      if (pw > std::numeric_limits<u128>::max() / k_) {
        throw ResourceCapError("full shift: k^" + std::to_string(period_) +
                               " words exceed the 128-bit word encoding");
      }
      pw *= k_;
    }
    words_ = pw;
    fits64_ = words_ <= std::numeric_limits<std::uint64_t>::max();
  }

  std::string name() const override { return "full-shift"; }
  std::string label() const override {
    return "full-shift;k=" + std::to_string(k_) + ";m=" + std::to_string(m_) +
           ";n_max=" + std::to_string(n_max_);
  }
  bool invertible() const override { return true; }
  std::shared_ptr<const SymbolLaw> law() const override { return law_; }
  int period() const { return period_; }

  double distance(const Point& x, const Point& y) const override {
    if (x == y) return 0.0;
    const u128 vx = pack(x);
    const u128 vy = pack(y);
    for (int j = 0; j <= period_ / 2; ++j) {
      if (digit(vx, j) != digit(vy, j) || digit(vx, (period_ - j) % period_) != digit(vy, (period_ - j) % period_)) {
        return std::ldexp(1.0, -j);
      }
    }
    return 0.0;
  }

  Point map(const GroupElement& g, const EnvironmentPath&, const Point& x) const override {
    const auto t = static_cast<int>(reduce(g[0], static_cast<std::uint64_t>(period_)));
    if (t == 0) return x;
    const u128 v = pack(x);
    const u128 low = v % powers_[static_cast<std::size_t>(t)];
    const u128 high = v / powers_[static_cast<std::size_t>(t)];
    return unpack(high + low * powers_[static_cast<std::size_t>(period_ - t)]);
  }

  std::uint64_t fiber_size(const EnvironmentPath&) const override {
    return fits64_ ? static_cast<std::uint64_t>(words_) : std::numeric_limits<std::uint64_t>::max();
  }

  FiberModel fiber(const EnvironmentPath&) const override {
    if (!fits64_ || static_cast<std::uint64_t>(words_) > kFiberCap) {
      throw ResourceCapError("full shift fiber has k^" + std::to_string(period_) +
                             " words, above the enumeration cap of " + std::to_string(kFiberCap));
    }
    FiberModel f;
    f.label = label();
    const auto count = static_cast<std::uint64_t>(words_);
    f.points.reserve(count);
    for (std::uint64_t v = 0; v < count; ++v) f.points.push_back(Point{v, 0});
    return f;
  }

  bool in_fiber(const EnvironmentPath&, const Point& x) const override { return pack(x) < words_; }

  Point random_point(const EnvironmentPath&, std::uint64_t key) const override {
    u128 v = 0;
    std::uint64_t state = key;
    for (int r = period_ - 1; r >= 0; --r) {
      state = mix64(state);
      v = v * k_ + state % k_;
    }
    return unpack(v);
  }

  FiberMeasure invariant_measure(const EnvironmentPath& omega) const override {
    return FiberMeasure::uniform(fiber(omega).points);
  }

  std::vector<PartitionSpec> canonical_partitions() const override {
    return {cylinder_partition("symbol", {0}), cylinder_partition("block3", {-1, 0, 1})};
  }
  std::string generating_partition() const override { return "symbol"; }

  PartitionSpec partition_with_diameter(double r) const override {
    // Cylinders on [-j, j] have diameter <= 2^{-(j+1)}.
    int j = 0;
    while (std::ldexp(1.0, -(j + 1)) > r && 2 * j + 1 < period_) ++j;
    std::vector<std::int64_t> coords;
    for (int i = -j; i <= j; ++i) coords.push_back(i);
    auto p = cylinder_partition("cylinder" + std::to_string(2 * j + 1), coords);
    if (2 * j + 1 >= period_) p.declared_diameter = 0.0;
    return p;
  }

  OracleValue oracle() const override {
    return {std::log(static_cast<double>(k_)), "full shift on k symbols: h = log k"};
  }

  SystemDefaults defaults() const override {
    SystemDefaults d;
    d.n_list = {std::max(1, n_max_ / 4), std::max(1, n_max_ / 2), n_max_};
    d.n_list.erase(std::unique(d.n_list.begin(), d.n_list.end()), d.n_list.end());
    d.eps_list = {std::ldexp(1.0, -m_)};
    d.method = Method::exact;
    d.omega_samples = 1;
    return d;
  }

  std::optional<double> structured_log_sep(const EnvironmentPath&, const FolnerWindow& window,
                                           double eps) const override {
    if (window.dimension() != 1) return std::nullopt;
    int reach = 0;  // d > eps iff words differ at some |i| < reach
    while (reach <= period_ && std::ldexp(1.0, -reach) > eps) ++reach;
    if (reach == 0) return 0.0;
    std::vector<char> marked(static_cast<std::size_t>(period_), 0);
    for (const auto& s : window.elements()) {
      for (int i = -(reach - 1); i <= reach - 1; ++i) {
        marked[reduce(s[0] + i, static_cast<std::uint64_t>(period_))] = 1;
      }
    }
    const auto count = std::count(marked.begin(), marked.end(), 1);
    return static_cast<double>(count) * std::log(static_cast<double>(k_));
  }

  std::optional<double> structured_partition_entropy(const EnvironmentPath&,
                                                     const FolnerWindow& window,
                                                     const PartitionSpec& alpha) const override {
    if (window.dimension() != 1) return std::nullopt;
    if (alpha.size() == 1) return 0.0;
    if (alpha.coordinates.empty()) return std::nullopt;
    double expected_cells = 1.0;
    for (std::size_t i = 0; i < alpha.coordinates.size(); ++i) expected_cells *= static_cast<double>(k_);
    if (static_cast<double>(alpha.size()) != expected_cells) return std::nullopt;
    // Uniform Bernoulli measure: the joined cylinder cells are equally likely.
    std::vector<char> marked(static_cast<std::size_t>(period_), 0);
    for (const auto& s : window.elements()) {
      for (std::int64_t c : alpha.coordinates) marked[reduce(s[0] + c, static_cast<std::uint64_t>(period_))] = 1;
    }
    const auto count = std::count(marked.begin(), marked.end(), 1);
    return static_cast<double>(count) * std::log(static_cast<double>(k_));
  }

 private:
  static u128 pack(const Point& p) { return (static_cast<u128>(p.b) << 64) | p.a; }
  static Point unpack(u128 v) {
    return Point{static_cast<std::uint64_t>(v), static_cast<std::uint64_t>(v >> 64)};
  }
  std::uint64_t digit(u128 v, int r) const {
    if (fits64_) {
      return (static_cast<std::uint64_t>(v) / static_cast<std::uint64_t>(powers_[static_cast<std::size_t>(r)])) % k_;
    }
    return static_cast<std::uint64_t>((v / powers_[static_cast<std::size_t>(r)]) % k_);
  }

  PartitionSpec cylinder_partition(std::string name, std::vector<std::int64_t> coords) const {
    PartitionSpec p;
    p.name = std::move(name);
    std::uint64_t cells = 1;
    for (std::size_t i = 0; i < coords.size(); ++i) cells *= k_;
    for (std::uint64_t c = 0; c < cells; ++c) {
      std::string lbl;
      std::uint64_t rest = c;
      for (std::size_t i = 0; i < coords.size(); ++i) {
        lbl += std::to_string(rest % k_);
        rest /= k_;
      }
      p.labels.push_back(lbl);
    }
    std::vector<int> residues;
    for (std::int64_t c : coords) residues.push_back(static_cast<int>(reduce(c, static_cast<std::uint64_t>(period_))));
    p.classify = [this, residues](const Point& x) {
      const u128 v = pack(x);
      std::uint64_t cell = 0;
      for (std::size_t i = residues.size(); i-- > 0;) cell = cell * k_ + digit(v, residues[i]);
      return static_cast<std::size_t>(cell);
    };
    std::int64_t reach = 0;
    for (std::int64_t c : coords) reach = std::max(reach, std::abs(c));
    p.declared_diameter = std::ldexp(1.0, -static_cast<int>(reach + 1));
    p.coordinates = std::move(coords);
    return p;
  }

  std::uint64_t k_;
  int m_;
  int n_max_;
  int period_;
  std::shared_ptr<const SymbolLaw> law_;
  std::vector<u128> powers_;
  u128 words_ = 1;
  bool fits64_ = true;
};

// ---------------------------------------------------------------------------
// Random circle expansion

class CircleExpansion final : public ModelSystem {
 public:
  CircleExpansion(const SymbolLaw& multipliers, std::uint64_t modulus, std::string label)
      : n_(modulus), law_(std::make_shared<SymbolLaw>(multipliers)), label_(std::move(label)) {
    if (modulus < 2 || modulus > (std::uint64_t{1} << 31)) {
      throw ConfigError("modulus: circle grid size must be in [2, 2^31], got " + std::to_string(modulus));
    }
    for (int m : law_->symbols()) {
      if (m < 1 || m > (1 << 20)) throw ConfigError("multipliers: each multiplier must be in [1, 2^20]");
    }
  }

  std::string name() const override { return "circle-expansion"; }
  std::string label() const override { return label_; }
  bool invertible() const override { return false; }
  std::shared_ptr<const SymbolLaw> law() const override { return law_; }
  std::uint64_t modulus() const { return n_; }

  double distance(const Point& x, const Point& y) const override {
    return static_cast<double>(circle_units(x.a, y.a, n_)) / static_cast<double>(n_);
  }

  Point map(const GroupElement& g, const EnvironmentPath& omega, const Point& x) const override {
    std::uint64_t y = x.a;
    for (std::int64_t s = 0; s < g[0]; ++s) {
      y = static_cast<std::uint64_t>(omega.symbol_at(GroupElement(s))) * y % n_;
    }
    return Point{y, 0};
  }

  std::uint64_t fiber_size(const EnvironmentPath&) const override { return n_; }

  FiberModel fiber(const EnvironmentPath&) const override {
    if (n_ > kFiberCap) throw ResourceCapError("circle grid above the enumeration cap");
    FiberModel f;
    f.label = label_;
    f.points.reserve(n_);
    for (std::uint64_t j = 0; j < n_; ++j) f.points.push_back(Point{j, 0});
    return f;
  }

  bool in_fiber(const EnvironmentPath&, const Point& x) const override { return x.a < n_ && x.b == 0; }
  Point random_point(const EnvironmentPath&, std::uint64_t key) const override {
    return Point{mix64(key) % n_, 0};
  }
  double grid_spacing() const override { return 1.0 / static_cast<double>(n_); }
  bool translation_invariant() const override { return true; }

  std::unique_ptr<OrbitEvaluator> bind(const EnvironmentPath& omega,
                                       const FolnerWindow& window) const override {
    check_window_domain(*this, window);
    return std::make_unique<Orbit>(*this, omega, window);
  }

  std::unique_ptr<ProximityIndex> proximity_index(double radius) const override {
    return std::make_unique<CircleIndex>(n_, radius);
  }

  FiberMeasure invariant_measure(const EnvironmentPath& omega) const override {
    return FiberMeasure::uniform(fiber(omega).points);
  }

  std::vector<PartitionSpec> canonical_partitions() const override {
    std::vector<PartitionSpec> out = {arc_partition("half", n_, 2), arc_partition("quarter", n_, 4)};
    const std::uint64_t arcs = fine_arcs();
    if (arcs != 2 && arcs != 4) out.push_back(arc_partition("arcs" + std::to_string(arcs), n_, arcs));
    return out;
  }
  // Arcs of length <= 1/(2 max m) separate any two points: their distance
  // grows by the factor m until they land in different arcs. For doubling
  // the half circle already does this.
  std::string generating_partition() const override {
    const std::uint64_t arcs = fine_arcs();
    if (arcs <= 4) return "half";
    return "arcs" + std::to_string(arcs);
  }

  PartitionSpec partition_with_diameter(double r) const override {
    const std::uint64_t width = units_for_radius(r, n_);
    PartitionSpec p;
    p.name = "arcs" + std::to_string(width);
    const std::uint64_t cells = (n_ + width - 1) / width;
    for (std::uint64_t c = 0; c < cells; ++c) p.labels.push_back("arc" + std::to_string(c));
    p.classify = [width](const Point& x) { return static_cast<std::size_t>(x.a / width); };
    p.declared_diameter = static_cast<double>(std::min(width, n_) - 1) / static_cast<double>(n_);
    return p;
  }

  OracleValue oracle() const override {
    double h = 0.0;
    std::string terms;
    for (std::size_t i = 0; i < law_->symbols().size(); ++i) {
      const double p = law_->probabilities()[i];
      h += p * std::log(static_cast<double>(law_->symbols()[i]));
      if (!terms.empty()) terms += " + ";
      terms += format_double(p) + "*log(" + std::to_string(law_->symbols()[i]) + ")";
    }
    return {h, "E[log m] = " + terms};
  }

  SystemDefaults defaults() const override {
    SystemDefaults d;
    if (law_->is_degenerate()) {
      d.n_list = default_n_range(1, 12);
      d.eps_list = {1.0 / 16, 1.0 / 32, 1.0 / 64};
      d.omega_samples = 1;
    } else {
      d.n_list = default_n_range(1, 8);
      d.eps_list = {1.0 / 64};
      d.omega_samples = 100;
    }
    d.method = Method::greedy;
    return d;
  }

  double invariance_defect(const EnvironmentPath& omega, const GroupElement& g) const override {
    // The pushed grid is the sublattice of multiples of gcd(P, N); compare
    // masses on blocks of that size.
    const Point one = apply_cocycle(*this, g, omega, Point{1, 0});
    const std::uint64_t block = one.a == 0 ? n_ : std::gcd(one.a, n_);
    const std::uint64_t blocks = n_ / block;
    std::vector<std::uint64_t> pushed(blocks, 0);
    for (std::uint64_t j = 0; j < n_; ++j) pushed[(one.a * j % n_) / block] += 1;
    std::uint64_t diff = 0;
    for (std::uint64_t b = 0; b < blocks; ++b) diff += pushed[b] > block ? pushed[b] - block : block - pushed[b];
    return 0.5 * static_cast<double>(diff) / static_cast<double>(n_);
  }

 private:
  class Orbit final : public OrbitEvaluator {
   public:
    Orbit(const CircleExpansion& sys, const EnvironmentPath& omega, const FolnerWindow& window)
        : n_(sys.n_) {
      factors_.reserve(window.size());
      std::uint64_t factor = 1 % n_;
      std::int64_t reached = 0;
      for (const auto& s : window.elements()) {
        for (; reached < s[0]; ++reached) {
          factor = static_cast<std::uint64_t>(omega.symbol_at(GroupElement(reached))) * factor % n_;
        }
        factors_.push_back(factor);
      }
    }
    void orbit(const Point& x, std::span<Point> out) const override {
      for (std::size_t i = 0; i < factors_.size(); ++i) out[i] = Point{factors_[i] * x.a % n_, 0};
    }

   private:
    std::uint64_t n_;
    std::vector<std::uint64_t> factors_;
  };

  std::uint64_t fine_arcs() const {
    const int top = *std::max_element(law_->symbols().begin(), law_->symbols().end());
    return std::min<std::uint64_t>(2 * static_cast<std::uint64_t>(top), n_);
  }

  std::uint64_t n_;
  std::shared_ptr<const SymbolLaw> law_;
  std::string label_;
};

// ---------------------------------------------------------------------------
// Toral automorphism

struct Mat2 {
  std::uint64_t a, b, c, d;
};

Mat2 mat_mul(const Mat2& x, const Mat2& y, std::uint64_t n) {
  auto mm = [n](std::uint64_t p, std::uint64_t q, std::uint64_t r, std::uint64_t s) {
    return static_cast<std::uint64_t>((static_cast<u128>(p) * q + static_cast<u128>(r) * s) % n);
  };
  return {mm(x.a, y.a, x.b, y.c), mm(x.a, y.b, x.b, y.d), mm(x.c, y.a, x.d, y.c), mm(x.c, y.b, x.d, y.d)};
}

Mat2 mat_pow(Mat2 base, std::uint64_t e, std::uint64_t n) {
  Mat2 result{1 % n, 0, 0, 1 % n};
  while (e > 0) {
    if ((e & 1U) != 0) result = mat_mul(result, base, n);
    base = mat_mul(base, base, n);
    e >>= 1U;
  }
  return result;
}

class ToralAutomorphism final : public ModelSystem {
 public:
  ToralAutomorphism(const std::array<std::int64_t, 4>& m, int q, std::string label)
      : entries_(m), n_(std::uint64_t{1} << q), q_(q), label_(std::move(label)),
        law_(std::make_shared<SymbolLaw>(SymbolLaw::point_mass(0))) {
    const std::int64_t det = m[0] * m[3] - m[1] * m[2];
    if (det != 1 && det != -1) {
      throw ConfigError("matrix: determinant must be +1 or -1, got " + std::to_string(det));
    }
    forward_ = {reduce(m[0], n_), reduce(m[1], n_), reduce(m[2], n_), reduce(m[3], n_)};
    backward_ = {reduce(det * m[3], n_), reduce(-det * m[1], n_), reduce(-det * m[2], n_),
                 reduce(det * m[0], n_)};
  }

  std::string name() const override { return "toral-automorphism"; }
  std::string label() const override { return label_; }
  bool invertible() const override { return true; }
  std::shared_ptr<const SymbolLaw> law() const override { return law_; }

  double distance(const Point& x, const Point& y) const override {
    return static_cast<double>(std::max(circle_units(x.a, y.a, n_), circle_units(x.b, y.b, n_))) /
           static_cast<double>(n_);
  }

  Point map(const GroupElement& g, const EnvironmentPath&, const Point& x) const override {
    return apply(power(g[0]), x);
  }

  std::uint64_t fiber_size(const EnvironmentPath&) const override { return n_ * n_; }

  FiberModel fiber(const EnvironmentPath&) const override {
    if (n_ * n_ > kFiberCap) throw ResourceCapError("torus grid above the enumeration cap");
    FiberModel f;
    f.label = label_;
    f.points.reserve(n_ * n_);
    for (std::uint64_t x = 0; x < n_; ++x)
      for (std::uint64_t y = 0; y < n_; ++y) f.points.push_back(Point{x, y});
    return f;
  }

  bool in_fiber(const EnvironmentPath&, const Point& x) const override { return x.a < n_ && x.b < n_; }
  Point random_point(const EnvironmentPath&, std::uint64_t key) const override {
    const std::uint64_t h = mix64(key);
    return Point{h % n_, mix64(h) % n_};
  }
  double grid_spacing() const override { return 1.0 / static_cast<double>(n_); }
  bool translation_invariant() const override { return true; }

  std::unique_ptr<OrbitEvaluator> bind(const EnvironmentPath&, const FolnerWindow& window) const override {
    check_window_domain(*this, window);
    auto orbit = std::make_unique<Orbit>();
    orbit->owner = this;
    for (const auto& s : window.elements()) orbit->mats.push_back(power(s[0]));
    return orbit;
  }

  std::unique_ptr<ProximityIndex> proximity_index(double radius) const override {
    return std::make_unique<TorusIndex>(n_, radius);
  }

  FiberMeasure invariant_measure(const EnvironmentPath& omega) const override {
    return FiberMeasure::uniform(fiber(omega).points);
  }

  std::vector<PartitionSpec> canonical_partitions() const override {
    return {square_partition("squares2", 2), square_partition("squares4", 4)};
  }

  PartitionSpec partition_with_diameter(double r) const override {
    const std::uint64_t width = std::min(units_for_radius(r, n_), n_);
    const std::uint64_t cells = (n_ + width - 1) / width;
    PartitionSpec p;
    p.name = "boxes" + std::to_string(width);
    for (std::uint64_t i = 0; i < cells * cells; ++i) p.labels.push_back("box" + std::to_string(i));
    p.classify = [width, cells](const Point& x) {
      return static_cast<std::size_t>((x.a / width) * cells + x.b / width);
    };
    p.declared_diameter = static_cast<double>(width - 1) / static_cast<double>(n_);
    return p;
  }

  OracleValue oracle() const override {
    const double tr = static_cast<double>(entries_[0] + entries_[3]);
    const double det = static_cast<double>(entries_[0] * entries_[3] - entries_[1] * entries_[2]);
    const double disc = tr * tr - 4.0 * det;
    double h = 0.0;
    if (disc > 0.0) {
      const double lambda = (std::abs(tr) + std::sqrt(disc)) / 2.0;
      h = std::max(0.0, std::log(lambda));
    }
    return {h, "log of the spectral radius of [[" + std::to_string(entries_[0]) + "," +
                   std::to_string(entries_[1]) + "],[" + std::to_string(entries_[2]) + "," +
                   std::to_string(entries_[3]) + "]]"};
  }

  SystemDefaults defaults() const override {
    SystemDefaults d;
    d.n_list = default_n_range(1, 8);
    d.eps_list = {1.0 / 4, 1.0 / 8};
    d.method = Method::volume;
    d.omega_samples = 1;
    return d;
  }

 private:
  struct Orbit final : OrbitEvaluator {
    const ToralAutomorphism* owner = nullptr;
    std::vector<Mat2> mats;
    void orbit(const Point& x, std::span<Point> out) const override {
      for (std::size_t i = 0; i < mats.size(); ++i) out[i] = owner->apply(mats[i], x);
    }
  };

  Mat2 power(std::int64_t t) const {
    return t >= 0 ? mat_pow(forward_, static_cast<std::uint64_t>(t), n_)
                  : mat_pow(backward_, static_cast<std::uint64_t>(-t), n_);
  }
  Point apply(const Mat2& m, const Point& x) const {
    return Point{static_cast<std::uint64_t>((static_cast<u128>(m.a) * x.a + static_cast<u128>(m.b) * x.b) % n_),
                 static_cast<std::uint64_t>((static_cast<u128>(m.c) * x.a + static_cast<u128>(m.d) * x.b) % n_)};
  }

  PartitionSpec square_partition(std::string name, std::uint64_t per_axis) const {
    PartitionSpec p;
    p.name = std::move(name);
    const std::uint64_t n = n_;
    for (std::uint64_t i = 0; i < per_axis * per_axis; ++i) p.labels.push_back("sq" + std::to_string(i));
    p.classify = [n, per_axis](const Point& x) {
      return static_cast<std::size_t>((x.a * per_axis / n) * per_axis + x.b * per_axis / n);
    };
    const std::uint64_t widest = (n + per_axis - 1) / per_axis;
    p.declared_diameter = static_cast<double>(widest - 1) / static_cast<double>(n);
    return p;
  }

  std::array<std::int64_t, 4> entries_;
  std::uint64_t n_;
  int q_;
  std::string label_;
  std::shared_ptr<const SymbolLaw> law_;
  Mat2 forward_{};
  Mat2 backward_{};
};

// ---------------------------------------------------------------------------
// Discrete points

class DiscretePoints final : public ModelSystem {
 public:
  explicit DiscretePoints(std::size_t k) : k_(k), law_(std::make_shared<SymbolLaw>(SymbolLaw::point_mass(0))) {
    if (k < 1) throw ConfigError("k: discrete system needs at least one point");
  }

  std::string name() const override { return "discrete"; }
  std::string label() const override { return "discrete;k=" + std::to_string(k_); }
  bool invertible() const override { return true; }
  std::shared_ptr<const SymbolLaw> law() const override { return law_; }
  double distance(const Point& x, const Point& y) const override { return x == y ? 0.0 : 1.0; }
  Point map(const GroupElement&, const EnvironmentPath&, const Point& x) const override { return x; }
  std::uint64_t fiber_size(const EnvironmentPath&) const override { return k_; }
  FiberModel fiber(const EnvironmentPath&) const override {
    FiberModel f;
    f.label = label();
    for (std::uint64_t i = 0; i < k_; ++i) f.points.push_back(Point{i, 0});
    return f;
  }
  bool in_fiber(const EnvironmentPath&, const Point& x) const override { return x.a < k_ && x.b == 0; }
  Point random_point(const EnvironmentPath&, std::uint64_t key) const override { return Point{mix64(key) % k_, 0}; }

  FiberMeasure invariant_measure(const EnvironmentPath& omega) const override {
    return FiberMeasure::uniform(fiber(omega).points);
  }
  std::vector<PartitionSpec> canonical_partitions() const override { return {points_partition()}; }
  PartitionSpec partition_with_diameter(double) const override { return points_partition(); }
  OracleValue oracle() const override { return {0.0, "identity dynamics: h = 0"}; }
  SystemDefaults defaults() const override {
    SystemDefaults d;
    d.n_list = {1, 2, 3};
    d.eps_list = {0.5};
    d.method = k_ <= kDefaultExactCap ? Method::exact : Method::greedy;
    d.omega_samples = 1;
    return d;
  }

 private:
  PartitionSpec points_partition() const {
    PartitionSpec p;
    p.name = "points";
    for (std::size_t i = 0; i < k_; ++i) p.labels.push_back("p" + std::to_string(i));
    p.classify = [](const Point& x) { return static_cast<std::size_t>(x.a); };
    p.declared_diameter = 0.0;
    return p;
  }

  std::size_t k_;
  std::shared_ptr<const SymbolLaw> law_;
};

// ---------------------------------------------------------------------------
// Registry helpers

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else if (ch != ' ') {
      cur += ch;
    }
  }
  out.push_back(cur);
  return out;
}

std::int64_t parse_int(const std::string& key, const std::string& value) {
  try {
    std::size_t used = 0;
    const long long v = std::stoll(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const std::exception&) {
    throw ConfigError("param " + key + ": expected an integer, got '" + value + "'");
  }
}

double parse_real(const std::string& key, const std::string& value) {
  try {
    const auto slash = value.find('/');
    if (slash != std::string::npos) {
      return parse_real(key, value.substr(0, slash)) / parse_real(key, value.substr(slash + 1));
    }
    std::size_t used = 0;
    const double v = std::stod(value, &used);
    if (used != value.size()) throw std::invalid_argument(value);
    return v;
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception&) {
    throw ConfigError("param " + key + ": expected a number, got '" + value + "'");
  }
}

class ParamReader {
 public:
  ParamReader(std::string system, const std::map<std::string, std::string>& params)
      : system_(std::move(system)), params_(params) {}

  std::string get(const std::string& key, const std::string& fallback) {
    used_.push_back(key);
    const auto it = params_.find(key);
    return it == params_.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const { return params_.count(key) != 0; }
  void finish() const {
    for (const auto& [key, value] : params_) {
      if (std::find(used_.begin(), used_.end(), key) == used_.end()) {
        throw ConfigError("param " + key + ": not a parameter of system " + system_);
      }
    }
  }

 private:
  std::string system_;
  const std::map<std::string, std::string>& params_;
  std::vector<std::string> used_;
};

int checked_int(const std::string& key, std::int64_t v, std::int64_t lo, std::int64_t hi) {
  if (v < lo || v > hi) {
    throw ConfigError("param " + key + ": must be in [" + std::to_string(lo) + ", " + std::to_string(hi) +
                      "], got " + std::to_string(v));
  }
  return static_cast<int>(v);
}

SymbolLaw read_multiplier_law(ParamReader& r, const std::string& default_multipliers) {
  std::vector<int> ms;
  for (const auto& tok : split(r.get("multipliers", default_multipliers), ',')) {
    ms.push_back(checked_int("multipliers", parse_int("multipliers", tok), 1, 1 << 20));
  }
  const std::string probs = r.get("probs", "");
  if (probs.empty()) return SymbolLaw::uniform(ms);
  std::vector<double> ps;
  for (const auto& tok : split(probs, ',')) ps.push_back(parse_real("probs", tok));
  try {
    return SymbolLaw(ms, ps);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("param probs: ") + e.what());
  }
}

}  // namespace

std::unique_ptr<ModelSystem> make_full_shift(int k, int m, int n_max) {
  return std::make_unique<FullShift>(k, m, n_max);
}

std::unique_ptr<ModelSystem> make_circle_expansion(const SymbolLaw& multipliers, std::uint64_t modulus) {
  std::vector<int> ms = multipliers.symbols();
  std::string probs;
  for (std::size_t i = 0; i < multipliers.probabilities().size(); ++i) {
    if (i != 0) probs += ':';
    probs += format_double(multipliers.probabilities()[i]);
  }
  return std::make_unique<CircleExpansion>(
      multipliers, modulus,
      "circle-expansion;multipliers=" + join_ints(ms, ':') + ";probs=" + probs + ";modulus=" + std::to_string(modulus));
}

std::unique_ptr<ModelSystem> make_random_expansion(const SymbolLaw& multipliers, int grid_exponent) {
  if (grid_exponent < 1 || grid_exponent > 24) {
    throw ConfigError("Q: grid exponent must be in [1, 24], got " + std::to_string(grid_exponent));
  }
  std::string probs;
  for (std::size_t i = 0; i < multipliers.probabilities().size(); ++i) {
    if (i != 0) probs += ':';
    probs += format_double(multipliers.probabilities()[i]);
  }
  const std::string head = multipliers.is_degenerate() && multipliers.symbols().size() == 1 &&
                                   multipliers.symbols().front() == 2
                               ? "doubling"
                               : "random-expansion;multipliers=" + join_ints(multipliers.symbols(), ':') +
                                     ";probs=" + probs;
  return std::make_unique<CircleExpansion>(multipliers, std::uint64_t{1} << grid_exponent,
                                           head + ";Q=" + std::to_string(grid_exponent));
}

std::unique_ptr<ModelSystem> make_toral_automorphism(const std::array<std::int64_t, 4>& matrix,
                                                     int grid_exponent) {
  if (grid_exponent < 1 || grid_exponent > 12) {
    throw ConfigError("Q: torus grid exponent must be in [1, 12], got " + std::to_string(grid_exponent));
  }
  std::string head = "toral-automorphism;matrix=" + std::to_string(matrix[0]) + ":" + std::to_string(matrix[1]) +
                     ":" + std::to_string(matrix[2]) + ":" + std::to_string(matrix[3]);
  if (matrix == std::array<std::int64_t, 4>{2, 1, 1, 1}) head = "cat-map";
  return std::make_unique<ToralAutomorphism>(matrix, grid_exponent, head + ";Q=" + std::to_string(grid_exponent));
}

std::unique_ptr<ModelSystem> make_discrete_points(std::size_t k) { return std::make_unique<DiscretePoints>(k); }

std::vector<SystemInfo> list_systems() {
  return {
      {"full-shift", "two-sided full shift, cylinder metric, oracle log k", "k=2 m=1 n_max=64"},
      {"doubling", "x -> 2x mod 1 on the grid Z/2^Q, oracle log 2", "Q=16"},
      {"random-expansion", "x -> m(w0) x mod 1, m drawn i.i.d., oracle E[log m]",
       "multipliers=2,3 probs=0.5,0.5 Q=18"},
      {"cat-map", "toral automorphism [[2,1],[1,1]] on (Z/2^Q)^2, oracle log((3+sqrt5)/2)", "Q=8"},
      {"toral-automorphism", "unimodular integer matrix on (Z/2^Q)^2, oracle log spectral radius",
       "matrix=2,1,1,1 Q=8"},
      {"discrete", "k isolated points with identity dynamics, oracle 0", "k=8"},
  };
}

std::unique_ptr<ModelSystem> make_system(std::string_view name,
                                         const std::map<std::string, std::string>& params) {
  const std::string sys(name);
  ParamReader r(sys, params);
  std::unique_ptr<ModelSystem> out;
  if (sys == "full-shift") {
    const int k = checked_int("k", parse_int("k", r.get("k", "2")), 2, 1 << 16);
    const int m = checked_int("m", parse_int("m", r.get("m", "1")), 1, 64);
    const int n_max = checked_int("n_max", parse_int("n_max", r.get("n_max", "64")), 1, 4096);
    out = make_full_shift(k, m, n_max);
  } else if (sys == "doubling" || sys == "random-expansion") {
    const SymbolLaw law = sys == "doubling" ? SymbolLaw::point_mass(2) : read_multiplier_law(r, "2,3");
    const std::string default_q = sys == "doubling" ? "16" : "18";
    if (r.has("modulus")) {
      const auto modulus = parse_int("modulus", r.get("modulus", ""));
      checked_int("modulus", modulus, 2, std::int64_t{1} << 30);
      out = make_circle_expansion(law, static_cast<std::uint64_t>(modulus));
    } else {
      out = make_random_expansion(law, checked_int("Q", parse_int("Q", r.get("Q", default_q)), 1, 24));
    }
  } else if (sys == "cat-map" || sys == "toral-automorphism") {
    std::array<std::int64_t, 4> m{2, 1, 1, 1};
    if (sys == "toral-automorphism") {
      const auto toks = split(r.get("matrix", "2,1,1,1"), ',');
      if (toks.size() != 4) throw ConfigError("param matrix: expected four comma-separated integers");
      for (std::size_t i = 0; i < 4; ++i) m[i] = parse_int("matrix", toks[i]);
    }
    out = make_toral_automorphism(m, checked_int("Q", parse_int("Q", r.get("Q", "8")), 1, 12));
  } else if (sys == "discrete") {
    out = make_discrete_points(static_cast<std::size_t>(checked_int("k", parse_int("k", r.get("k", "8")), 1, 1 << 20)));
  } else {
    std::string known;
    for (const auto& info : list_systems()) known += (known.empty() ? "" : ", ") + info.name;
    throw ConfigError("system: unknown system '" + sys + "' (known: " + known + ")");
  }
  r.finish();
  return out;
}

}  // namespace crds
