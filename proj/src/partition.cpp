#include "crds/partition.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>
#include <stdexcept>

namespace crds {

std::size_t PartitionSpec::cell_of(const Point& x) const {
  const std::size_t c = classify(x);
  if (c >= labels.size()) {
    throw std::out_of_range("partition " + name + ": classifier returned cell " + std::to_string(c) +
                            " of " + std::to_string(labels.size()));
  }
  return c;
}

PartitionSpec trivial_partition() {
  PartitionSpec p;
  p.name = "trivial";
  p.labels = {"X"};
  p.classify = [](const Point&) { return std::size_t{0}; };
  return p;
}

bool covers_exactly_once(const PartitionSpec& partition, const FiberModel& fiber) {
  return std::all_of(fiber.points.begin(), fiber.points.end(),
                     [&](const Point& x) { return partition.classify(x) < partition.size(); });
}

double measured_diameter(const RandomDynamicalSystem& system, const PartitionSpec& partition,
                         const FiberModel& fiber) {
  std::vector<std::vector<Point>> cells(partition.size());
  for (const auto& x : fiber.points) cells[partition.cell_of(x)].push_back(x);
  double diam = 0.0;
  for (const auto& cell : cells) {
    for (std::size_t i = 0; i < cell.size(); ++i)
      for (std::size_t j = i + 1; j < cell.size(); ++j) diam = std::max(diam, system.distance(cell[i], cell[j]));
  }
  return diam;
}

FiberMeasure FiberMeasure::uniform(std::vector<Point> points) {
  std::sort(points.begin(), points.end());
  points.erase(std::unique(points.begin(), points.end()), points.end());
  FiberMeasure m;
  m.weights.assign(points.size(), points.empty() ? 0.0 : 1.0 / static_cast<double>(points.size()));
  m.support = std::move(points);
  return m;
}

FiberMeasure FiberMeasure::from_pairs(std::vector<std::pair<Point, double>> pairs) {
  std::sort(pairs.begin(), pairs.end(),
            [](const auto& l, const auto& r) { return l.first < r.first; });
  FiberMeasure m;
  for (const auto& [x, w] : pairs) {
    if (!m.support.empty() && m.support.back() == x) {
      m.weights.back() += w;
    } else {
      m.support.push_back(x);
      m.weights.push_back(w);
    }
  }
  return m;
}

double FiberMeasure::total() const {
  double t = 0.0;
  for (double w : weights) t += w;
  return t;
}

double FiberMeasure::weight_of(const Point& x) const {
  const auto it = std::lower_bound(support.begin(), support.end(), x);
  if (it == support.end() || *it != x) return 0.0;
  return weights[static_cast<std::size_t>(it - support.begin())];
}

double total_variation(const FiberMeasure& a, const FiberMeasure& b) {
  double sum = 0.0;
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < a.support.size() || j < b.support.size()) {
    if (j == b.support.size() || (i < a.support.size() && a.support[i] < b.support[j])) {
      sum += std::abs(a.weights[i++]);
    } else if (i == a.support.size() || b.support[j] < a.support[i]) {
      sum += std::abs(b.weights[j++]);
    } else {
      sum += std::abs(a.weights[i++] - b.weights[j++]);
    }
  }
  return 0.5 * sum;
}

double shannon_entropy(std::span<const double> weights) {
  double total = 0.0;
  for (double p : weights) {
    if (p < 0.0 || !std::isfinite(p)) throw std::invalid_argument("shannon_entropy: negative or non-finite weight");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("shannon_entropy: weights sum to " + std::to_string(total));
  }
  double h = 0.0;
  for (double p : weights) {
    if (p > 0.0) h -= p * std::log(p);
  }
  return h;
}

BoundSides entropy_bound_check(std::span<const double> p, std::span<const double> a) {
  if (p.size() != a.size() || p.empty()) {
    throw std::invalid_argument("entropy_bound_check: p and a must be nonempty and of equal length");
  }
  BoundSides sides;
  for (std::size_t m = 0; m < p.size(); ++m) {
    if (p[m] > 0.0) sides.lhs += p[m] * (a[m] - std::log(p[m]));
  }
  const double top = *std::max_element(a.begin(), a.end());
  double sum = 0.0;
  for (double am : a) sum += std::exp(am - top);
  sides.rhs = top + std::log(sum);
  return sides;
}

namespace {

using Itinerary = std::vector<std::uint32_t>;

class ItineraryReader {
 public:
  ItineraryReader(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                  const FolnerWindow& window, const PartitionSpec& partition)
      : eval_(system.bind(omega, window)), partition_(partition), buf_(window.size()) {}

  void read(const Point& x, Itinerary& out) {
    eval_->orbit(x, buf_);
    out.resize(buf_.size());
    for (std::size_t i = 0; i < buf_.size(); ++i) out[i] = static_cast<std::uint32_t>(partition_.cell_of(buf_[i]));
  }

 private:
  std::unique_ptr<OrbitEvaluator> eval_;
  const PartitionSpec& partition_;
  std::vector<Point> buf_;
};

std::string itinerary_label(const Itinerary& it) {
  std::string s;
  for (std::size_t i = 0; i < it.size(); ++i) {
    if (i != 0) s += '.';
    s += std::to_string(it[i]);
  }
  return s;
}

double entropy_of_masses(std::span<const double> masses) {
  double h = 0.0;
  for (double m : masses) {
    if (m > 0.0) h -= m * std::log(m);
  }
  return h;
}

}  // namespace

PartitionSpec joined_partition(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                               const FolnerWindow& window, const PartitionSpec& partition,
                               const FiberModel& fiber) {
  ItineraryReader reader(system, omega, window, partition);
  auto cells = std::make_shared<std::map<Itinerary, std::size_t>>();
  Itinerary it;
  for (const auto& x : fiber.points) {
    reader.read(x, it);
    cells->emplace(it, 0);
  }
  PartitionSpec joined;
  joined.name = partition.name + "^" + std::to_string(window.size());
  std::size_t next = 0;
  for (auto& [key, idx] : *cells) {
    idx = next++;
    joined.labels.push_back(itinerary_label(key));
  }
  auto shared_reader = std::make_shared<ItineraryReader>(system, omega, window, partition);
  joined.classify = [cells, shared_reader](const Point& x) {
    Itinerary local;
    shared_reader->read(x, local);
    const auto found = cells->find(local);
    if (found == cells->end()) {
      throw std::out_of_range("joined partition: point outside the enumerated fiber");
    }
    return found->second;
  };
  joined.declared_diameter = partition.declared_diameter;
  return joined;
}

JoinedEntropy joined_partition_entropy(const RandomDynamicalSystem& system,
                                       const EnvironmentPath& omega, const FolnerWindow& window,
                                       const PartitionSpec& partition, const FiberMeasure& measure) {
  const auto eval = system.bind(omega, window);
  const std::size_t w = window.size();
  const std::uint64_t radix = std::max<std::size_t>(partition.size(), 1);
  const std::size_t n = measure.support.size();

  bool packed = true;
  std::uint64_t span = 1;
  for (std::size_t i = 0; i < w; ++i) {
    if (span > std::numeric_limits<std::uint64_t>::max() / radix) {
      packed = false;
      break;
    }
    span *= radix;
  }

  std::vector<Point> buf(w);
  JoinedEntropy out;
  if (packed) {
    std::vector<std::uint64_t> keys(n);
    for (std::size_t i = 0; i < n; ++i) {
      eval->orbit(measure.support[i], buf);
      std::uint64_t key = 0;
      for (const auto& y : buf) key = key * radix + partition.cell_of(y);
      keys[i] = key;
    }
    const std::uint64_t dense_limit = std::min<std::uint64_t>(std::uint64_t{1} << 24, 4 * n + 65536);
    std::vector<double> masses;
    if (span <= dense_limit) {
      std::vector<double> cell_mass(span, 0.0);
      std::vector<char> seen(span, 0);
      for (std::size_t i = 0; i < n; ++i) {
        cell_mass[keys[i]] += measure.weights[i];
        seen[keys[i]] = 1;
      }
      for (std::uint64_t k = 0; k < span; ++k) {
        if (seen[k] != 0) masses.push_back(cell_mass[k]);
      }
    } else {
      std::vector<std::size_t> order(n);
      for (std::size_t i = 0; i < n; ++i) order[i] = i;
      std::sort(order.begin(), order.end(), [&](std::size_t l, std::size_t r) {
        return keys[l] != keys[r] ? keys[l] < keys[r] : l < r;
      });
      for (std::size_t j = 0; j < n; ++j) {
        if (j == 0 || keys[order[j]] != keys[order[j - 1]]) masses.push_back(0.0);
        masses.back() += measure.weights[order[j]];
      }
    }
    out.entropy = entropy_of_masses(masses);
    out.nonempty_cells = masses.size();
    return out;
  }

  std::map<Itinerary, double> cells;
  ItineraryReader reader(system, omega, window, partition);
  Itinerary it;
  for (std::size_t i = 0; i < n; ++i) {
    reader.read(measure.support[i], it);
    cells[it] += measure.weights[i];
  }
  std::vector<double> masses;
  masses.reserve(cells.size());
  for (const auto& [key, m] : cells) masses.push_back(m);
  out.entropy = entropy_of_masses(masses);
  out.nonempty_cells = masses.size();
  return out;
}

double conditional_partition_entropy(const FiberMeasure& measure, const PartitionSpec& alpha,
                                     const PartitionSpec& conditioning) {
  std::map<std::pair<std::size_t, std::size_t>, double> joint;
  std::vector<double> cond_mass(conditioning.size(), 0.0);
  for (std::size_t i = 0; i < measure.support.size(); ++i) {
    const Point& x = measure.support[i];
    const std::size_t c = conditioning.cell_of(x);
    joint[{c, alpha.cell_of(x)}] += measure.weights[i];
    cond_mass[c] += measure.weights[i];
  }
  double h = 0.0;
  for (const auto& [key, m] : joint) {
    const double mc = cond_mass[key.first];
    if (m > 0.0 && mc > 0.0) h -= m * std::log(m / mc);
  }
  return h;
}

FiberMeasure empirical_nu(const RandomDynamicalSystem& system, const FiberModel& fiber,
                          const EnvironmentPath& omega, const FolnerWindow& window, double eps,
                          Method method, std::size_t exact_cap) {
  const SeparatedSetResult result = method == Method::exact
                                        ? max_separated_exact(system, fiber, omega, window, eps, exact_cap)
                                        : max_separated_greedy(system, fiber, omega, window, eps);
  return FiberMeasure::uniform(witness_points(fiber, result));
}

std::vector<PushedMeasure> empirical_mu(const RandomDynamicalSystem& system, const FiberMeasure& nu,
                                        const EnvironmentPath& omega, const FolnerWindow& window) {
  check_window_domain(system, window);
  std::vector<PushedMeasure> out;
  out.reserve(window.size());
  const double weight = 1.0 / static_cast<double>(window.size());
  for (const auto& g : window.elements()) {
    std::vector<std::pair<Point, double>> images;
    images.reserve(nu.support.size());
    for (std::size_t i = 0; i < nu.support.size(); ++i) {
      images.emplace_back(apply_cocycle(system, g, omega, nu.support[i]), nu.weights[i]);
    }
    out.push_back(PushedMeasure{shift_environment(g, omega), FiberMeasure::from_pairs(std::move(images)), weight});
  }
  return out;
}

bool atom_injectivity_check(const RandomDynamicalSystem& system, const EnvironmentPath& omega,
                            const FolnerWindow& window, double eps, const PartitionSpec& partition,
                            std::span<const Point> witness) {
  (void)eps;  // Only part of the contract: the guarantee needs diam(C) <= eps.
  ItineraryReader reader(system, omega, window, partition);
  std::vector<Itinerary> seen;
  seen.reserve(witness.size());
  Itinerary it;
  for (const auto& x : witness) {
    reader.read(x, it);
    seen.push_back(it);
  }
  std::sort(seen.begin(), seen.end());
  return std::adjacent_find(seen.begin(), seen.end()) == seen.end();
}

}  // namespace crds
