#include "crds/separated.hpp"

#include <bit>
#include <cstdint>
#include <stdexcept>
#include <unordered_map>

#include "crds/errors.hpp"

namespace crds {

std::string_view to_string(Method method) {
  switch (method) {
    case Method::exact:
      return "exact";
    case Method::greedy:
      return "greedy";
    case Method::volume:
      return "volume";
  }
  return "greedy";
}

Method parse_method(std::string_view text) {
  if (text == "exact") return Method::exact;
  if (text == "greedy") return Method::greedy;
  if (text == "volume") return Method::volume;
  throw ConfigError("method: expected exact, greedy or volume, got '" + std::string(text) + "'");
}

std::vector<Point> witness_points(const FiberModel& fiber, const SeparatedSetResult& result) {
  std::vector<Point> out;
  out.reserve(result.witness.size());
  for (std::size_t i : result.witness) out.push_back(fiber.points[i]);
  return out;
}

bool is_separated(const RandomDynamicalSystem& system, std::span<const Point> points,
                  const EnvironmentPath& omega, const FolnerWindow& window, double eps) {
  const auto eval = system.bind(omega, window);
  const std::size_t w = window.size();
  std::vector<Point> orbits(points.size() * w);
  for (std::size_t i = 0; i < points.size(); ++i) {
    eval->orbit(points[i], std::span<Point>(orbits).subspan(i * w, w));
  }
  const std::span<const Point> all(orbits);
  for (std::size_t i = 0; i < points.size(); ++i) {
    for (std::size_t j = i + 1; j < points.size(); ++j) {
      if (orbits_within(system, all.subspan(i * w, w), all.subspan(j * w, w), eps)) return false;
    }
  }
  return true;
}

namespace {

using Mask = std::uint64_t;

struct MisSearch {
  std::vector<Mask> conflicts;
  std::vector<std::size_t> current;
  std::vector<std::size_t> best;

  void expand(Mask candidates) {
    if (current.size() + static_cast<std::size_t>(std::popcount(candidates)) <= best.size()) return;
    if (candidates == 0) {
      best = current;
      return;
    }
    const auto v = static_cast<std::size_t>(std::countr_zero(candidates));
    const Mask bit = Mask{1} << v;
    // Include-first order visits index lists lexicographically, so the first
    // maximum found is the lexicographically smallest one.
    current.push_back(v);
    expand(candidates & ~conflicts[v] & ~bit);
    current.pop_back();
    expand(candidates & ~bit);
  }
};

// Shared sweep for the greedy separated set and the greedy covering. Buckets
// kept points by the cells of their first and last orbit points, which any
// point within Bowen distance eps must share up to neighbors.
std::vector<std::size_t> greedy_sweep(const RandomDynamicalSystem& system,
                                      const FiberModel& fiber, const EnvironmentPath& omega,
                                      const FolnerWindow& window, double eps) {
  const auto eval = system.bind(omega, window);
  const auto index = system.proximity_index(eps);
  const std::size_t w = window.size();
  const std::size_t cells = index->cell_count();
  const bool two_keys = w > 1 && cells > 1;
  const std::size_t key_space = two_keys ? cells * cells : cells;
  constexpr std::size_t kDenseLimit = std::size_t{1} << 20;
  const bool dense = key_space <= kDenseLimit;

  std::vector<std::vector<std::uint32_t>> dense_buckets(dense ? key_space : 0);
  std::unordered_map<std::uint64_t, std::vector<std::uint32_t>> sparse_buckets;
  auto bucket = [&](std::uint64_t key) -> std::vector<std::uint32_t>* {
    if (dense) return &dense_buckets[key];
    auto it = sparse_buckets.find(key);
    return it == sparse_buckets.end() ? nullptr : &it->second;
  };

  std::vector<std::size_t> kept;
  std::vector<Point> kept_orbits;
  std::vector<Point> buf(w);
  std::vector<std::size_t> near_first;
  std::vector<std::size_t> near_last;

  for (std::size_t i = 0; i < fiber.points.size(); ++i) {
    eval->orbit(fiber.points[i], buf);
    const std::size_t c0 = index->cell_of(buf.front());
    const std::size_t c1 = two_keys ? index->cell_of(buf.back()) : 0;
    index->neighbor_cells(c0, near_first);
    if (two_keys) {
      index->neighbor_cells(c1, near_last);
    } else {
      near_last.assign(1, 0);
    }

    bool blocked = false;
    for (std::size_t a : near_first) {
      for (std::size_t b : near_last) {
        const std::uint64_t key = two_keys ? a * cells + b : a;
        const auto* members = bucket(key);
        if (members == nullptr) continue;
        for (std::uint32_t k : *members) {
          const std::span<const Point> other(kept_orbits.data() + static_cast<std::size_t>(k) * w, w);
          if (orbits_within(system, buf, other, eps)) {
            blocked = true;
            break;
          }
        }
        if (blocked) break;
      }
      if (blocked) break;
    }
    if (blocked) continue;

    const auto slot = static_cast<std::uint32_t>(kept.size());
    kept.push_back(i);
    kept_orbits.insert(kept_orbits.end(), buf.begin(), buf.end());
    const std::uint64_t key = two_keys ? c0 * cells + c1 : c0;
    if (dense) {
      dense_buckets[key].push_back(slot);
    } else {
      sparse_buckets[key].push_back(slot);
    }
  }
  return kept;
}

}  // namespace

SeparatedSetResult max_separated_exact(const RandomDynamicalSystem& system, const FiberModel& fiber,
                                       const EnvironmentPath& omega, const FolnerWindow& window,
                                       double eps, std::size_t cap) {
  const std::size_t n = fiber.points.size();
  const std::size_t hard_cap = std::min<std::size_t>(cap, 64);
  if (n > hard_cap) {
    throw ResourceCapError("fiber of " + std::to_string(n) +
                           " points is too large for exact (cap " + std::to_string(hard_cap) +
                           "); use the greedy method");
  }
  SeparatedSetResult result;
  result.method = Method::exact;
  result.epsilon = eps;
  result.window = window;
  if (n == 0) return result;

  const auto eval = system.bind(omega, window);
  const std::size_t w = window.size();
  std::vector<Point> orbits(n * w);
  for (std::size_t i = 0; i < n; ++i) {
    eval->orbit(fiber.points[i], std::span<Point>(orbits).subspan(i * w, w));
  }
  const std::span<const Point> all(orbits);

  MisSearch search;
  search.conflicts.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      if (orbits_within(system, all.subspan(i * w, w), all.subspan(j * w, w), eps)) {
        search.conflicts[i] |= Mask{1} << j;
        search.conflicts[j] |= Mask{1} << i;
      }
    }
  }
  const Mask everything = n == 64 ? ~Mask{0} : (Mask{1} << n) - 1;
  search.expand(everything);

  result.witness = std::move(search.best);
  result.cardinality = result.witness.size();
  return result;
}

SeparatedSetResult max_separated_greedy(const RandomDynamicalSystem& system,
                                        const FiberModel& fiber, const EnvironmentPath& omega,
                                        const FolnerWindow& window, double eps) {
  SeparatedSetResult result;
  result.method = Method::greedy;
  result.epsilon = eps;
  result.window = window;
  result.witness = greedy_sweep(system, fiber, omega, window, eps);
  result.cardinality = result.witness.size();
  return result;
}

std::size_t spanning_number(const RandomDynamicalSystem& system, const FiberModel& fiber,
                            const EnvironmentPath& omega, const FolnerWindow& window, double eps) {
  // A maximal eps-separated set is an eps-covering: every skipped point was
  // within eps of a kept one.
  return greedy_sweep(system, fiber, omega, window, eps).size();
}

std::uint64_t bowen_ball_volume(const RandomDynamicalSystem& system, const FiberModel& fiber,
                                const EnvironmentPath& omega, const FolnerWindow& window, double eps) {
  if (!system.translation_invariant()) {
    throw std::invalid_argument("bowen_ball_volume: " + system.name() + " is not translation invariant");
  }
  const auto eval = system.bind(omega, window);
  std::vector<Point> zero(window.size());
  std::vector<Point> buf(window.size());
  eval->orbit(Point{}, zero);
  std::uint64_t volume = 0;
  for (const auto& v : fiber.points) {
    eval->orbit(v, buf);
    if (orbits_within(system, zero, buf, eps)) ++volume;
  }
  return volume;
}

}  // namespace crds
