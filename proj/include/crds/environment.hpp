#pragma once

#include <cstdint>
#include <memory>
#include <vector>

#include "crds/group.hpp"

namespace crds {

/// Discrete probability law over a finite symbol set. The driving measure
/// P is the i.i.d. product of this law over the group sites.
class SymbolLaw {
 public:
  SymbolLaw(std::vector<int> symbols, std::vector<double> probabilities);

  static SymbolLaw point_mass(int symbol) { return SymbolLaw({symbol}, {1.0}); }
  static SymbolLaw uniform(std::vector<int> symbols);

  const std::vector<int>& symbols() const { return symbols_; }
  const std::vector<double>& probabilities() const { return probabilities_; }
  /// True when one symbol carries all the mass, i.e. Ω is effectively a point.
  bool is_degenerate() const;
  /// Inverse-CDF draw from 64 uniform random bits.
  int draw(std::uint64_t bits) const;

 private:
  std::vector<int> symbols_;
  std::vector<double> probabilities_;
  std::vector<double> cumulative_;
};

/// A point ω of the driving system: a seeded symbol field on the group,
/// observed through an offset so that the shift action is exact.
class EnvironmentPath {
 public:
  EnvironmentPath(std::uint64_t seed, std::shared_ptr<const SymbolLaw> law, GroupElement offset);

  /// Pure function of (seed, law, offset ∘ g).
  int symbol_at(const GroupElement& g) const;

  std::uint64_t seed() const { return seed_; }
  const GroupElement& offset() const { return offset_; }
  const SymbolLaw& law() const { return *law_; }
  const std::shared_ptr<const SymbolLaw>& law_ptr() const { return law_; }
  int dimension() const { return offset_.dimension(); }

 private:
  std::uint64_t seed_;
  std::shared_ptr<const SymbolLaw> law_;
  GroupElement offset_;
};

/// splitmix64 finalizer.
std::uint64_t mix64(std::uint64_t x);

/// Per-sample seed: mix64(master ^ mix64(index + golden ratio constant)).
/// Depends only on (master_seed, sample_index), so parallel and serial runs
/// visit identical environments.
std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t sample_index);

EnvironmentPath sample_environment(std::shared_ptr<const SymbolLaw> law, int dim,
                                   std::uint64_t master_seed, std::uint64_t sample_index);

/// hω: symbol_at(g) of the result equals ω.symbol_at(h ∘ g).
EnvironmentPath shift_environment(const GroupElement& h, const EnvironmentPath& omega);

}  // namespace crds
