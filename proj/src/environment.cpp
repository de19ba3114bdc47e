#include "crds/environment.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace crds {

namespace {
constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
}

SymbolLaw::SymbolLaw(std::vector<int> symbols, std::vector<double> probabilities)
    : symbols_(std::move(symbols)), probabilities_(std::move(probabilities)) {
  if (symbols_.empty() || symbols_.size() != probabilities_.size()) {
    throw std::invalid_argument("symbol law: symbols and probabilities must be nonempty and of equal length");
  }
  double total = 0.0;
  for (double p : probabilities_) {
    if (!(p >= 0.0) || !std::isfinite(p)) throw std::invalid_argument("symbol law: negative or non-finite probability");
    total += p;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw std::invalid_argument("symbol law: probabilities sum to " + std::to_string(total) + ", expected 1");
  }
  double acc = 0.0;
  cumulative_.reserve(probabilities_.size());
  for (double p : probabilities_) {
    acc += p;
    cumulative_.push_back(acc);
  }
  cumulative_.back() = 1.0;
}

SymbolLaw SymbolLaw::uniform(std::vector<int> symbols) {
  const std::size_t k = symbols.size();
  if (k == 0) throw std::invalid_argument("symbol law: empty symbol set");
  return SymbolLaw(std::move(symbols), std::vector<double>(k, 1.0 / static_cast<double>(k)));
}

bool SymbolLaw::is_degenerate() const {
  std::size_t support = 0;
  for (double p : probabilities_) support += p > 0.0 ? 1 : 0;
  return support <= 1;
}

int SymbolLaw::draw(std::uint64_t bits) const {
  if (symbols_.size() == 1) return symbols_.front();
  const double u = static_cast<double>(bits >> 11) * 0x1.0p-53;
  for (std::size_t i = 0; i < cumulative_.size(); ++i) {
    if (u < cumulative_[i] && probabilities_[i] > 0.0) return symbols_[i];
  }
  for (std::size_t i = probabilities_.size(); i-- > 0;) {
    if (probabilities_[i] > 0.0) return symbols_[i];
  }
  return symbols_.back();
}

std::uint64_t mix64(std::uint64_t x) {
  x += kGolden;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t sample_index) {
  return mix64(master_seed ^ mix64(sample_index + kGolden));
}

EnvironmentPath::EnvironmentPath(std::uint64_t seed, std::shared_ptr<const SymbolLaw> law,
                                 GroupElement offset)
    : seed_(seed), law_(std::move(law)), offset_(offset) {
  if (!law_) throw std::invalid_argument("environment: null symbol law");
}

int EnvironmentPath::symbol_at(const GroupElement& g) const {
  const GroupElement site = compose(offset_, g);
  std::uint64_t h = mix64(seed_ ^ mix64(static_cast<std::uint64_t>(site[0])));
  if (site.dimension() == 2) h = mix64(h ^ (mix64(static_cast<std::uint64_t>(site[1])) + kGolden));
  return law_->draw(h);
}

EnvironmentPath sample_environment(std::shared_ptr<const SymbolLaw> law, int dim,
                                   std::uint64_t master_seed, std::uint64_t sample_index) {
  return EnvironmentPath(derive_seed(master_seed, sample_index), std::move(law),
                         GroupElement::identity(dim));
}

EnvironmentPath shift_environment(const GroupElement& h, const EnvironmentPath& omega) {
  return EnvironmentPath(omega.seed(), omega.law_ptr(), compose(omega.offset(), h));
}

}  // namespace crds
