#include "crds/group.hpp"

#include <algorithm>
#include <iterator>
#include <numeric>
#include <stdexcept>

namespace crds {

GroupElement GroupElement::identity(int dim) {
  if (dim == 1) return GroupElement(0);
  if (dim == 2) return GroupElement(0, 0);
  throw std::invalid_argument("group dimension must be 1 or 2, got " + std::to_string(dim));
}

GroupElement GroupElement::inverse() const {
  return dim_ == 1 ? GroupElement(-c_[0]) : GroupElement(-c_[0], -c_[1]);
}

std::string GroupElement::to_string() const {
  if (dim_ == 1) return "(" + std::to_string(c_[0]) + ")";
  return "(" + std::to_string(c_[0]) + "," + std::to_string(c_[1]) + ")";
}

GroupElement compose(const GroupElement& g, const GroupElement& h) {
  if (g.dimension() != h.dimension()) {
    throw std::invalid_argument("compose: dimension mismatch " + g.to_string() + " vs " +
                                h.to_string());
  }
  return g.dimension() == 1 ? GroupElement(g[0] + h[0]) : GroupElement(g[0] + h[0], g[1] + h[1]);
}

FolnerWindow FolnerWindow::box(int dim, std::int64_t n) {
  if (n < 1) throw std::invalid_argument("folner_box: n must be >= 1, got " + std::to_string(n));
  std::vector<GroupElement> elems;
  if (dim == 1) {
    elems.reserve(static_cast<std::size_t>(n));
    for (std::int64_t i = 0; i < n; ++i) elems.emplace_back(i);
  } else if (dim == 2) {
    elems.reserve(static_cast<std::size_t>(n * n));
    for (std::int64_t i = 0; i < n; ++i)
      for (std::int64_t j = 0; j < n; ++j) elems.emplace_back(i, j);
  } else {
    throw std::invalid_argument("folner_box: dimension must be 1 or 2, got " + std::to_string(dim));
  }
  return FolnerWindow(std::move(elems), n, WindowKind::box);
}

FolnerWindow FolnerWindow::from_elements(std::vector<GroupElement> elements) {
  if (elements.empty()) throw std::invalid_argument("window must be nonempty");
  const int dim = elements.front().dimension();
  for (const auto& g : elements) {
    if (g.dimension() != dim) throw std::invalid_argument("window elements of mixed dimension");
  }
  std::sort(elements.begin(), elements.end());
  elements.erase(std::unique(elements.begin(), elements.end()), elements.end());
  const auto size = static_cast<std::int64_t>(elements.size());
  return FolnerWindow(std::move(elements), size, WindowKind::custom);
}

bool FolnerWindow::contains(const GroupElement& g) const {
  return std::binary_search(elements_.begin(), elements_.end(), g);
}

bool FolnerWindow::is_subset_of(const FolnerWindow& other) const {
  return std::includes(other.elements_.begin(), other.elements_.end(), elements_.begin(),
                       elements_.end());
}

FolnerWindow FolnerWindow::translated(const GroupElement& g) const {
  std::vector<GroupElement> moved;
  moved.reserve(elements_.size());
  for (const auto& f : elements_) moved.push_back(compose(g, f));
  // Translation preserves lexicographic order in an abelian group.
  return FolnerWindow(std::move(moved), index_, WindowKind::custom);
}

Fraction folner_defect(const FolnerWindow& window, const GroupElement& g) {
  const FolnerWindow shifted = window.translated(g);
  std::vector<GroupElement> diff;
  std::set_symmetric_difference(shifted.elements().begin(), shifted.elements().end(),
                                window.elements().begin(), window.elements().end(),
                                std::back_inserter(diff));
  auto num = static_cast<std::int64_t>(diff.size());
  auto den = static_cast<std::int64_t>(window.size());
  const std::int64_t d = std::gcd(num, den);
  return Fraction{num / d, den / d};
}

}  // namespace crds
