#pragma once

#include <array>
#include <compare>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace crds {

/// Element of the acting group Z^d (d = 1 or 2). The group law is
/// coordinate-wise addition.
class GroupElement {
 public:
  GroupElement() = default;
  explicit GroupElement(std::int64_t t) : dim_(1), c_{t, 0} {}
  GroupElement(std::int64_t a, std::int64_t b) : dim_(2), c_{a, b} {}

  static GroupElement identity(int dim);

  int dimension() const { return dim_; }
  std::int64_t operator[](int i) const { return c_[static_cast<std::size_t>(i)]; }
  bool is_identity() const { return c_[0] == 0 && c_[1] == 0; }
  GroupElement inverse() const;
  std::string to_string() const;

  // Same-dimension elements order lexicographically on coordinates.
  friend auto operator<=>(const GroupElement&, const GroupElement&) = default;

 private:
  int dim_ = 1;
  std::array<std::int64_t, 2> c_{0, 0};
};

/// g ∘ h. Throws std::invalid_argument on a dimension mismatch.
GroupElement compose(const GroupElement& g, const GroupElement& h);

enum class WindowKind { box, custom };

/// Finite nonempty subset of Z^d, kept sorted lexicographically and free of
/// duplicates so that every iteration over it is deterministic.
class FolnerWindow {
 public:
  /// [0, n)^d.
  static FolnerWindow box(int dim, std::int64_t n);
  /// Arbitrary window; elements are sorted and deduplicated.
  static FolnerWindow from_elements(std::vector<GroupElement> elements);
  static FolnerWindow singleton(const GroupElement& g) { return from_elements({g}); }

  std::span<const GroupElement> elements() const { return elements_; }
  const GroupElement& operator[](std::size_t i) const { return elements_[i]; }
  std::size_t size() const { return elements_.size(); }
  int dimension() const { return elements_.front().dimension(); }
  /// n for box windows; |F| for custom windows.
  std::int64_t index() const { return index_; }
  WindowKind kind() const { return kind_; }

  bool contains(const GroupElement& g) const;
  bool is_subset_of(const FolnerWindow& other) const;
  /// gF = { g ∘ f : f ∈ F }.
  FolnerWindow translated(const GroupElement& g) const;

  friend bool operator==(const FolnerWindow& a, const FolnerWindow& b) {
    return a.elements_ == b.elements_;
  }

 private:
  FolnerWindow(std::vector<GroupElement> elements, std::int64_t index, WindowKind kind)
      : elements_(std::move(elements)), index_(index), kind_(kind) {}

  std::vector<GroupElement> elements_;
  std::int64_t index_ = 1;
  WindowKind kind_ = WindowKind::custom;
};

/// Nonnegative rational number num/den in lowest terms.
struct Fraction {
  std::int64_t num = 0;
  std::int64_t den = 1;
  double value() const { return static_cast<double>(num) / static_cast<double>(den); }
  friend bool operator==(const Fraction&, const Fraction&) = default;
};

/// |gF Δ F| / |F| by exact set enumeration.
Fraction folner_defect(const FolnerWindow& window, const GroupElement& g);

}  // namespace crds
