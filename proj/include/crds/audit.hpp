#pragma once

#include <cstdint>
#include <memory>
#include <ostream>
#include <string>
#include <vector>

#include "crds/models.hpp"

namespace crds {

struct CheckResult {
  /// Property name, e.g. "cocycle_audit".
  std::string name;
  /// System label, or "-" for system-independent checks.
  std::string subject;
  bool passed = true;
  std::string detail;
};

struct AuditReport {
  std::vector<CheckResult> checks;

  bool passed() const;
  /// First failing check, or nullptr.
  const CheckResult* first_failure() const;
  /// One line per check followed by a PASS/FAIL summary line.
  void write(std::ostream& out) const;
};

/// Systems audited by default: every registry system at a size whose fibers
/// can be enumerated.
std::vector<std::shared_ptr<const ModelSystem>> audit_systems();

/// Runs the invariant suites: group axioms and Følner convergence, shift
/// equivariance, then per system identity, cocycle law, metric axioms,
/// Bowen monotonicity and measure invariance, then the separated-set and
/// partition-entropy inequalities. Deterministic in `seed`.
AuditReport run_audit(const std::vector<std::shared_ptr<const ModelSystem>>& systems, std::uint64_t seed);

}  // namespace crds
