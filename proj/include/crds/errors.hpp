#pragma once

#include <stdexcept>
#include <string>

namespace crds {

/// Invalid experiment configuration or operation input. The message names
/// the offending field.
class ConfigError : public std::invalid_argument {
 public:
  explicit ConfigError(const std::string& what) : std::invalid_argument(what) {}
};

/// A group element outside the declared domain of a cocycle (for example a
/// negative power of a non-invertible map).
class DomainError : public std::domain_error {
 public:
  explicit DomainError(const std::string& what) : std::domain_error(what) {}
};

/// A computation refused because it would exceed a configured size cap
/// (exact-solver cap, fiber enumeration cap).
class ResourceCapError : public std::runtime_error {
 public:
  explicit ResourceCapError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace crds
