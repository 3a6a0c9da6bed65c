// Error types shared across the scatrel library.
#pragma once

#include <stdexcept>
#include <string>

namespace scatrel {

// Bad input to an operation (non-finite point, wrong dimension, ...).
class DomainError : public std::invalid_argument {
public:
  explicit DomainError(const std::string& what) : std::invalid_argument(what) {}
};

// The adaptive integrator could not finish (step underflow, drift blowup).
class IntegrationError : public std::runtime_error {
public:
  explicit IntegrationError(const std::string& what) : std::runtime_error(what) {}
};

// Asymptotic data requested for a trajectory that does not escape.
class NoAsymptoticsError : public std::runtime_error {
public:
  explicit NoAsymptoticsError(const std::string& what) : std::runtime_error(what) {}
};

// Phase-space point outside the configured incoming/outgoing region,
// or no characteristic with the required asymptotics was found.
class RegionError : public std::runtime_error {
public:
  explicit RegionError(const std::string& what) : std::runtime_error(what) {}
};

// A caustic sits exactly at an endpoint where a Jacobian must not vanish.
class DegenerateEndpointError : public std::runtime_error {
public:
  explicit DegenerateEndpointError(const std::string& what) : std::runtime_error(what) {}
};

// A relation patch contains too many trapped/undecided points.
class PatchError : public std::runtime_error {
public:
  explicit PatchError(const std::string& what) : std::runtime_error(what) {}
};

// Configuration file problems, reported with field context.
class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

} // namespace scatrel
