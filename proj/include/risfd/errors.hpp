#ifndef RISFD_ERRORS_HPP
#define RISFD_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace risfd {

/// Base class for all errors raised by this library.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string& what) : std::runtime_error(what) {}
};

/// A value is outside its mathematical domain (non-positive distance,
/// negative Rician factor, non-positive noise power, ...).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// Vector/matrix dimensions are mutually inconsistent.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// A computation produced non-finite values or an iterative method
/// could not be completed (bracket failure, divergence).
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Invalid configuration: bad layer topology, unknown config key,
/// malformed grids.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The effective channel is (numerically) zero, so a beamforming
/// direction is undefined. Callers usually fall back to w = 0.
class DegenerateChannelError : public Error {
 public:
  using Error::Error;
};

/// File input/output failure (checkpoints, CSV, config files).
class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace risfd

#endif  // RISFD_ERRORS_HPP
