#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>

namespace skewflow {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class InvalidInput : public Error {
 public:
  using Error::Error;
};

class DegreeOverflow : public Error {
 public:
  using Error::Error;
};

class UnsupportedCase : public Error {
 public:
  using Error::Error;
};

class InvalidFrame : public Error {
 public:
  using Error::Error;
};

class NotTangent : public Error {
 public:
  using Error::Error;
};

class NotNormal : public Error {
 public:
  using Error::Error;
};

class BlowUp : public Error {
 public:
  using Error::Error;
};

/// Raised when the tangent vectors at a node are (numerically) dependent.
/// Carries the offending node and, when raised during time stepping, the time.
class DegenerateImmersion : public Error {
 public:
  DegenerateImmersion(std::size_t node, const std::string& what,
                      std::optional<double> time = std::nullopt)
      : Error(format(node, what, time)), node_(node), what_(what), time_(time) {}

  std::size_t node() const { return node_; }
  std::optional<double> time() const { return time_; }

  DegenerateImmersion at_time(double t) const { return {node_, what_, t}; }

 private:
  static std::string format(std::size_t node, const std::string& what,
                            std::optional<double> time) {
    std::string msg = "degenerate immersion at node " + std::to_string(node);
    if (time) msg += " (t=" + std::to_string(*time) + ")";
    return msg + ": " + what;
  }

  std::size_t node_;
  std::string what_;
  std::optional<double> time_;
};

}  // namespace skewflow
