#pragma once

#include <stdexcept>
#include <string>

namespace pilotwave {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A WaveFunctionSpec (or something parsed into one) violates its invariants.
class InvalidSpec : public Error {
 public:
  using Error::Error;
};

/// Eigenstate order above the supported recurrence guard.
class UnsupportedOrder : public Error {
 public:
  explicit UnsupportedOrder(int order);
  int order() const { return order_; }

 private:
  int order_;
};

/// The velocity field was requested where |psi|^2 is below the node guard.
class NodeProximity : public Error {
 public:
  NodeProximity(double q1, double q2, double t, double density);
  double q1() const { return q1_; }
  double q2() const { return q2_; }
  double t() const { return t_; }
  double density() const { return density_; }

 private:
  double q1_, q2_, t_, density_;
};

/// Bad argument to an operation (wrong shapes, out-of-range parameters).
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Malformed input file or text.
class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace pilotwave
