#pragma once

#include <stdexcept>
#include <string>

namespace qclab {

/// Base for every precondition or contract failure raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class ParseError : public Error {
 public:
  using Error::Error;
};

/// Conditioning on an event of probability zero.
class ZeroMassError : public Error {
 public:
  using Error::Error;
};

/// split_by_value found no mass on one side of g.
class SplitError : public Error {
 public:
  explicit SplitError(int empty_side)
      : Error("distribution has no mass on g^-1(" + std::to_string(empty_side) + ")"),
        empty_side_(empty_side) {}
  int empty_side() const { return empty_side_; }

 private:
  int empty_side_;
};

/// A search, enumeration or state space exceeded its configured guard.
class BudgetExceeded : public Error {
 public:
  using Error::Error;
};

class NonConvergence : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

}  // namespace qclab
