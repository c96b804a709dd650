#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace fmlat {

/// Input violates an operation's precondition (bad shape, odd lattice where an
/// even one is required, definite lattice passed to an indefinite-only check).
class PreconditionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Malformed lattice expression. `position()` is the 0-based offset of the
/// offending character in the input text.
class ParseError : public PreconditionError {
 public:
  ParseError(const std::string& message, std::size_t position)
      : PreconditionError(message + " at position " + std::to_string(position)),
        position_(position) {}

  std::size_t position() const { return position_; }

 private:
  std::size_t position_;
};

/// An exact integer computation left the 64-bit range. Never wrapped.
class OverflowError : public std::overflow_error {
 public:
  using std::overflow_error::overflow_error;
};

/// A brute-force search hit its configured cap; the question is undecided,
/// not answered negatively.
class CapExceededError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// The requested lattice class is outside what the algorithms support
/// (e.g. isometry groups of indefinite lattices of rank >= 3).
class UnsupportedError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

}  // namespace fmlat
