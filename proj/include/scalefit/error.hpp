#pragma once

#include <stdexcept>
#include <string>

namespace scalefit {

enum class ErrorKind {
  Domain,            // argument outside the mathematical domain
  InsufficientData,  // too few points or distinct abscissae
  DegenerateData,    // data cannot identify the model (e.g. flat losses)
  NotDecomposable,   // law has no constant term
  NoSolution,        // closed form has no solution for the given inputs
  Parse,             // malformed input file
  Invariant,         // well-formed input violating a record invariant
};

const char* to_string(ErrorKind kind) noexcept;

/// Every library failure is reported through this type; `kind()` lets the
/// CLI map failures onto exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace scalefit
