#pragma once

#include <stdexcept>
#include <string>

namespace skipstop {

enum class ErrorKind {
  InvalidConfig,          // bad parameter values or inconsistent configuration
  Shape,                  // dimension mismatch between inputs
  Data,                   // malformed or inconsistent data
  NormalizationUndefined, // zero denominators in the objective
  InputMissing,           // a referenced file does not exist
  Constraint,             // a stop/skip pattern violates the operating rules
  Infeasible,             // the configuration admits no feasible evaluation
  Internal,               // broken internal invariant
};

const char* to_string(ErrorKind kind);

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

inline void require(bool cond, ErrorKind kind, const std::string& what) {
  if (!cond) throw Error(kind, what);
}

}  // namespace skipstop
