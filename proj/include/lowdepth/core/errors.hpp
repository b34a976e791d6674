#pragma once

#include <stdexcept>
#include <string>

namespace lowdepth {

// Every failure raised by the library derives from Error. The CLI maps the
// concrete type onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid arguments or malformed input (exit code 2).
class UsageError : public Error {
 public:
  using Error::Error;
};

// A size cap or mathematical regime precondition was violated (exit code 3).
class CapError : public Error {
 public:
  using Error::Error;
};

class RegimeError : public CapError {
 public:
  using CapError::CapError;
};

// Numerical failure: non-unitary payloads, singular systems (exit code 4).
class NumericalError : public Error {
 public:
  using Error::Error;
};

inline int exit_code_for(const Error& e) {
  if (dynamic_cast<const UsageError*>(&e)) return 2;
  if (dynamic_cast<const CapError*>(&e)) return 3;
  if (dynamic_cast<const NumericalError*>(&e)) return 4;
  return 1;
}

namespace detail {

inline void require(bool ok, const std::string& what) {
  if (!ok) throw UsageError(what);
}

inline void require_cap(bool ok, const std::string& what) {
  if (!ok) throw CapError(what);
}

inline void require_regime(bool ok, const std::string& what) {
  if (!ok) throw RegimeError(what);
}

}  // namespace detail
}  // namespace lowdepth
