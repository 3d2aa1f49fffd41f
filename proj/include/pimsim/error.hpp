#pragma once

#include <stdexcept>
#include <string>

namespace pimsim {

/// Base class for every domain error raised by the toolchain.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// One failed check reported by a validator. `where` is a field path for
/// configs and a `core N, inst M` style locator for programs.
struct Violation {
  enum class Kind {
    Structural,  // would fault or is malformed
    Protocol,    // transfer pairing or ordering; surfaces as a deadlock at run time
  };

  std::string where;
  std::string message;
  Kind kind = Kind::Structural;

  std::string str() const { return where.empty() ? message : where + ": " + message; }
};

}  // namespace pimsim
