#pragma once

#include <stdexcept>
#include <string>

namespace rsac {

enum class ErrorKind {
  Config,          // malformed or inconsistent configuration
  Input,           // bad argument shape/content
  Range,           // value outside the documented domain
  Singular,        // division by a structurally zero quantity
  Timing,          // shutter timing parameters are mutually inconsistent
  Coverage,        // motion trace does not span the requested frames
  Margin,          // displacement exceeds the scene margin
  DegenerateScene, // reference image carries no usable gradient
  Underdetermined, // solver cannot identify a solution
  Mask,            // activity mask has no usable partition
  InvalidTarget,   // requested simulation target is unreachable
  Io,              // file system / format failure
};

class Error : public std::runtime_error {
public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& msg) {
  throw Error(kind, msg);
}

} // namespace rsac
