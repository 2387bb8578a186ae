#pragma once

#include <stdexcept>
#include <string>

namespace fastreact {

enum class Errc {
  kCapacityExceeded,
  kAlreadyConfigured,
  kUnknownSwitch,
  kUnknownSensor,
  kUnknownNode,
  kInvalidRate,
  kInvalidArgument,
  kParseError,
  kValidationError,
  kOverflow,
  kIo,
};

const char *to_string(Errc code);

// Every failure raised by the core library carries one of the codes above so
// the C API can map it onto a status without string matching.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string &message);

  Errc code() const noexcept { return code_; }
  // The message without the code prefix.
  const std::string &detail() const noexcept { return detail_; }

 private:
  Errc code_;
  std::string detail_;
};

}  // namespace fastreact
