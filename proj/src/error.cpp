#include "fastreact/error.hpp"

namespace fastreact {

const char *to_string(Errc code) {
  switch (code) {
    case Errc::kCapacityExceeded: return "capacity exceeded";
    case Errc::kAlreadyConfigured: return "already configured";
    case Errc::kUnknownSwitch: return "unknown switch";
    case Errc::kUnknownSensor: return "unknown sensor";
    case Errc::kUnknownNode: return "unknown node";
    case Errc::kInvalidRate: return "invalid rate";
    case Errc::kInvalidArgument: return "invalid argument";
    case Errc::kParseError: return "parse error";
    case Errc::kValidationError: return "validation error";
    case Errc::kOverflow: return "arithmetic overflow";
    case Errc::kIo: return "i/o error";
  }
  return "unknown error";
}

Error::Error(Errc code, const std::string &message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message),
      code_(code),
      detail_(message) {}

}  // namespace fastreact
