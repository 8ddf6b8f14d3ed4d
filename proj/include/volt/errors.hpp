#ifndef VOLT_ERRORS_HPP
#define VOLT_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace volt {

// Combinatorial guard tripped (penalty expansion / explicit feature builds).
struct GuardExceededError : std::runtime_error {
  explicit GuardExceededError(const std::string& msg) : std::runtime_error(msg) {}
};

// SPD factorization failed even after jitter escalation.
struct IllConditionedError : std::runtime_error {
  explicit IllConditionedError(const std::string& msg) : std::runtime_error(msg) {}
};

// Malformed or missing input data; message carries file/line context.
struct DataFormatError : std::runtime_error {
  explicit DataFormatError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace volt

#endif  // VOLT_ERRORS_HPP
