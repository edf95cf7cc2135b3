#pragma once

#include <stdexcept>
#include <string>

namespace editgauge {

// Exit-code taxonomy used by the CLI: 1 usage, 2 data, 3 numerical.
struct UsageError : std::runtime_error {
  explicit UsageError(const std::string& what) : std::runtime_error(what) {}
};

struct DataError : std::runtime_error {
  explicit DataError(const std::string& what) : std::runtime_error(what) {}
};

struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace editgauge
