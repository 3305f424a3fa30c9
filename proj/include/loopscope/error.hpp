#pragma once

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace loopscope {

enum class Errc {
  MalformedNumber,
  SyntaxError,
  DuplicateElement,
  UnknownElementPrefix,
  UnknownSubcircuit,
  RecursiveSubcircuit,
  UnresolvedParam,
  InvalidValue,
  UnknownControlSource,
  NameCollision,
  UnknownNode,
  SingularSystem,
  BadRange,
  GridTooShort,
  NonNegativeIndex,
  MismatchedGrids,
  Io,
};

std::string_view errc_name(Errc code);

// Single exception type for the library; `line` is set for netlist
// diagnostics (1-based physical line of the offending statement).
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message, int line = 0);

  Errc code() const noexcept { return code_; }
  int line() const noexcept { return line_; }

 private:
  Errc code_;
  int line_;
};

class SingularSystemError : public Error {
 public:
  SingularSystemError(std::size_t pivot, std::string unknown,
                      std::optional<double> frequency_hz = std::nullopt);

  std::size_t pivot() const noexcept { return pivot_; }
  const std::string& unknown() const noexcept { return unknown_; }
  std::optional<double> frequency_hz() const noexcept { return frequency_hz_; }

  SingularSystemError at_frequency(double hz) const;

 private:
  std::size_t pivot_;
  std::string unknown_;
  std::optional<double> frequency_hz_;
};

}  // namespace loopscope
