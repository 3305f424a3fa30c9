#include "loopscope/error.hpp"

#include <cstdio>

namespace loopscope {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::MalformedNumber: return "MalformedNumber";
    case Errc::SyntaxError: return "SyntaxError";
    case Errc::DuplicateElement: return "DuplicateElement";
    case Errc::UnknownElementPrefix: return "UnknownElementPrefix";
    case Errc::UnknownSubcircuit: return "UnknownSubcircuit";
    case Errc::RecursiveSubcircuit: return "RecursiveSubcircuit";
    case Errc::UnresolvedParam: return "UnresolvedParam";
    case Errc::InvalidValue: return "InvalidValue";
    case Errc::UnknownControlSource: return "UnknownControlSource";
    case Errc::NameCollision: return "NameCollision";
    case Errc::UnknownNode: return "UnknownNode";
    case Errc::SingularSystem: return "SingularSystem";
    case Errc::BadRange: return "BadRange";
    case Errc::GridTooShort: return "GridTooShort";
    case Errc::NonNegativeIndex: return "NonNegativeIndex";
    case Errc::MismatchedGrids: return "MismatchedGrids";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

namespace {

std::string with_line(const std::string& message, int line) {
  if (line <= 0) return message;
  return "line " + std::to_string(line) + ": " + message;
}

std::string singular_message(std::size_t pivot, const std::string& unknown,
                             std::optional<double> hz) {
  std::string msg = "singular MNA system at unknown " + std::to_string(pivot);
  if (!unknown.empty()) msg += " (" + unknown + ")";
  if (hz) {
    char buf[64];
    std::snprintf(buf, sizeof buf, " at %.6g Hz", *hz);
    msg += buf;
  }
  return msg;
}

}  // namespace

Error::Error(Errc code, const std::string& message, int line)
    : std::runtime_error(with_line(message, line)), code_(code), line_(line) {}

SingularSystemError::SingularSystemError(std::size_t pivot, std::string unknown,
                                         std::optional<double> frequency_hz)
    : Error(Errc::SingularSystem, singular_message(pivot, unknown, frequency_hz)),
      pivot_(pivot),
      unknown_(std::move(unknown)),
      frequency_hz_(frequency_hz) {}

SingularSystemError SingularSystemError::at_frequency(double hz) const {
  return SingularSystemError(pivot_, unknown_, hz);
}

}  // namespace loopscope
