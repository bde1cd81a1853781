#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace qrecover {

enum class Errc {
  OutOfRange,
  NonConvergence,
  NotPSD,
  NotHermitian,
  NotNormalized,
  Infeasible,
  ZeroStrength,
  DegenerateBranch,
  DegenerateTotal,
  EmptyGrid,
  EmptyInput,
  InvalidArgument,
  Parse,
  Io,
};

constexpr std::string_view to_string(Errc code) {
  switch (code) {
    case Errc::OutOfRange: return "OutOfRange";
    case Errc::NonConvergence: return "NonConvergence";
    case Errc::NotPSD: return "NotPSD";
    case Errc::NotHermitian: return "NotHermitian";
    case Errc::NotNormalized: return "NotNormalized";
    case Errc::Infeasible: return "Infeasible";
    case Errc::ZeroStrength: return "ZeroStrength";
    case Errc::DegenerateBranch: return "DegenerateBranch";
    case Errc::DegenerateTotal: return "DegenerateTotal";
    case Errc::EmptyGrid: return "EmptyGrid";
    case Errc::EmptyInput: return "EmptyInput";
    case Errc::InvalidArgument: return "InvalidArgument";
    case Errc::Parse: return "Parse";
    case Errc::Io: return "Io";
  }
  return "Unknown";
}

// Every failure in the library is reported through this type; code() lets
// callers (the CLI in particular) branch on the category.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

}  // namespace qrecover
