#pragma once

#include <stdexcept>
#include <string>

namespace svint {

// Base class for everything thrown by the library.
struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct NonSkewInput : Error { using Error::Error; };
struct OutOfDomain : Error { using Error::Error; };
struct IndexOutOfRange : Error { using Error::Error; };
struct NewtonDivergence : Error { using Error::Error; };
struct RankDeficientConstraint : Error { using Error::Error; };
struct Blowup : Error { using Error::Error; };
struct InvalidTemperature : Error { using Error::Error; };
struct SymmetryNotDeclared : Error { using Error::Error; };
struct UnknownModel : Error { using Error::Error; };
struct UnknownIntegrator : Error { using Error::Error; };
struct ConfigError : Error { using Error::Error; };

} // namespace svint
