#ifndef HETINF_ERROR_HPP
#define HETINF_ERROR_HPP

#include <stdexcept>
#include <string>

namespace hetinf {

/// Every failure mode the library reports deliberately.  The CLI prints the
/// category name so scripted callers can dispatch on it without parsing prose.
enum class Errc {
    ChartMismatch,
    NonPositiveY,
    AtInfinity,
    Singular,
    ComplexEigenvalues,
    NotSaddle,
    EigenvalueCollision,
    StepUnderflow,
    MaxSteps,
    NotEnoughCrossings,
    EndpointNotInSection,
    MeshTooCoarse,
    SingularJacobian,
    NoZeroInRange,
    RootNotBracketed,
    NoRealStableMultiplier,
    NegativePeriod,
    IllPosedProblem,
    ConfigInvalid,
    IoError,
};

const char* errc_name(Errc c);

class Error : public std::runtime_error {
  public:
    Error(Errc code, const std::string& what)
        : std::runtime_error(std::string(errc_name(code)) + ": " + what),
          code_(code) {}

    Errc code() const { return code_; }

  private:
    Errc code_;
};

}  // namespace hetinf

#endif
