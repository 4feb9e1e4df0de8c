#include "hetinf/error.hpp"

namespace hetinf {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::ChartMismatch: return "ChartMismatch";
        case Errc::NonPositiveY: return "NonPositiveY";
        case Errc::AtInfinity: return "AtInfinity";
        case Errc::Singular: return "Singular";
        case Errc::ComplexEigenvalues: return "ComplexEigenvalues";
        case Errc::NotSaddle: return "NotSaddle";
        case Errc::EigenvalueCollision: return "EigenvalueCollision";
        case Errc::StepUnderflow: return "StepUnderflow";
        case Errc::MaxSteps: return "MaxSteps";
        case Errc::NotEnoughCrossings: return "NotEnoughCrossings";
        case Errc::EndpointNotInSection: return "EndpointNotInSection";
        case Errc::MeshTooCoarse: return "MeshTooCoarse";
        case Errc::SingularJacobian: return "SingularJacobian";
        case Errc::NoZeroInRange: return "NoZeroInRange";
        case Errc::RootNotBracketed: return "RootNotBracketed";
        case Errc::NoRealStableMultiplier: return "NoRealStableMultiplier";
        case Errc::NegativePeriod: return "NegativePeriod";
        case Errc::IllPosedProblem: return "IllPosedProblem";
        case Errc::ConfigInvalid: return "ConfigInvalid";
        case Errc::IoError: return "IoError";
    }
    return "UnknownError";
}

}  // namespace hetinf
