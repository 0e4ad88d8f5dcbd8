#pragma once

#include <stdexcept>
#include <string>

namespace distfield {

// Base for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

#define DISTFIELD_ERROR(Name)                                   \
    struct Name : Error {                                       \
        explicit Name(const std::string& m) : Error(#Name ": " + m) {} \
    }

DISTFIELD_ERROR(DimensionMismatch);
DISTFIELD_ERROR(DegenerateConfiguration);
DISTFIELD_ERROR(SingularSystem);
DISTFIELD_ERROR(EmptyMask);
DISTFIELD_ERROR(DegenerateImage);
DISTFIELD_ERROR(NonSquareInput);
DISTFIELD_ERROR(ShapeMismatch);
DISTFIELD_ERROR(NonFiniteActivation);
DISTFIELD_ERROR(NonFiniteGradient);
DISTFIELD_ERROR(GridTooSmall);
DISTFIELD_ERROR(GridMismatch);
DISTFIELD_ERROR(InsufficientSamples);
DISTFIELD_ERROR(TooManyCoefficients);
DISTFIELD_ERROR(BadEdges);
DISTFIELD_ERROR(DivergenceDetected);
DISTFIELD_ERROR(ModelConfigMismatch);
DISTFIELD_ERROR(IoError);

#undef DISTFIELD_ERROR

}  // namespace distfield
