#pragma once

#include <stdexcept>
#include <string>

namespace clustersync {

class Error : public std::runtime_error {
public:
    enum class Code {
        BadPartition,
        NonZeroRowSum,
        NonPositiveDefiniteC,
        ClassA1Violation,
        ClassA2Violation,
        OutOfRange,
        UnknownActivation,
        OutOfCoverage,
        MisalignedImpulse,
        RhoTooLarge,
        SingularE,
        NoPreviousPass,
        ParseError,
        ValidationError,
        IoError,
        BadArgument,
    };

    Error(Code code, std::string message)
        : std::runtime_error(std::move(message)), code_(code) {}

    Code code() const noexcept { return code_; }

private:
    Code code_;
};

}  // namespace clustersync
