#pragma once

#include <stdexcept>
#include <string>

namespace jetvo {

// Base class for all library errors. Batch paths (per-feature work) never
// throw; they demote features via status flags instead.
struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};

struct OutOfBounds : Error {
    using Error::Error;
};
struct BadKernelSpec : Error {
    using Error::Error;
};
struct DegenerateTranslation : Error {
    using Error::Error;
};
struct DegenerateLine : Error {
    using Error::Error;
};
struct NotARotation : Error {
    using Error::Error;
};
struct ZeroVector : Error {
    using Error::Error;
};
struct IllConditioned : Error {
    using Error::Error;
};
struct EpipoleDegenerate : Error {
    using Error::Error;
};
struct TooFewFeatures : Error {
    using Error::Error;
};
struct SingularCovariance : Error {
    using Error::Error;
};
struct SingularPriorCovariance : SingularCovariance {
    using SingularCovariance::SingularCovariance;
};
struct InsufficientData : Error {
    using Error::Error;
};
struct NumericFailure : Error {
    using Error::Error;
};
struct BadSceneGeometry : Error {
    using Error::Error;
};
struct ParseError : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct DataError : Error {
    using Error::Error;
};

}  // namespace jetvo
