#pragma once

#include <stdexcept>
#include <string>

namespace pricesim {

/// Base class for all library errors.
struct Error : std::runtime_error {
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

struct InvalidDimension : Error {
    using Error::Error;
};
struct InvalidRadius : Error {
    using Error::Error;
};
/// The ellipsoid is numerically flat along the requested direction.
struct DegenerateDirection : Error {
    using Error::Error;
};
struct InvalidCutPosition : Error {
    using Error::Error;
};
struct NumericalFailure : Error {
    using Error::Error;
};
struct ConfigError : Error {
    using Error::Error;
};
struct FeatureNormError : Error {
    using Error::Error;
};
/// A decision was replayed against a state or query it was not produced from.
struct ProtocolError : Error {
    using Error::Error;
};
struct DomainError : Error {
    using Error::Error;
};
struct IngestError : Error {
    using Error::Error;
};
struct EmptyRun : Error {
    using Error::Error;
};

} // namespace pricesim
