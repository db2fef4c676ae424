#pragma once

#include <stdexcept>
#include <string>

namespace tap {

struct Error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ShapeMismatch : Error {
    using Error::Error;
};
struct LengthMismatch : Error {
    using Error::Error;
};
struct NonMonotonicStep : Error {
    using Error::Error;
};
struct InsufficientSnapshots : Error {
    using Error::Error;
};
struct OutOfRange : Error {
    using Error::Error;
};
struct IndexOutOfRange : Error {
    using Error::Error;
};
struct InvalidConfig : Error {
    using Error::Error;
};
struct InvalidSchedule : Error {
    using Error::Error;
};
struct SingularSystem : Error {
    using Error::Error;
};
struct NoActivePredictor : Error {
    using Error::Error;
};
struct ConfigMismatch : Error {
    using Error::Error;
};
struct NotATapTrace : Error {
    using Error::Error;
};
struct ZeroPeak : Error {
    using Error::Error;
};
struct UnknownAxis : Error {
    using Error::Error;
};

// Configuration-file / CLI problems map to process exit code 2,
// everything else above maps to exit code 3.
struct ConfigError : Error {
    using Error::Error;
};
struct IoError : Error {
    using Error::Error;
};

}  // namespace tap
