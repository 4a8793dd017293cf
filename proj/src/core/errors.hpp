#pragma once

#include <stdexcept>
#include <string>

namespace pyramid {

// Error taxonomy; the C API maps each type to a distinct status code.
struct ValueError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct DimensionError : ValueError {
    using ValueError::ValueError;
};

struct ConfigError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct CompatibilityError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SchemaError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct StateError : std::logic_error {
    using std::logic_error::logic_error;
};

struct FormatError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace pyramid
