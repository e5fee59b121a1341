#pragma once

#include <stdexcept>
#include <string>

namespace sfi {

struct InvalidInput : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NumericFailure : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ConversionFailure : NumericFailure {
    using NumericFailure::NumericFailure;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

} // namespace sfi
