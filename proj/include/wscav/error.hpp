#pragma once

#include <stdexcept>
#include <string>

namespace wscav {

/// Invalid input or configuration. CLI maps this to exit code 2.
class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// A numerical routine failed to converge or left its validity range.
/// CLI maps this to exit code 3.
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace wscav
