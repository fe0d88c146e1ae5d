#pragma once

#include <stdexcept>
#include <string>

namespace rrsim {

struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct CapacityViolation : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct InfeasibleInstance : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct NonIdentifiable : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct DataError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

}  // namespace rrsim
