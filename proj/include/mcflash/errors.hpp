#pragma once

#include <stdexcept>
#include <string>

namespace mcflash {

// Address or register value outside the representable range.
class RangeError : public std::out_of_range {
public:
    using std::out_of_range::out_of_range;
};

// Command issued in a state that forbids it (reprogram, unprogrammed execute).
class StateError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class CapacityError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class CalibrationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

}  // namespace mcflash
