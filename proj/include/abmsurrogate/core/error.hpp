#pragma once

#include <stdexcept>
#include <string>

namespace abmsurrogate {

/// Malformed input, dimension mismatch or an out-of-range argument.
class DataError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// A numerical procedure failed (non-PD kernel, non-finite loss, ...).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// An operation was invoked in the wrong order, e.g. stepping past the final year.
class SequencingError : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

inline void require(bool condition, const std::string& message) {
    if (!condition) throw DataError(message);
}

}  // namespace abmsurrogate
