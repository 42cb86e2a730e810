#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "y00/bits.hpp"

namespace y00 {

/// Base for every error raised by the library. The CLI maps subclasses to exit codes.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class LengthError : public Error { public: using Error::Error; };
class RangeError : public Error { public: using Error::Error; };
class ShapeError : public Error { public: using Error::Error; };
class TooLarge : public Error { public: using Error::Error; };
class DegenerateKey : public Error { public: using Error::Error; };
class UnreachableCiphertext : public Error { public: using Error::Error; };
class InconsistentObservation : public Error { public: using Error::Error; };
class NumericalError : public Error { public: using Error::Error; };
class DegenerateMeasurement : public Error { public: using Error::Error; };
class DegenerateModel : public Error { public: using Error::Error; };
class ConfigError : public Error { public: using Error::Error; };

/// Raised when a known-plaintext window is consistent with more than one key.
class AmbiguousKey : public Error {
public:
    AmbiguousKey(const std::string& what, std::vector<BitString> candidates)
        : Error(what), candidates_(std::move(candidates)) {}

    const std::vector<BitString>& candidates() const noexcept { return candidates_; }

private:
    std::vector<BitString> candidates_;
};

}  // namespace y00
