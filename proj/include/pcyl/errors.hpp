#pragma once

#include <stdexcept>
#include <string>

namespace pcyl {

// Argument outside the region where an operation is defined (|w| > rho,
// pole on a summation ray, zero first coordinate under the inversion).
class DomainError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// lambda^n == 1 within the small-divisor cutoff.
class SmallDivisorError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class NoConvergenceError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class IllConditionedError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Point is not (yet) known to lie in the parabolic basin.
class ClassificationError : public std::runtime_error {
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

}  // namespace pcyl
