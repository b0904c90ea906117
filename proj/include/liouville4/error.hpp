#pragma once

#include <numbers>
#include <stdexcept>
#include <string>

namespace liouville4 {

/// Thrown when an argument violates an operation's precondition.
class DomainError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

/// Thrown when a numerical procedure cannot deliver a result (bad bracket,
/// integrator breakdown propagated to a caller that needs a full trajectory).
class NumericalError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

namespace detail {
inline void require(bool ok, const std::string& what) {
    if (!ok) throw DomainError(what);
}
}  // namespace detail

inline constexpr double pi = std::numbers::pi;

/// Area of the unit sphere S^3 in R^4.
inline constexpr double sphere_area = 2.0 * pi * pi;

/// Energy of the standard bubble ln(sqrt(96)/(sqrt(96)+r^2)).
inline constexpr double bubble_energy = 16.0 * pi * pi;

inline constexpr double sqrt96 = 9.797958971132712;  // sqrt(96)

}  // namespace liouville4
