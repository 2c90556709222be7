#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace gribov {

/// Input violates a documented precondition (bad size, out-of-range parameter, ...).
class InvalidArgument : public std::invalid_argument
{
public:
    using std::invalid_argument::invalid_argument;
};

/// A spectral parameter sits too close to a pole of the unperturbed resolvent.
class PoleProximityError : public InvalidArgument
{
public:
    using InvalidArgument::InvalidArgument;
};

/// An iterative procedure hit its iteration cap or failed its self-consistency check.
class ConvergenceError : public std::runtime_error
{
public:
    ConvergenceError(const std::string& what, std::size_t iterations)
        : std::runtime_error(what + " (after " + std::to_string(iterations) + " iterations)"),
          iterations_(iterations)
    {}

    std::size_t iterations() const noexcept { return iterations_; }

private:
    std::size_t iterations_;
};

} // namespace gribov
