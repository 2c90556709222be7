#pragma once

#include <cstddef>
#include <vector>

namespace gribov::quad {

struct Rule
{
    std::vector<double> nodes;
    std::vector<double> weights;
};

/// Gauss–Legendre rule with q points on [-1, 1]; Newton iteration on P_q.
/// Throws InvalidArgument for q == 0.
Rule gauss_legendre(std::size_t q);

/// The same rule mapped affinely to [a, b].
Rule gauss_legendre(std::size_t q, double a, double b);

} // namespace gribov::quad
