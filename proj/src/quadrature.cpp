#include "gribov/quadrature.hpp"

#include "gribov/errors.hpp"

#include <cmath>
#include <numbers>

namespace gribov::quad {

Rule gauss_legendre(std::size_t q)
{
    if (q == 0)
        throw InvalidArgument("gauss_legendre: need at least one node");
    Rule r;
    r.nodes.resize(q);
    r.weights.resize(q);
    const double n = static_cast<double>(q);
    for (std::size_t i = 0; i < (q + 1) / 2; ++i) {
        // Tricomi initial guess, then Newton on P_q
        double x = std::cos(std::numbers::pi * (static_cast<double>(i) + 0.75) / (n + 0.5));
        double dp = 0.0;
        for (int it = 0; it < 100; ++it) {
            double p0 = 1.0, p1 = x;
            for (std::size_t k = 2; k <= q; ++k) {
                const double kk = static_cast<double>(k);
                const double p2 = ((2.0 * kk - 1.0) * x * p1 - (kk - 1.0) * p0) / kk;
                p0 = p1;
                p1 = p2;
            }
            dp = n * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / dp;
            x -= dx;
            if (std::abs(dx) <= 1e-16)
                break;
        }
        const double w = 2.0 / ((1.0 - x * x) * dp * dp);
        r.nodes[i] = -x;
        r.nodes[q - 1 - i] = x;
        r.weights[i] = w;
        r.weights[q - 1 - i] = w;
    }
    if (q % 2 == 1)
        r.nodes[q / 2] = 0.0;
    return r;
}

Rule gauss_legendre(std::size_t q, double a, double b)
{
    Rule r = gauss_legendre(q);
    const double half = 0.5 * (b - a), mid = 0.5 * (a + b);
    for (std::size_t i = 0; i < q; ++i) {
        r.nodes[i] = mid + half * r.nodes[i];
        r.weights[i] *= half;
    }
    return r;
}

} // namespace gribov::quad
