#include "gribov/errors.hpp"
#include "gribov/quadrature.hpp"

#include "doctest.h"

#include <cmath>

using gribov::quad::gauss_legendre;

TEST_CASE("gauss-legendre integrates polynomials of degree 2q-1 exactly")
{
    for (std::size_t q : {1u, 2u, 3u, 4u, 7u, 8u, 16u, 33u}) {
        CAPTURE(q);
        const auto r = gauss_legendre(q);
        double wsum = 0.0;
        for (double w : r.weights)
            wsum += w;
        CHECK(wsum == doctest::Approx(2.0).epsilon(1e-14));
        for (std::size_t d = 0; d < 2 * q; ++d) {
            double s = 0.0;
            for (std::size_t i = 0; i < q; ++i)
                s += r.weights[i] * std::pow(r.nodes[i], static_cast<double>(d));
            const double exact = (d % 2 == 1) ? 0.0 : 2.0 / static_cast<double>(d + 1);
            CHECK(std::abs(s - exact) < 1e-14);
        }
        for (std::size_t i = 1; i < q; ++i)
            CHECK(r.nodes[i] > r.nodes[i - 1]);
    }
}

TEST_CASE("mapped rule integrates an exponential")
{
    const auto r = gauss_legendre(12, 0.0, 2.0);
    double s = 0.0;
    for (std::size_t i = 0; i < 12; ++i)
        s += r.weights[i] * std::exp(-3.0 * r.nodes[i]);
    CHECK(std::abs(s - (1.0 - std::exp(-6.0)) / 3.0) < 1e-14);
    CHECK_THROWS_AS(gauss_legendre(0), gribov::InvalidArgument);
}
