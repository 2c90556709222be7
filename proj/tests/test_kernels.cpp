#include "gribov/kernels.hpp"

#include "doctest.h"

#include <array>
#include <cmath>
#include <random>
#include <vector>

using gribov::simd::cplx;
using gribov::simd::KernelTable;

namespace {

std::vector<cplx> random_vec(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g;
    std::vector<cplx> v(n);
    for (auto& z : v)
        z = {g(rng), g(rng)};
    return v;
}

double max_diff(const std::vector<cplx>& a, const std::vector<cplx>& b)
{
    double m = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        m = std::max(m, std::abs(a[i] - b[i]));
    return m;
}

} // namespace

TEST_CASE("active table is one of the compiled variants")
{
    const KernelTable& act = gribov::simd::active();
    const KernelTable* fast = gribov::simd::avx2_kernels();
    CHECK((&act == &gribov::simd::scalar_kernels() || (fast && &act == fast)));
    MESSAGE("active kernels: " << act.name);
}

TEST_CASE("scalar reference kernels against naive loops")
{
    const KernelTable& s = gribov::simd::scalar_kernels();
    std::mt19937_64 rng(3);
    const std::size_t n = 37;
    auto x = random_vec(n, rng), y = random_vec(n, rng);
    cplx dc{}, du{};
    double nn = 0;
    for (std::size_t i = 0; i < n; ++i) {
        dc += std::conj(x[i]) * y[i];
        du += x[i] * y[i];
        nn += std::norm(x[i]);
    }
    CHECK(std::abs(s.dotc(n, x.data(), y.data()) - dc) < 1e-12);
    CHECK(std::abs(s.dotu(n, x.data(), y.data()) - du) < 1e-12);
    CHECK(std::abs(s.norm2_sq(n, x.data()) - nn) < 1e-12);

    // rotation is unitary: norms of the pair are preserved
    const double c = 0.6;
    const cplx sn = cplx(0.0, 0.8);
    auto xr = x, yr = y;
    s.rot(n, xr.data(), yr.data(), c, sn);
    CHECK(std::abs(s.norm2_sq(n, xr.data()) + s.norm2_sq(n, yr.data()) - nn -
                   s.norm2_sq(n, y.data())) < 1e-10);
}

TEST_CASE("avx2 kernels agree with the scalar reference")
{
    const KernelTable* fast = gribov::simd::avx2_kernels();
    if (!fast) {
        MESSAGE("AVX2 variant unavailable; skipped");
        return;
    }
    const KernelTable& s = gribov::simd::scalar_kernels();
    std::mt19937_64 rng(11);
    for (std::size_t n : {0u, 1u, 2u, 3u, 5u, 8u, 17u, 64u, 1001u}) {
        CAPTURE(n);
        auto x = random_vec(n, rng), y = random_vec(n, rng);
        const double tol = 1e-13 * (1.0 + static_cast<double>(n));
        CHECK(std::abs(fast->dotc(n, x.data(), y.data()) - s.dotc(n, x.data(), y.data())) < tol);
        CHECK(std::abs(fast->dotu(n, x.data(), y.data()) - s.dotu(n, x.data(), y.data())) < tol);
        CHECK(std::abs(fast->norm2_sq(n, x.data()) - s.norm2_sq(n, x.data())) < tol);

        const cplx a(0.3, -1.7);
        auto y1 = y, y2 = y;
        s.axpy(n, a, x.data(), y1.data());
        fast->axpy(n, a, x.data(), y2.data());
        CHECK(max_diff(y1, y2) < 1e-14);

        auto x1 = x, x2 = x;
        s.scal(n, a, x1.data());
        fast->scal(n, a, x2.data());
        CHECK(max_diff(x1, x2) < 1e-14);

        auto xa = x, ya = y, xb = x, yb = y;
        const double c = std::cos(0.4);
        const cplx sn = std::polar(std::sin(0.4), 1.1);
        s.rot(n, xa.data(), ya.data(), c, sn);
        fast->rot(n, xb.data(), yb.data(), c, sn);
        CHECK(max_diff(xa, xb) < 1e-14);
        CHECK(max_diff(ya, yb) < 1e-14);
    }

    using Shape = std::array<std::size_t, 3>;
    for (const Shape& shape : {Shape{1, 1, 1}, Shape{3, 5, 7}, Shape{8, 8, 8}, Shape{13, 9, 6},
                               Shape{33, 17, 41}}) {
        const auto [m, k, n] = shape;
        CAPTURE(m);
        CAPTURE(k);
        CAPTURE(n);
        auto a = random_vec(m * k, rng), b = random_vec(k * n, rng);
        std::vector<cplx> c1(m * n), c2(m * n, cplx(99.0, 99.0));
        s.gemm(m, n, k, a.data(), k, b.data(), n, c1.data(), n);
        fast->gemm(m, n, k, a.data(), k, b.data(), n, c2.data(), n);
        CHECK(max_diff(c1, c2) < 1e-12 * static_cast<double>(k));
    }
}
