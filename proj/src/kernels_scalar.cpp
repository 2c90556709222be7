#include "gribov/kernels.hpp"

#include <algorithm>

namespace gribov::simd {
namespace {

cplx dotc_scalar(std::size_t n, const cplx* x, const cplx* y)
{
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

cplx dotu_scalar(std::size_t n, const cplx* x, const cplx* y)
{
    double re = 0.0;
    double im = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        re += x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
    }
    return {re, im};
}

double norm2_sq_scalar(std::size_t n, const cplx* x)
{
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        acc += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return acc;
}

void axpy_scalar(std::size_t n, cplx a, const cplx* x, cplx* y)
{
    for (std::size_t i = 0; i < n; ++i)
        y[i] += a * x[i];
}

void scal_scalar(std::size_t n, cplx a, cplx* x)
{
    for (std::size_t i = 0; i < n; ++i)
        x[i] *= a;
}

void rot_scalar(std::size_t n, cplx* x, cplx* y, double c, cplx s)
{
    const cplx sc = -std::conj(s);
    for (std::size_t i = 0; i < n; ++i) {
        const cplx xi = x[i];
        const cplx yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = sc * xi + c * yi;
    }
}

void gemm_scalar(std::size_t m, std::size_t n, std::size_t k,
                 const cplx* a, std::size_t lda,
                 const cplx* b, std::size_t ldb,
                 cplx* c, std::size_t ldc)
{
    for (std::size_t i = 0; i < m; ++i) {
        cplx* ci = c + i * ldc;
        std::fill(ci, ci + n, cplx{});
        const cplx* ai = a + i * lda;
        for (std::size_t p = 0; p < k; ++p) {
            const cplx aip = ai[p];
            if (aip == cplx{})
                continue;
            axpy_scalar(n, aip, b + p * ldb, ci);
        }
    }
}

} // namespace

const KernelTable& scalar_kernels()
{
    static const KernelTable table{
        "scalar",
        dotc_scalar,
        dotu_scalar,
        norm2_sq_scalar,
        axpy_scalar,
        scal_scalar,
        rot_scalar,
        gemm_scalar,
    };
    return table;
}

} // namespace gribov::simd
