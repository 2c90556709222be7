#pragma once

// Dense complex vector kernels with a portable scalar reference and an AVX2
// variant. The variant is chosen once at first use; GRIBOV_SIMD=scalar|avx2|auto
// overrides the CPU probe.

#include <complex>
#include <cstddef>

namespace gribov::simd {

using cplx = std::complex<double>;

struct KernelTable
{
    const char* name;

    /// sum_i conj(x_i) * y_i
    cplx (*dotc)(std::size_t n, const cplx* x, const cplx* y);
    /// sum_i x_i * y_i
    cplx (*dotu)(std::size_t n, const cplx* x, const cplx* y);
    double (*norm2_sq)(std::size_t n, const cplx* x);
    /// y += a * x
    void (*axpy)(std::size_t n, cplx a, const cplx* x, cplx* y);
    void (*scal)(std::size_t n, cplx a, cplx* x);
    /// x' = c x + s y,  y' = -conj(s) x + c y
    void (*rot)(std::size_t n, cplx* x, cplx* y, double c, cplx s);
    /// C = A * B for row-major A (m x k), B (k x n), C (m x n). C must not alias A or B.
    void (*gemm)(std::size_t m, std::size_t n, std::size_t k,
                 const cplx* a, std::size_t lda,
                 const cplx* b, std::size_t ldb,
                 cplx* c, std::size_t ldc);
};

const KernelTable& scalar_kernels();

/// nullptr when the variant was not compiled in or the CPU lacks AVX2/FMA.
const KernelTable* avx2_kernels();

/// The table used by the rest of the library.
const KernelTable& active();

} // namespace gribov::simd
