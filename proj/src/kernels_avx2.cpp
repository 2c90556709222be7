// Compiled with -mavx2 -mfma on x86-64 (see src/CMakeLists.txt). Nothing in this
// translation unit may run before avx2_kernels() has confirmed CPU support.

#include "gribov/kernels.hpp"

#if defined(GRIBOV_HAVE_AVX2)

#include <immintrin.h>

#include <algorithm>

namespace gribov::simd {
namespace {

inline __m256d load2(const cplx* p)
{
    return _mm256_loadu_pd(reinterpret_cast<const double*>(p));
}

inline void store2(cplx* p, __m256d v)
{
    _mm256_storeu_pd(reinterpret_cast<double*>(p), v);
}

// (ar + i ai) * v for two packed complexes.
inline __m256d cmul_bcast(__m256d ar, __m256d ai, __m256d v)
{
    const __m256d swapped = _mm256_permute_pd(v, 0x5);
    return _mm256_fmaddsub_pd(ar, v, _mm256_mul_pd(ai, swapped));
}

inline double hsum_even(__m256d v)
{
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return t[0] + t[2];
}

inline double hsum_odd(__m256d v)
{
    alignas(32) double t[4];
    _mm256_store_pd(t, v);
    return t[1] + t[3];
}

cplx dotc_avx2(std::size_t n, const cplx* x, const cplx* y)
{
    __m256d acc_a = _mm256_setzero_pd();
    __m256d acc_b = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        const __m256d yv = load2(y + i);
        acc_a = _mm256_fmadd_pd(xv, yv, acc_a);
        acc_b = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), acc_b);
    }
    double re = hsum_even(acc_a) + hsum_odd(acc_a);
    double im = hsum_even(acc_b) - hsum_odd(acc_b);
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() + x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() - x[i].imag() * y[i].real();
    }
    return {re, im};
}

cplx dotu_avx2(std::size_t n, const cplx* x, const cplx* y)
{
    __m256d acc_a = _mm256_setzero_pd();
    __m256d acc_b = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        const __m256d yv = load2(y + i);
        acc_a = _mm256_fmadd_pd(xv, yv, acc_a);
        acc_b = _mm256_fmadd_pd(xv, _mm256_permute_pd(yv, 0x5), acc_b);
    }
    double re = hsum_even(acc_a) - hsum_odd(acc_a);
    double im = hsum_even(acc_b) + hsum_odd(acc_b);
    for (; i < n; ++i) {
        re += x[i].real() * y[i].real() - x[i].imag() * y[i].imag();
        im += x[i].real() * y[i].imag() + x[i].imag() * y[i].real();
    }
    return {re, im};
}

double norm2_sq_avx2(std::size_t n, const cplx* x)
{
    __m256d acc = _mm256_setzero_pd();
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        acc = _mm256_fmadd_pd(xv, xv, acc);
    }
    double s = hsum_even(acc) + hsum_odd(acc);
    for (; i < n; ++i)
        s += x[i].real() * x[i].real() + x[i].imag() * x[i].imag();
    return s;
}

void axpy_avx2(std::size_t n, cplx a, const cplx* x, cplx* y)
{
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        store2(y + i, _mm256_add_pd(load2(y + i), cmul_bcast(ar, ai, load2(x + i))));
    for (; i < n; ++i)
        y[i] += a * x[i];
}

void scal_avx2(std::size_t n, cplx a, cplx* x)
{
    const __m256d ar = _mm256_set1_pd(a.real());
    const __m256d ai = _mm256_set1_pd(a.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2)
        store2(x + i, cmul_bcast(ar, ai, load2(x + i)));
    for (; i < n; ++i)
        x[i] *= a;
}

void rot_avx2(std::size_t n, cplx* x, cplx* y, double c, cplx s)
{
    const cplx sc = -std::conj(s);
    const __m256d cv = _mm256_set1_pd(c);
    const __m256d sr = _mm256_set1_pd(s.real());
    const __m256d si = _mm256_set1_pd(s.imag());
    const __m256d scr = _mm256_set1_pd(sc.real());
    const __m256d sci = _mm256_set1_pd(sc.imag());
    std::size_t i = 0;
    for (; i + 2 <= n; i += 2) {
        const __m256d xv = load2(x + i);
        const __m256d yv = load2(y + i);
        store2(x + i, _mm256_fmadd_pd(cv, xv, cmul_bcast(sr, si, yv)));
        store2(y + i, _mm256_fmadd_pd(cv, yv, cmul_bcast(scr, sci, xv)));
    }
    for (; i < n; ++i) {
        const cplx xi = x[i];
        const cplx yi = y[i];
        x[i] = c * xi + s * yi;
        y[i] = sc * xi + c * yi;
    }
}

// Row-streaming product: each pass over a row of C folds in four rows of B.
void gemm_avx2(std::size_t m, std::size_t n, std::size_t k,
               const cplx* a, std::size_t lda,
               const cplx* b, std::size_t ldb,
               cplx* c, std::size_t ldc)
{
    for (std::size_t i = 0; i < m; ++i) {
        cplx* ci = c + i * ldc;
        std::fill(ci, ci + n, cplx{});
        const cplx* ai = a + i * lda;
        std::size_t p = 0;
        for (; p + 4 <= k; p += 4) {
            const __m256d a0r = _mm256_set1_pd(ai[p].real());
            const __m256d a0i = _mm256_set1_pd(ai[p].imag());
            const __m256d a1r = _mm256_set1_pd(ai[p + 1].real());
            const __m256d a1i = _mm256_set1_pd(ai[p + 1].imag());
            const __m256d a2r = _mm256_set1_pd(ai[p + 2].real());
            const __m256d a2i = _mm256_set1_pd(ai[p + 2].imag());
            const __m256d a3r = _mm256_set1_pd(ai[p + 3].real());
            const __m256d a3i = _mm256_set1_pd(ai[p + 3].imag());
            const cplx* b0 = b + p * ldb;
            const cplx* b1 = b0 + ldb;
            const cplx* b2 = b1 + ldb;
            const cplx* b3 = b2 + ldb;
            std::size_t j = 0;
            for (; j + 2 <= n; j += 2) {
                __m256d acc = load2(ci + j);
                acc = _mm256_add_pd(acc, cmul_bcast(a0r, a0i, load2(b0 + j)));
                acc = _mm256_add_pd(acc, cmul_bcast(a1r, a1i, load2(b1 + j)));
                acc = _mm256_add_pd(acc, cmul_bcast(a2r, a2i, load2(b2 + j)));
                acc = _mm256_add_pd(acc, cmul_bcast(a3r, a3i, load2(b3 + j)));
                store2(ci + j, acc);
            }
            for (; j < n; ++j)
                ci[j] += ai[p] * b0[j] + ai[p + 1] * b1[j] + ai[p + 2] * b2[j] + ai[p + 3] * b3[j];
        }
        for (; p < k; ++p)
            axpy_avx2(n, ai[p], b + p * ldb, ci);
    }
}

} // namespace

const KernelTable* avx2_kernels()
{
    static const bool supported = [] {
        __builtin_cpu_init();
        return __builtin_cpu_supports("avx2") && __builtin_cpu_supports("fma");
    }();
    if (!supported)
        return nullptr;
    static const KernelTable table{
        "avx2",
        dotc_avx2,
        dotu_avx2,
        norm2_sq_avx2,
        axpy_avx2,
        scal_avx2,
        rot_avx2,
        gemm_avx2,
    };
    return &table;
}

} // namespace gribov::simd

#else

namespace gribov::simd {

const KernelTable* avx2_kernels()
{
    return nullptr;
}

} // namespace gribov::simd

#endif
