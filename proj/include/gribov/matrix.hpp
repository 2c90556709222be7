#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace gribov {

using cplx = std::complex<double>;

/// Dense row-major complex matrix. Products go through the active SIMD kernels.
class CMatrix
{
public:
    CMatrix() = default;
    CMatrix(std::size_t rows, std::size_t cols);

    static CMatrix identity(std::size_t n);
    static CMatrix from_diagonal(std::span<const cplx> d);
    static CMatrix from_diagonal(std::span<const double> d);

    std::size_t rows() const noexcept { return rows_; }
    std::size_t cols() const noexcept { return cols_; }
    bool square() const noexcept { return rows_ == cols_; }
    bool empty() const noexcept { return data_.empty(); }

    cplx& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
    const cplx& operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

    cplx* data() noexcept { return data_.data(); }
    const cplx* data() const noexcept { return data_.data(); }
    cplx* row(std::size_t i) noexcept { return data_.data() + i * cols_; }
    const cplx* row(std::size_t i) const noexcept { return data_.data() + i * cols_; }

    CMatrix adjoint() const;
    CMatrix transpose() const;
    cplx trace() const;
    std::vector<cplx> diagonal() const;
    bool is_diagonal() const;

    double frobenius_norm() const;
    /// Maximum absolute column sum.
    double norm1() const;
    double max_abs() const;

    CMatrix& operator+=(const CMatrix& other);
    CMatrix& operator-=(const CMatrix& other);
    CMatrix& operator*=(cplx s);

    /// Keeps rows/cols [first, rows()) x [first, cols()).
    CMatrix trailing_block(std::size_t first) const;

    friend bool operator==(const CMatrix&, const CMatrix&) = default;

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<cplx> data_;
};

CMatrix operator+(CMatrix a, const CMatrix& b);
CMatrix operator-(CMatrix a, const CMatrix& b);
CMatrix operator*(CMatrix a, cplx s);
CMatrix operator*(cplx s, CMatrix a);
CMatrix operator*(const CMatrix& a, const CMatrix& b);

/// diag(d) * m
CMatrix scale_rows(std::span<const double> d, CMatrix m);
/// m * diag(d)
CMatrix scale_cols(CMatrix m, std::span<const double> d);

double max_abs_diff(const CMatrix& a, const CMatrix& b);

} // namespace gribov
