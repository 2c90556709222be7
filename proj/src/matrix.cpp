#include "gribov/matrix.hpp"

#include "gribov/errors.hpp"
#include "gribov/kernels.hpp"

#include <algorithm>
#include <cmath>

namespace gribov {

CMatrix::CMatrix(std::size_t rows, std::size_t cols)
    : rows_(rows), cols_(cols), data_(rows * cols)
{}

CMatrix CMatrix::identity(std::size_t n)
{
    CMatrix m(n, n);
    for (std::size_t i = 0; i < n; ++i)
        m(i, i) = 1.0;
    return m;
}

CMatrix CMatrix::from_diagonal(std::span<const cplx> d)
{
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        m(i, i) = d[i];
    return m;
}

CMatrix CMatrix::from_diagonal(std::span<const double> d)
{
    CMatrix m(d.size(), d.size());
    for (std::size_t i = 0; i < d.size(); ++i)
        m(i, i) = d[i];
    return m;
}

CMatrix CMatrix::adjoint() const
{
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            out(j, i) = std::conj((*this)(i, j));
    return out;
}

CMatrix CMatrix::transpose() const
{
    CMatrix out(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            out(j, i) = (*this)(i, j);
    return out;
}

cplx CMatrix::trace() const
{
    cplx t{};
    for (std::size_t i = 0; i < std::min(rows_, cols_); ++i)
        t += (*this)(i, i);
    return t;
}

std::vector<cplx> CMatrix::diagonal() const
{
    std::vector<cplx> d(std::min(rows_, cols_));
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = (*this)(i, i);
    return d;
}

bool CMatrix::is_diagonal() const
{
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            if (i != j && (*this)(i, j) != cplx{})
                return false;
    return true;
}

double CMatrix::frobenius_norm() const
{
    return std::sqrt(simd::active().norm2_sq(data_.size(), data_.data()));
}

double CMatrix::norm1() const
{
    std::vector<double> col(cols_, 0.0);
    for (std::size_t i = 0; i < rows_; ++i)
        for (std::size_t j = 0; j < cols_; ++j)
            col[j] += std::abs((*this)(i, j));
    return col.empty() ? 0.0 : *std::max_element(col.begin(), col.end());
}

double CMatrix::max_abs() const
{
    double m = 0.0;
    for (const cplx& z : data_)
        m = std::max(m, std::abs(z));
    return m;
}

CMatrix& CMatrix::operator+=(const CMatrix& other)
{
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw InvalidArgument("CMatrix::operator+=: shape mismatch");
    simd::active().axpy(data_.size(), 1.0, other.data_.data(), data_.data());
    return *this;
}

CMatrix& CMatrix::operator-=(const CMatrix& other)
{
    if (rows_ != other.rows_ || cols_ != other.cols_)
        throw InvalidArgument("CMatrix::operator-=: shape mismatch");
    simd::active().axpy(data_.size(), -1.0, other.data_.data(), data_.data());
    return *this;
}

CMatrix& CMatrix::operator*=(cplx s)
{
    simd::active().scal(data_.size(), s, data_.data());
    return *this;
}

CMatrix CMatrix::trailing_block(std::size_t first) const
{
    if (first > rows_ || first > cols_)
        throw InvalidArgument("CMatrix::trailing_block: offset beyond matrix");
    CMatrix out(rows_ - first, cols_ - first);
    for (std::size_t i = first; i < rows_; ++i)
        std::copy(row(i) + first, row(i) + cols_, out.row(i - first));
    return out;
}

CMatrix operator+(CMatrix a, const CMatrix& b)
{
    a += b;
    return a;
}

CMatrix operator-(CMatrix a, const CMatrix& b)
{
    a -= b;
    return a;
}

CMatrix operator*(CMatrix a, cplx s)
{
    a *= s;
    return a;
}

CMatrix operator*(cplx s, CMatrix a)
{
    a *= s;
    return a;
}

CMatrix operator*(const CMatrix& a, const CMatrix& b)
{
    if (a.cols() != b.rows())
        throw InvalidArgument("CMatrix product: inner dimensions differ");
    CMatrix c(a.rows(), b.cols());
    if (c.empty() || a.cols() == 0)
        return c;
    simd::active().gemm(a.rows(), b.cols(), a.cols(), a.data(), a.cols(), b.data(), b.cols(),
                        c.data(), c.cols());
    return c;
}

CMatrix scale_rows(std::span<const double> d, CMatrix m)
{
    if (d.size() != m.rows())
        throw InvalidArgument("scale_rows: size mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i)
        simd::active().scal(m.cols(), d[i], m.row(i));
    return m;
}

CMatrix scale_cols(CMatrix m, std::span<const double> d)
{
    if (d.size() != m.cols())
        throw InvalidArgument("scale_cols: size mismatch");
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            m(i, j) *= d[j];
    return m;
}

double max_abs_diff(const CMatrix& a, const CMatrix& b)
{
    if (a.rows() != b.rows() || a.cols() != b.cols())
        throw InvalidArgument("max_abs_diff: shape mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            m = std::max(m, std::abs(a(i, j) - b(i, j)));
    return m;
}

} // namespace gribov
