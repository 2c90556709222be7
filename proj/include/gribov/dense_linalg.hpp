#pragma once

// Dense complex linear algebra used by every other module: LU, eigensolvers,
// singular values, Schatten norms, the matrix exponential and diagonal
// resolvents. Nothing here depends on the Gribov structure except the
// FockMatrix convenience overloads.

#include "gribov/fock_ops.hpp"
#include "gribov/matrix.hpp"

#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace gribov::linalg {

// ---------------------------------------------------------------- LU

/// Partial-pivoting LU factorization of a square matrix.
class LU
{
public:
    /// Throws InvalidArgument for non-square or exactly singular input.
    explicit LU(CMatrix a);

    CMatrix solve(const CMatrix& rhs) const;
    std::vector<cplx> solve(std::span<const cplx> rhs) const;
    CMatrix inverse() const;

private:
    CMatrix lu_;
    std::vector<std::size_t> perm_;
};

CMatrix solve(const CMatrix& a, const CMatrix& rhs);
CMatrix inverse(const CMatrix& a);

// ---------------------------------------------------------------- eigen

enum class EigenMode { hermitian, general };

/// modulus: |σ| ascending, ties (relative 1e-12) by argument in [0, 2π).
/// real_part: Re σ ascending, ties by Im σ.
enum class EigenOrder { modulus, real_part };

struct EigenOptions
{
    bool want_vectors = false;
    EigenOrder order = EigenOrder::modulus;
    /// Total QR sweep budget is max_iterations_per_eigenvalue * dim.
    std::size_t max_iterations_per_eigenvalue = 30;
    /// Residual tolerance reported in SpectralData, relative to ||M||_F.
    double residual_tolerance = 1e-10;
};

struct SpectralData
{
    std::vector<cplx> eigenvalues;
    /// Column k pairs with eigenvalues[k], unit 2-norm. Empty unless requested.
    CMatrix eigenvectors;
    /// ||M v_k - σ_k v_k|| / ||v_k||; empty when vectors were not requested.
    std::vector<double> residuals;
    double tolerance = 0.0;
    std::size_t iterations = 0;
    /// Nonempty when two computed eigenvectors are numerically parallel.
    std::vector<std::string> diagnostics;

    double max_residual() const;
};

/// Hermitian mode rejects input whose deviation from M^H exceeds 1e-12 ||M||_F and
/// returns real eigenvalues (Householder tridiagonalization + implicit QL).
/// General mode: Hessenberg reduction + single-shift complex QR.
/// Throws ConvergenceError when the sweep budget is exhausted.
SpectralData eigen(const CMatrix& m, EigenMode mode, const EigenOptions& options = {});
SpectralData eigen(const fock::FockMatrix& m, EigenMode mode, const EigenOptions& options = {});

/// Eigenvalues of a Hermitian matrix in ascending order.
std::vector<double> hermitian_eigenvalues(const CMatrix& m);

/// Reorders `values` (and the matching eigenvector columns, when present).
void sort_spectrum(SpectralData& data, EigenOrder order);

// ---------------------------------------------------------------- singular values

struct SchattenReport
{
    std::vector<double> s_numbers; ///< descending
    std::map<double, double> p_norms;

    /// (Σ s^p)^{1/p}, computed with the largest s-number factored out.
    double norm(double p) const;
};

/// One-sided Jacobi SVD (rows are orthogonalized; s-numbers are the row norms).
SchattenReport singular_values(const CMatrix& m, std::span<const double> p_list = {});
SchattenReport singular_values(const fock::FockMatrix& m, std::span<const double> p_list = {});

/// Square roots of the eigenvalues of M^H M via the Hermitian solver. Loses
/// accuracy below sqrt(eps) ||M||; kept as an independent cross-check.
SchattenReport singular_values_gram(const CMatrix& m, std::span<const double> p_list = {});

/// Throws InvalidArgument for p <= 0 or non-finite p.
double schatten_norm(const CMatrix& m, double p);
double schatten_norm(const fock::FockMatrix& m, double p);
double schatten_norm(std::span<const double> s_numbers, double p);

/// Largest singular value.
double operator_norm(const CMatrix& m);

// ---------------------------------------------------------------- exponential

struct ExpOptions
{
    /// Reject when the scaling analysis asks for more squarings than this.
    int max_squarings = 64;
};

/// exp(-t M) by Padé scaling and squaring (degrees 3..13). Diagonal input is
/// exponentiated entrywise. Throws InvalidArgument for t < 0 or non-finite t.
CMatrix matrix_exp(const CMatrix& m, double t, const ExpOptions& options = {});
fock::FockMatrix matrix_exp(const fock::FockMatrix& m, double t, const ExpOptions& options = {});

struct CheckedExp
{
    CMatrix value;
    /// ||Padé - V e^{-tΛ} V^{-1}||_2 / ||Padé||_2, or -1 when the eigenvector
    /// reconstruction was not attempted (residuals too large, singular V).
    double crosscheck = -1.0;
    bool ill_conditioned = false;
};

/// matrix_exp with an eigendecomposition cross-check; disagreement above
/// `threshold` sets ill_conditioned instead of failing.
CheckedExp matrix_exp_checked(const CMatrix& m, double t, double threshold = 1e-8);

// ---------------------------------------------------------------- resolvents

/// 1/(scale g_n - σ) for each diagonal entry g_n. Throws PoleProximityError when
/// |scale g_n - σ| < pole_tol * max(1, |σ|).
std::vector<cplx> resolvent_diag_values(std::span<const double> g, double scale, cplx sigma,
                                        double pole_tol = 1e-8);

/// Same as resolvent_diag_values for a diagonal FockMatrix; rejects non-diagonal input.
fock::FockMatrix resolvent_diag(const fock::FockMatrix& g, double scale, cplx sigma,
                                double pole_tol = 1e-8);

// ---------------------------------------------------------------- tridiagonal

/// Solves T x = b in place for tridiagonal T with partial pivoting (row
/// interchanges). lower[i] = T(i+1, i), upper[i] = T(i, i+1).
/// Returns false when an exactly zero pivot appears.
bool tridiagonal_solve(std::span<const cplx> lower, std::span<const cplx> diag,
                       std::span<const cplx> upper, std::span<cplx> rhs);

/// Refines an eigenvalue of the complex symmetric tridiagonal matrix with
/// diagonal `diag` and off-diagonal `off` near `guess`: inverse iteration at the
/// guess, then Rayleigh quotient iteration with the bilinear quotient
/// v^T T v / v^T v. An exactly singular shift is returned as is.
cplx polish_symmetric_tridiagonal(std::span<const cplx> off, std::span<const cplx> diag,
                                  cplx guess, int max_iterations = 8);

} // namespace gribov::linalg
