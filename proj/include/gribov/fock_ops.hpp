#pragma once

// Truncated Fock-basis matrices of the Gribov operator family
//
//   H = λ″ a*³a³ + λ′ a*²a² + μ a*a + iλ a*(a + a*)a
//
// in the orthonormal occupation basis e_n. A window keeps `dim` consecutive
// basis vectors starting at e_offset; every operator is compressed to that
// window (Galerkin projection, no boundary correction).

#include "gribov/matrix.hpp"

#include <cstddef>
#include <vector>

namespace gribov::fock {

struct GribovParams
{
    double lambda_cubic = 0.0;   ///< λ″, coefficient of G = a*³a³
    double lambda_quartic = 0.0; ///< λ′, coefficient of S = a*²a²
    double mu = 0.0;             ///< coefficient of a*a
    double lambda_triple = 0.0;  ///< λ, coefficient of i a*(a + a*)a

    /// Throws InvalidArgument unless all couplings are finite.
    void validate() const;
    /// Accretivity hypotheses: μ > 0 and λ″ >= 0.
    void require_accretive() const;
};

struct Truncation
{
    std::size_t dim = 0;
    std::size_t offset = 0; ///< 0: e_0..e_{N-1}; 1: e_1..e_N (functions vanishing at 0)

    void validate() const;
};

/// Dense window matrix. Entry (m, n) is the coefficient of e_{m+offset} in the
/// image of e_{n+offset}.
struct FockMatrix
{
    CMatrix values;
    std::size_t offset = 0;

    std::size_t dim() const noexcept { return values.rows(); }
    const cplx& operator()(std::size_t m, std::size_t n) const { return values(m, n); }
};

/// Three-band storage for the (always tridiagonal) Hamiltonians; sub[i] = M(i+1, i),
/// super[i] = M(i, i+1).
struct Tridiagonal
{
    std::vector<cplx> sub;
    std::vector<cplx> diag;
    std::vector<cplx> super;
    std::size_t offset = 0;

    std::size_t dim() const noexcept { return diag.size(); }
    FockMatrix to_dense() const;
};

enum class Ladder { annihilation, creation };
enum class Regularizer { cubic, quartic, none };

/// n(n-1)...(n-k+1); exact in double for every n a dense window can hold.
double falling_factorial(std::size_t n, int k);

FockMatrix build_ladder(const Truncation& trunc, Ladder kind);

/// diag of a*^k a^k: k = 1 number operator, 2 gives S, 3 gives G.
FockMatrix build_diag_power(const Truncation& trunc, int order);

/// H_{μ,λ} = μ a*a + iλ a*(a + a*)a: complex symmetric and tridiagonal.
FockMatrix build_interaction(const Truncation& trunc, const GribovParams& params);

/// cubic: λ″G + H_{μ,λ}; quartic: λ′S + H_{μ,λ}; none: H_{μ,λ}.
FockMatrix build_hamiltonian(const Truncation& trunc, const GribovParams& params,
                             Regularizer regularizer);

/// Band form of build_hamiltonian.
Tridiagonal hamiltonian_bands(const Truncation& trunc, const GribovParams& params,
                              Regularizer regularizer);

/// Drops the first `drop` rows and columns; offset grows by `drop`.
FockMatrix restrict_subspace(const FockMatrix& m, std::size_t drop);

/// Diagonal of build_diag_power as reals (a*^k a^k eigenvalues on the window).
std::vector<double> diag_power_values(const Truncation& trunc, int order);

} // namespace gribov::fock
