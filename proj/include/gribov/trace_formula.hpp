#pragma once

// Both sides of the regularized trace formula for H = λ″G + H_{μ,λ}:
//
//   Σ_{k<=n} (σ_k − λ″λ_k)   vs   −(1/2πi) ∮_{γ_n} Σ_j ((−1)^{j−1}/j) Tr[(H_{μ,λ} R(σ))^j] dσ
//
// with R(σ) = (λ″G − σ)^{−1} and γ_n the circle |σ| = r_n.

#include "gribov/fock_ops.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace gribov::trace {

inline constexpr std::size_t kDefaultCorrections = 4;
inline constexpr std::size_t kMaxCorrections = 6;

struct ContourSpec
{
    std::size_t index = 0; ///< n: the circle encloses λ″λ_0..λ″λ_n
    double radius = 0.0;
    std::size_t nodes = 0; ///< equispaced trapezoid nodes on the circle
    cplx center{};
    double pole_margin = 0.0; ///< required min_k |r − λ″λ_k|

    /// Throws InvalidArgument when the radius does not separate level n from n+1
    /// with the required margin, or nodes < 64.
    void validate(double lambda_cubic) const;
};

/// Midpoint radius λ″(λ_n + λ_{n+1})/2, margin a quarter of the gap.
/// Throws InvalidArgument for n < 2, nodes < 64 or λ″ <= 0.
ContourSpec contour_for_index(std::size_t n, const fock::GribovParams& params, std::size_t nodes = 512);

/// Same, with a caller-chosen radius (validated).
ContourSpec contour_with_radius(std::size_t n, const fock::GribovParams& params, double radius,
                                std::size_t nodes = 512);

struct IntegrandTraces
{
    /// traces[j-1] = Tr[(H R)^j], j = 1..J
    std::vector<cplx> traces;
    /// Contribution of the last retained diagonal entry to each trace.
    std::vector<cplx> last_diagonal;
};

/// Tr[(H_{μ,λ} R(σ))^j] for j = 1..max_j on the truncation, by a banded walk sum
/// (O(N J²)). Throws PoleProximityError when σ sits on an unperturbed level.
IntegrandTraces correction_traces(cplx sigma, std::size_t max_j, const fock::Truncation& trunc,
                                  const fock::GribovParams& params);

/// Single-j convenience wrapper.
cplx correction_integrand(cplx sigma, std::size_t j, const fock::Truncation& trunc,
                          const fock::GribovParams& params);

struct RhsResult
{
    cplx total{};
    std::vector<cplx> per_j;   ///< signed contributions ((−1)^{j−1}/j) included
    double node_doubling_delta = 0.0; ///< |total(2M) − total(M)|
    double tail = 0.0;         ///< |contribution of the last retained diagonal|
};

RhsResult rhs_contour_sum(const ContourSpec& c, const fock::Truncation& trunc,
                          const fock::GribovParams& params,
                          std::size_t corrections = kDefaultCorrections);

struct LhsResult
{
    cplx sum{};     ///< polished Σ(σ_k − λ″λ_k)
    cplx raw_sum{}; ///< same from the unpolished eigenvalues
    std::size_t inside_count = 0;
    std::size_t expected_count = 0;
    bool valid = false;
    std::vector<cplx> shifts; ///< polished σ_k − λ″λ_k, paired in level order
};

/// Eigenvalues of the cubic Hamiltonian on the truncation, modulus ascending.
std::vector<cplx> cubic_spectrum(const fock::Truncation& trunc, const fock::GribovParams& params);

/// Requires trunc.dim >= 4(n+1). Eigenvalues with |σ| < r_n are paired with the
/// retained levels in modulus order and each shift is refined by Rayleigh
/// quotient iteration on the exact band of H − λ″λ_k. An inside count other than
/// the number of enclosed levels marks the result invalid.
LhsResult lhs_eigen_sum(const ContourSpec& c, const fock::Truncation& trunc,
                        const fock::GribovParams& params);
LhsResult lhs_eigen_sum(const ContourSpec& c, const fock::Truncation& trunc,
                        const fock::GribovParams& params, std::span<const cplx> spectrum);

struct FormulaRow
{
    ContourSpec contour;
    LhsResult lhs;
    RhsResult rhs;
    double gap = 0.0; ///< |lhs − rhs|
    bool valid = false;
};

/// One eigensolve shared by all rows.
std::vector<FormulaRow> formula_convergence_report(std::span<const std::size_t> n_range,
                                                   const fock::Truncation& trunc,
                                                   const fock::GribovParams& params,
                                                   std::size_t nodes = 512,
                                                   std::size_t corrections = kDefaultCorrections);

/// max_k min_j |σ_k − conj(σ_j)|.
double conjugation_defect(std::span<const cplx> spectrum);

} // namespace gribov::trace
