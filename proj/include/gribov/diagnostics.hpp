#pragma once

// Numerical checks of the operator inequalities behind the Gribov Hamiltonian:
// relative and form bounds of H_{μ,λ} against G, accretivity, subordination
// ||H_{μ,λ}(G+I)^{−δ}||, Carleman-class exponents and small-t semigroup limits.
// Every fractional or inverse power of G uses the shift G + I.

#include "gribov/fock_ops.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace gribov::diag {

// ------------------------------------------------------------------ bounds

enum class BoundKind { relative, form };

struct SupOptions
{
    std::size_t random_starts = 32;
    std::uint64_t seed = 20240521;
    std::size_t max_iterations = 2000;
    double rel_tol = 0.01; ///< stabilization threshold between the last two dims
};

struct BoundReport
{
    BoundKind kind = BoundKind::relative;
    double epsilon = 0.0;
    double constant = 0.0; ///< estimate at the largest dim
    std::vector<std::size_t> trunc_dims;
    std::vector<double> constants_by_dim;
    bool stabilized = false;
    double rel_tol = 0.01;
    std::uint64_t seed = 0;
    std::vector<cplx> maximizer; ///< best unit vector found at the largest dim
};

/// sup over unit φ of ||H_{μ,λ}φ|| − ε||Gφ|| (relative) or |<H_{μ,λ}φ,φ>| − ε<Gφ,φ>
/// (form), estimated per dim by multistart projected gradient ascent on the
/// sphere started from every basis vector and `random_starts` seeded vectors.
/// Throws InvalidArgument for ε <= 0 or an empty/unsorted dim list.
BoundReport relative_bound(double epsilon, std::span<const std::size_t> dims,
                           const fock::GribovParams& params, const SupOptions& options = {});
BoundReport form_bound(double epsilon, std::span<const std::size_t> dims,
                       const fock::GribovParams& params, const SupOptions& options = {});

/// Bound objective at one vector (φ need not be normalized; the value is for φ/||φ||).
double bound_objective(BoundKind kind, double epsilon, std::span<const cplx> phi,
                       const fock::Truncation& trunc, const fock::GribovParams& params);

struct VerifyResult
{
    std::size_t samples = 0;
    std::size_t violations = 0;
    double worst_excess = 0.0; ///< max of objective − constant over the samples
};

/// Checks the reported inequality on random unit vectors at the largest dim
/// (a mix of flat, low-mode weighted and maximizer-perturbed samples).
VerifyResult verify_bound(const BoundReport& report, const fock::GribovParams& params,
                          std::size_t samples = 10000, double slack = 1e-8, std::uint64_t seed = 7);

// ------------------------------------------------------------------ accretivity

/// Smallest eigenvalue of (M + M†)/2 for the cubic Hamiltonian on the window.
/// Throws InvalidArgument for μ <= 0 or λ″ < 0.
double accretivity_floor(const fock::Truncation& trunc, const fock::GribovParams& params);

// ------------------------------------------------------------------ subordination

enum class Trend { plateau, growing };

struct SubordinationRow
{
    std::size_t dim = 0;
    double norm = 0.0;
};

struct SubordinationReport
{
    double delta = 0.0;
    std::vector<SubordinationRow> rows;
    Trend trend = Trend::plateau; ///< plateau when the last ratio − 1 <= 1%
    double last_ratio = 1.0;      ///< norm(N_last)/norm(N_prev)
};

SubordinationReport subordination_norm(double delta, std::span<const std::size_t> dims,
                                       const fock::GribovParams& params);

std::string to_string(Trend t);

// ------------------------------------------------------------------ Carleman classes

enum class OperatorKind { g_resolvent, h_resolvent, g_semigroup, h_semigroup };

struct CarlemanFit
{
    OperatorKind kind = OperatorKind::g_resolvent;
    double exponent = 0.0; ///< slope of log s_n vs log n (resolvents)
    double r2 = 0.0;
    /// Semigroups: largest p in 1..6 with some s_n > n^{−p} in the window, 0 if none.
    int violated_p = 0;
    std::size_t window_lo = 0, window_hi = 0; ///< 1-based s-number indices
    std::vector<double> s_numbers;
};

/// Resolvents are (A + I)^{−1}. The window must satisfy 4 <= lo < hi <= dim/2
/// (the kernel of G and the truncation edge are excluded); t > 0 for semigroups.
CarlemanFit carleman_exponent_fit(OperatorKind kind, const fock::Truncation& trunc,
                                  const fock::GribovParams& params, std::size_t window_lo,
                                  std::size_t window_hi, double t = 0.1);

// ------------------------------------------------------------------ small t

inline constexpr std::size_t kDenseCap = 1024;

/// N(t) = ceil(4 t^{−1/3}), at least 8.
std::size_t small_t_dim(double t);

struct SmallTRow
{
    double t = 0.0;
    std::size_t dim = 0;
    double scaled_norm = 0.0;  ///< t ||G e^{−tG}||
    double trace_norm = 0.0;   ///< ||e^{−tG}||_1
    double scaled_trace = 0.0; ///< t^{1/3} (||e^{−tG}||_1 − 3)
};

/// Throws InvalidArgument for non-positive t or when N(t) exceeds `cap`.
std::vector<SmallTRow> small_t_limits(std::span<const double> t_grid, std::size_t cap = kDenseCap);

} // namespace gribov::diag
