#pragma once

// Semigroups generated by the truncated operators: exact diagonal semigroups,
// Dyson (successive approximation) terms of e^{-t(λ″G + H_{μ,λ})} around
// e^{-tλ″G}, the once-iterated split F = E − I₁ + I₂, and Trotter products.
//
// Notation used below: E(t) = e^{-tλ″G}, F(t) = e^{-tH} with H = λ″G + H_{μ,λ},
// V = H_{μ,λ}.

#include "gribov/fock_ops.hpp"

#include <cstddef>
#include <span>
#include <vector>

namespace gribov::semigroup {

/// diag(e^{-t·scale·g_n}). Throws InvalidArgument for t < 0 or non-diagonal g.
fock::FockMatrix diag_semigroup(const fock::FockMatrix& g, double scale, double t);
std::vector<double> diag_semigroup_values(std::span<const double> g, double scale, double t);

// ------------------------------------------------------------------ Dyson

inline constexpr std::size_t kDysonOrderCap = 12;

struct DysonOptions
{
    std::size_t quad_order = 8; ///< collocation nodes on the base interval, >= 4
    bool certify = true;        ///< recompute with 2·quad_order and compare
    /// Certification fails when max_k ||S_k(q) − S_k(2q)||_F > tol·||S_0||_F.
    double tol = 1e-10;
    /// Base interval τ = t/2^m is the largest with τ·max(||λ″G||, ||V||_1) <= this.
    double base_step = 0.05;
    std::size_t order_cap = kDysonOrderCap;
};

struct DysonTerms
{
    std::vector<CMatrix> terms; ///< S_0..S_K at time t
    std::size_t doublings = 0;
    /// max_k ||S_k(q) − S_k(2q)||_F / ||S_0||_F, or -1 when not certified.
    double certification = -1.0;
};

/// S_0 = E(t), S_k(t) = −∫_0^t E(t−s) V S_{k−1}(s) ds, so F(t) = Σ_k S_k(t).
///
/// On the base interval [0, τ] the recursion is solved by collocation at the
/// Gauss–Legendre nodes: V S_{k−1} is interpolated by its Lagrange polynomial
/// and the exponential moments ∫ e^{−(s−u)a_n} L_l(u) du are integrated
/// numerically. The result is carried to t by m doublings
/// S_k(2τ) = Σ_{a+b=k} S_a(τ) S_b(τ).
///
/// Throws InvalidArgument for K above the cap or quad_order < 4, and
/// ConvergenceError when certification fails.
DysonTerms dyson_terms(std::size_t max_k, double t, const fock::Truncation& trunc,
                       const fock::GribovParams& params, const DysonOptions& options = {});

fock::FockMatrix dyson_term(std::size_t k, double t, const fock::Truncation& trunc,
                            const fock::GribovParams& params, std::size_t quad_order = 8);

struct DysonSumRow
{
    std::size_t k = 0;
    double distance = 0.0; ///< ||Σ_{j<=k} S_j − F||_1
};

struct DysonSumReport
{
    std::vector<DysonSumRow> rows;
    double certification = -1.0;
    /// d_K recomputed with twice the collocation order.
    double refined_last = 0.0;
};

DysonSumReport dyson_sum_report(std::size_t max_k, double t, const fock::Truncation& trunc,
                                const fock::GribovParams& params, const DysonOptions& options = {});

// ------------------------------------------------------------------ I₁ / I₂

/// I₁(t) = ∫_0^t E(t−s) V E(s) ds entrywise: V_mn (e^{−t a_n} − e^{−t a_m})/(a_m − a_n),
/// t V_nn e^{−t a_n} on equal levels (a_n = λ″λ_n).
fock::FockMatrix i1_closed_form(double t, const fock::Truncation& trunc, const fock::GribovParams& params);

/// (G + I)^p on the window (the shift makes negative p defined on ker G).
std::vector<double> shifted_power(const fock::Truncation& trunc, double p);

struct I2Report
{
    double i2_norm = 0.0; ///< ||F − E + I₁||_1
    /// ||V (G+I)^{−δ}||² t² max(w_G, w_H)
    double bound = 0.0;
    /// ||V (G+I)^{−δ}||² t² w_G
    double bound_literal = 0.0;
    double subordination = 0.0; ///< ||V (G+I)^{−δ}||
    double weight_g = 0.0;      ///< w_G = ||(G+I)^δ E(t/3)||_1
    double weight_h = 0.0;      ///< w_H = ||(G+I)^δ F(t/3)||_1
};

/// Requires t > 0 and δ >= 1/2.
I2Report i2_bound_report(double t, const fock::Truncation& trunc, const fock::GribovParams& params,
                         double delta);

struct AsymptoticsRow
{
    double t = 0.0;
    double full_gap = 0.0;      ///< ||F − E||_1
    double i1_trace_norm = 0.0; ///< ||I₁||_1
    double i1_trace = 0.0;      ///< |Tr I₁|
    double first_order = 0.0;   ///< t ||E V||_1
    double i2_trace_norm = 0.0;
    double i2_bound = 0.0;
    double weight = 0.0; ///< w_G
    double delta = 0.0;
};

/// t_grid positive and strictly ascending.
std::vector<AsymptoticsRow> trace_asymptotics_report(std::span<const double> t_grid,
                                                     const fock::Truncation& trunc,
                                                     const fock::GribovParams& params, double delta);

/// Least-squares slope of log y against log x.
double loglog_slope(std::span<const double> x, std::span<const double> y);

// ------------------------------------------------------------------ Trotter

struct TrotterRow
{
    std::size_t n = 0;
    double deviation = 0.0; ///< ||(e^{−τR} e^{−τV})^n − e^{−t(R+V)}||_1, τ = t/n
    double constant = 0.0;  ///< deviation · n / log n
};

struct TrotterReport
{
    std::vector<TrotterRow> rows;
    double fitted_constant = 0.0; ///< least squares of deviation ≈ C log n / n
    double fit_residual = 0.0;    ///< RMS of (deviation − C log n/n) / deviation
    /// max/min − 1 of the per-row constants with n in [n_max/2, n_max]
    double top_octave_spread = 0.0;
    bool monotone = false; ///< deviations strictly decreasing
};

/// R = λ′S (quartic, default) or λ″G (cubic). n_list ascending, each >= 2.
TrotterReport trotter_report(double t, std::span<const std::size_t> n_list,
                             const fock::Truncation& trunc, const fock::GribovParams& params,
                             fock::Regularizer regularizer = fock::Regularizer::quartic);

// ------------------------------------------------------------------ Schatten profile

enum class SemigroupKind { g_semigroup, h_semigroup };

/// table[i][j] = ||T(t_i)||_{p_j} for T = e^{−tλ″G} or e^{−tH}.
std::vector<std::vector<double>> schatten_profile(std::span<const double> t_list,
                                                  std::span<const double> p_list,
                                                  const fock::Truncation& trunc,
                                                  const fock::GribovParams& params, SemigroupKind which);

/// s-numbers of the chosen semigroup at time t (descending).
std::vector<double> semigroup_s_numbers(double t, const fock::Truncation& trunc,
                                        const fock::GribovParams& params, SemigroupKind which);

} // namespace gribov::semigroup
