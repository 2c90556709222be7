#include "gribov/dense_linalg.hpp"
#include "gribov/errors.hpp"
#include "gribov/quadrature.hpp"
#include "gribov/semigroup.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace gribov;
using namespace gribov::semigroup;
using fock::GribovParams;
using fock::Truncation;

namespace {

const GribovParams kRef{1.0, 1.0, 0.1, 0.05};

double lam(double n) { return n * (n - 1) * (n - 2); }

double max_abs(const CMatrix& m)
{
    double best = 0.0;
    for (std::size_t i = 0; i < m.rows(); ++i)
        for (std::size_t j = 0; j < m.cols(); ++j)
            best = std::max(best, std::abs(m(i, j)));
    return best;
}

// Block-exponential oracle: for M = [[A, V, 0..], [0, A, V, ..], ..] the block
// (0, k) of e^{-tM} is the k-th Dyson term.
std::vector<CMatrix> block_exp_terms(std::size_t kmax, double t, const Truncation& tr, const GribovParams& p)
{
    const std::size_t n = tr.dim, b = kmax + 1;
    const CMatrix v = fock::build_interaction(tr, p).values;
    CMatrix m(n * b, n * b);
    for (std::size_t blk = 0; blk < b; ++blk)
        for (std::size_t i = 0; i < n; ++i) {
            m(blk * n + i, blk * n + i) = p.lambda_cubic * lam(static_cast<double>(i + tr.offset));
            if (blk + 1 < b)
                for (std::size_t j = 0; j < n; ++j)
                    m(blk * n + i, (blk + 1) * n + j) = v(i, j);
        }
    const CMatrix e = linalg::matrix_exp(m, t);
    std::vector<CMatrix> out;
    for (std::size_t k = 0; k < b; ++k) {
        CMatrix s(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                s(i, j) = e(i, k * n + j);
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace

TEST_CASE("diagonal semigroup")
{
    const Truncation tr{4, 0};
    const fock::FockMatrix g = fock::build_diag_power(tr, 3);
    const fock::FockMatrix e = diag_semigroup(g, 1.0, 1.0);
    CHECK(e(0, 0) == cplx(1.0));
    CHECK(e(2, 2) == cplx(1.0));
    CHECK(std::abs(e(3, 3) - std::exp(-6.0)) < 1e-16);
    CHECK(e(0, 1) == cplx(0.0));
    CHECK(diag_semigroup(g, 1.0, 0.0).values == CMatrix::identity(4));
    CHECK_THROWS_AS(diag_semigroup(g, 1.0, -1.0), InvalidArgument);

    // trace tends to the three zero modes
    const Truncation big{400, 0};
    const std::vector<double> levels = fock::diag_power_values(big, 3);
    double tr_far = 0.0;
    for (double x : diag_semigroup_values(levels, 1.0, 50.0))
        tr_far += x;
    CHECK(tr_far == doctest::Approx(3.0).epsilon(1e-12));

    // ∫_0^∞ e^{-t x³} dx = Γ(4/3) t^{-1/3}
    const double t = 1e-6;
    double tr_small = 0.0;
    for (double x : diag_semigroup_values(levels, 1.0, t))
        tr_small += x;
    const double expect = 3.0 + std::tgamma(4.0 / 3.0) * std::cbrt(1.0 / t);
    CHECK(std::abs(tr_small / expect - 1.0) < 0.02);
}

TEST_CASE("dyson terms of order 0 and 1 against closed forms")
{
    const Truncation tr{20, 0};
    const double t = 0.3;
    DysonTerms d = dyson_terms(1, t, tr, kRef);
    const fock::FockMatrix e = diag_semigroup(fock::build_diag_power(tr, 3), kRef.lambda_cubic, t);
    CHECK(max_abs(d.terms[0] - e.values) == 0.0);

    const CMatrix v = fock::build_interaction(tr, kRef).values;
    CMatrix oracle(tr.dim, tr.dim);
    for (std::size_t m = 0; m < tr.dim; ++m)
        for (std::size_t n = 0; n < tr.dim; ++n) {
            if (v(m, n) == cplx{})
                continue;
            const double am = lam(static_cast<double>(m)), an = lam(static_cast<double>(n));
            const cplx val = am == an ? t * v(m, n) * std::exp(-t * an)
                                      : v(m, n) * (std::exp(-t * an) - std::exp(-t * am)) / (am - an);
            oracle(m, n) = -val;
        }
    CHECK(max_abs(d.terms[1] - oracle) <= 1e-11 * max_abs(oracle));
    CHECK(max_abs(i1_closed_form(t, tr, kRef).values + oracle) <= 1e-14 * max_abs(oracle));
    CHECK(d.certification >= 0.0);
    CHECK(d.certification <= 1e-10);
}

TEST_CASE("dyson terms match the block exponential")
{
    const Truncation tr{16, 0};
    for (double t : {0.05, 0.5}) {
        const DysonTerms d = dyson_terms(3, t, tr, kRef);
        const std::vector<CMatrix> ref = block_exp_terms(3, t, tr, kRef);
        for (std::size_t k = 1; k <= 3; ++k) {
            INFO("t = " << t << ", k = " << k);
            CHECK(max_abs(d.terms[k] - ref[k]) <= 1e-10 * max_abs(ref[k]));
        }
    }
    const DysonTerms shifted = dyson_terms(2, 0.2, Truncation{12, 1}, kRef);
    const std::vector<CMatrix> ref = block_exp_terms(2, 0.2, Truncation{12, 1}, kRef);
    CHECK(max_abs(shifted.terms[2] - ref[2]) <= 1e-10 * max_abs(ref[2]));
}

TEST_CASE("free coupling gives vanishing corrections")
{
    const GribovParams free{1.0, 1.0, 0.0, 0.0};
    const Truncation tr{16, 0};
    const DysonTerms d = dyson_terms(4, 0.1, tr, free);
    for (std::size_t k = 1; k <= 4; ++k)
        CHECK(max_abs(d.terms[k]) == 0.0);
    const DysonSumReport rep = dyson_sum_report(3, 0.1, tr, free);
    for (const DysonSumRow& row : rep.rows)
        CHECK(row.distance < 1e-15);
    CHECK(i2_bound_report(0.1, tr, free, 0.5).i2_norm < 1e-15);
}

TEST_CASE("dyson argument checks")
{
    const Truncation tr{16, 0};
    CHECK_THROWS_AS(dyson_terms(13, 0.1, tr, kRef), InvalidArgument);
    DysonOptions o;
    o.quad_order = 3;
    CHECK_THROWS_AS(dyson_terms(2, 0.1, tr, kRef, o), InvalidArgument);
    CHECK_THROWS_AS(dyson_terms(2, -0.1, tr, kRef), InvalidArgument);
    CHECK_THROWS_AS(dyson_sum_report(0, 0.1, tr, kRef), InvalidArgument);

    // one coarse step over a stiff interval cannot be certified
    DysonOptions coarse;
    coarse.quad_order = 4;
    coarse.base_step = 1e6;
    CHECK_THROWS_AS(dyson_terms(2, 1.0, Truncation{24, 0}, kRef, coarse), ConvergenceError);
}

TEST_CASE("dyson partial sums converge")
{
    const Truncation tr{32, 0};
    const DysonSumReport rep = dyson_sum_report(6, 0.05, tr, kRef);
    REQUIRE(rep.rows.size() == 7);
    CHECK(rep.rows.back().distance < rep.rows.front().distance);
    for (std::size_t k = 1; k < rep.rows.size(); ++k)
        CHECK(rep.rows[k].distance < rep.rows[k - 1].distance);
    CHECK(std::abs(rep.refined_last - rep.rows.back().distance) < 1e-8);
}

TEST_CASE("dyson alternation with imaginary coupling")
{
    const GribovParams p{1.0, 1.0, 0.0, 0.05};
    const Truncation tr{20, 0};
    const DysonTerms d = dyson_terms(4, 0.01, tr, p);
    for (std::size_t k = 1; k <= 4; ++k) {
        // S_k = (−1)^k (iλ)^k × positive simplex integral
        const cplx phase = std::pow(cplx(0.0, -1.0), static_cast<double>(k));
        std::size_t seen = 0;
        for (std::size_t i = 3; i + k < tr.dim; ++i)
            for (const cplx z : {d.terms[k](i, i + k), d.terms[k](i + k, i)}) {
                if (std::abs(z) == 0.0)
                    continue;
                const cplx r = z / phase;
                CHECK(r.real() > 0.0);
                CHECK(std::abs(r.imag()) <= 1e-12 * std::abs(r));
                ++seen;
            }
        CHECK(seen > 0);
    }
}

TEST_CASE("once-iterated split against the Dyson tail")
{
    const Truncation tr{24, 0};
    for (double t : {0.01, 0.05}) {
        const CMatrix f =
            linalg::matrix_exp(fock::build_hamiltonian(tr, kRef, fock::Regularizer::cubic).values, t);
        const DysonTerms d = dyson_terms(kDysonOrderCap, t, tr, kRef);
        CMatrix tail(tr.dim, tr.dim);
        for (std::size_t k = 2; k <= kDysonOrderCap; ++k)
            tail += d.terms[k];
        const CMatrix split = f - d.terms[0] + i1_closed_form(t, tr, kRef).values - tail;
        CHECK(max_abs(split) <= 1e-12 * max_abs(f));
    }
}

TEST_CASE("trace of the first-order term")
{
    const Truncation tr{48, 0};
    for (double t : {1e-3, 1e-2, 0.1, 1.0}) {
        const cplx tr_i1 = i1_closed_form(t, tr, kRef).values.trace();
        double expect = 0.0;
        for (std::size_t n = 0; n < tr.dim; ++n)
            expect += t * kRef.mu * static_cast<double>(n) * std::exp(-t * lam(static_cast<double>(n)));
        CHECK(std::abs(tr_i1 - expect) <= 1e-12 * expect);
    }

    const GribovParams p{1.0, 1.0, 1.0, 0.0};
    const Truncation small{4, 0};
    const double expect = 1.0 + 2.0 + 3.0 * std::exp(-6.0);
    CHECK(std::abs(i1_closed_form(1.0, small, p).values.trace() - expect) < 1e-14);
    CHECK(expect == doctest::Approx(3.0074363).epsilon(1e-7));

    // quadrature of the defining integral ∫_0^1 Tr(E(1−s) V E(s)) ds
    const quad::Rule rule = quad::gauss_legendre(40, 0.0, 1.0);
    double q = 0.0;
    for (std::size_t i = 0; i < rule.nodes.size(); ++i)
        for (std::size_t n = 0; n < 4; ++n)
            q += rule.weights[i] * static_cast<double>(n) * std::exp(-(1.0 - rule.nodes[i]) * lam(n)) *
                 std::exp(-rule.nodes[i] * lam(n));
    CHECK(q == doctest::Approx(expect).epsilon(1e-13));

    // small t: ||I₁||_1 / t → Σ μ n
    const double tiny = 1e-9;
    double sum_mu = 0.0;
    for (std::size_t n = 0; n < 12; ++n)
        sum_mu += kRef.mu * static_cast<double>(n);
    const GribovParams diag_only{1.0, 1.0, 0.1, 0.0};
    const double ratio = linalg::schatten_norm(i1_closed_form(tiny, Truncation{12, 0}, diag_only).values, 1.0) / tiny;
    CHECK(ratio == doctest::Approx(sum_mu).epsilon(1e-6));
}

TEST_CASE("second-order remainder and its bound")
{
    const Truncation tr{48, 0};
    const std::vector<double> grid{1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    std::vector<double> norms;
    for (double t : grid) {
        const I2Report r = i2_bound_report(t, tr, kRef, 0.5);
        CHECK(r.i2_norm <= r.bound);
        CHECK(r.bound >= r.bound_literal);
        CHECK(r.weight_g > 0.0);
        norms.push_back(r.i2_norm);
    }

    // with every level resolved (t·λ″λ_N small) the remainder is quadratic in t
    const Truncation resolved{8, 0};
    const std::vector<double> fine{1e-6, 1e-5, 1e-4};
    std::vector<double> fine_norms;
    for (double t : fine)
        fine_norms.push_back(i2_bound_report(t, resolved, kRef, 0.5).i2_norm);
    CHECK(loglog_slope(fine, fine_norms) >= 1.9);
    CHECK_THROWS_AS(i2_bound_report(0.1, tr, kRef, 0.4), InvalidArgument);
    CHECK_THROWS_AS(i2_bound_report(0.0, tr, kRef, 0.5), InvalidArgument);

    const std::vector<double> pw = shifted_power(Truncation{5, 0}, 0.5);
    CHECK(pw[0] == 1.0);
    CHECK(pw[4] == doctest::Approx(5.0));
}

TEST_CASE("trace asymptotics rows")
{
    const Truncation tr{48, 0};
    const std::vector<double> grid{1e-3, 1e-2, 1e-1};
    const std::vector<AsymptoticsRow> rows = trace_asymptotics_report(grid, tr, kRef, 0.5);
    REQUIRE(rows.size() == 3);
    for (const AsymptoticsRow& r : rows) {
        CHECK(std::abs(r.full_gap - r.i1_trace_norm) <= r.i2_trace_norm + 1e-10);
        CHECK(r.full_gap >= 0.0);
        CHECK(r.i1_trace <= r.i1_trace_norm * (1.0 + 1e-12));
        CHECK(r.delta == 0.5);
    }
    const std::vector<double> bad{1e-2, 1e-3};
    CHECK_THROWS_AS(trace_asymptotics_report(bad, tr, kRef, 0.5), InvalidArgument);

    const std::vector<double> ts{1e-6, 1e-5, 1e-4};
    std::vector<double> gaps;
    for (const AsymptoticsRow& r : trace_asymptotics_report(ts, Truncation{8, 0}, kRef, 0.5))
        gaps.push_back(r.full_gap);
    CHECK(std::abs(loglog_slope(ts, gaps) - 1.0) < 0.02);
}

TEST_CASE("log-log slope")
{
    const std::vector<double> x{1.0, 2.0, 4.0, 8.0};
    std::vector<double> y;
    for (double v : x)
        y.push_back(3.0 * std::pow(v, -1.5));
    CHECK(loglog_slope(x, y) == doctest::Approx(-1.5).epsilon(1e-13));
    CHECK_THROWS_AS(loglog_slope(std::vector<double>{1.0}, std::vector<double>{1.0}), InvalidArgument);
}

TEST_CASE("trotter products")
{
    const Truncation tr{24, 0};
    const std::vector<std::size_t> ns{2, 4, 8, 16, 32};
    const GribovParams free{1.0, 1.0, 0.0, 0.0};
    const TrotterReport zero = trotter_report(1.0, ns, tr, free);
    for (const TrotterRow& row : zero.rows)
        CHECK(row.deviation < 1e-14);

    const TrotterReport rep = trotter_report(1.0, ns, tr, kRef);
    CHECK(rep.monotone);
    for (const TrotterRow& row : rep.rows)
        CHECK(row.constant == doctest::Approx(row.deviation * row.n / std::log(double(row.n))));
    CHECK(rep.fitted_constant > 0.0);

    // a single step is just the product of the two factors
    const std::vector<std::size_t> one{2};
    const TrotterReport cubic = trotter_report(0.2, one, tr, kRef, fock::Regularizer::cubic);
    CHECK(cubic.rows[0].deviation > 0.0);

    const std::vector<std::size_t> bad{4, 2};
    CHECK_THROWS_AS(trotter_report(1.0, bad, tr, kRef), InvalidArgument);
    const std::vector<std::size_t> tiny{1};
    CHECK_THROWS_AS(trotter_report(1.0, tiny, tr, kRef), InvalidArgument);
}

TEST_CASE("schatten profiles")
{
    const Truncation tr{64, 0};
    const std::vector<double> ts{0.05, 0.1, 0.2, 0.4};
    const std::vector<double> ps{0.25, 1.0, 2.0};
    for (SemigroupKind which : {SemigroupKind::g_semigroup, SemigroupKind::h_semigroup}) {
        const auto table = schatten_profile(ts, ps, tr, kRef, which);
        for (std::size_t j = 0; j < ps.size(); ++j)
            for (std::size_t i = 1; i < ts.size(); ++i)
                CHECK(table[i][j] < table[i - 1][j]);
        for (const auto& row : table)
            for (double v : row)
                CHECK(std::isfinite(v));
    }

    const std::vector<double> s = semigroup_s_numbers(0.1, tr, kRef, SemigroupKind::h_semigroup);
    for (std::size_t n = 20; n <= tr.dim / 2; ++n)
        CHECK(s[n - 1] < std::pow(static_cast<double>(n), -6.0));

    const std::vector<double> bad_p{0.0};
    CHECK_THROWS_AS(schatten_profile(ts, bad_p, tr, kRef, SemigroupKind::g_semigroup), InvalidArgument);
}
