#include "gribov/dense_linalg.hpp"
#include "gribov/diagnostics.hpp"
#include "gribov/errors.hpp"
#include "gribov/semigroup.hpp"

#include "doctest.h"

#include <cmath>
#include <numbers>

using namespace gribov;
using namespace gribov::diag;
using fock::GribovParams;
using fock::Truncation;

namespace {

const GribovParams kRef{1.0, 1.0, 0.1, 0.05};

double lam(double n) { return n * (n - 1) * (n - 2); }

// Diagonal H = μN: sup of sqrt(a·p) − ε sqrt(b·p) over the simplex lies on an edge.
double diagonal_relative_oracle(double mu, double eps, std::size_t dim)
{
    double best = -1e300;
    for (std::size_t i = 0; i < dim; ++i)
        for (std::size_t j = i; j < dim; ++j)
            for (int k = 0; k <= 2000; ++k) {
                const double w = k / 2000.0;
                const double a = w * std::pow(mu * i, 2) + (1 - w) * std::pow(mu * j, 2);
                const double b = w * std::pow(lam(i), 2) + (1 - w) * std::pow(lam(j), 2);
                best = std::max(best, std::sqrt(a) - eps * std::sqrt(b));
            }
    return best;
}

// |<Hφ,φ>| − ε<Gφ,φ> = max_θ Re(e^{iθ}<Hφ,φ>) − ε<Gφ,φ>, so the sup is
// max_θ λ_max(Herm(e^{iθ}H) − εG).
double form_oracle(double eps, const Truncation& tr, const GribovParams& p)
{
    const CMatrix h = fock::build_interaction(tr, p).values;
    const auto top = [&](double theta) {
        const cplx ph = std::polar(1.0, theta);
        CMatrix m = (h * ph + (h * ph).adjoint()) * cplx(0.5);
        for (std::size_t i = 0; i < tr.dim; ++i)
            m(i, i) = m(i, i).real() - eps * lam(static_cast<double>(i));
        return linalg::hermitian_eigenvalues(m).back();
    };
    const double step = 2.0 * std::numbers::pi / 720.0;
    double best_theta = 0.0, best = -1e300;
    for (int k = 0; k < 720; ++k)
        if (const double v = top(k * step); v > best) {
            best = v;
            best_theta = k * step;
        }
    // golden-section refinement around the best grid point
    const double g = (std::sqrt(5.0) - 1.0) / 2.0;
    double a = best_theta - step, b = best_theta + step;
    for (int it = 0; it < 80; ++it) {
        const double c = b - g * (b - a), d = a + g * (b - a);
        if (top(c) > top(d))
            b = d;
        else
            a = c;
    }
    return std::max(best, top(0.5 * (a + b)));
}

} // namespace

TEST_CASE("relative bound: diagonal case")
{
    const GribovParams p{1.0, 1.0, 1.0, 0.0};
    const std::vector<std::size_t> dims{8, 16};
    for (double eps : {0.1, 1.0}) {
        const BoundReport r = relative_bound(eps, dims, p);
        double basis = -1e300;
        for (std::size_t n = 0; n < 16; ++n)
            basis = std::max(basis, n - eps * lam(static_cast<double>(n)));
        CHECK(r.constant >= basis - 1e-12);
        CHECK(r.constant == doctest::Approx(diagonal_relative_oracle(1.0, eps, 8)).epsilon(1e-6));
        CHECK(r.stabilized);
        CHECK(r.constants_by_dim.size() == 2);
    }
}

TEST_CASE("form bound: diagonal case and the rotated-eigenvalue oracle")
{
    const GribovParams diag_p{1.0, 1.0, 1.0, 0.0};
    const std::vector<std::size_t> dims{10, 20};
    for (double eps : {0.1, 1.0}) {
        double basis = -1e300;
        for (std::size_t n = 0; n < 20; ++n)
            basis = std::max(basis, n - eps * lam(static_cast<double>(n)));
        CHECK(form_bound(eps, dims, diag_p).constant == doctest::Approx(basis).epsilon(1e-12));
    }
    const GribovParams strong{1.0, 1.0, 0.3, 0.8};
    const std::vector<std::size_t> small{12};
    for (double eps : {0.1, 1.0}) {
        const double oracle = form_oracle(eps, Truncation{12, 0}, strong);
        const double got = form_bound(eps, small, strong).constant;
        CHECK(got <= oracle + 1e-9);
        CHECK(got >= oracle - 1e-8 * (1.0 + std::abs(oracle)));
    }
}

TEST_CASE("bound reports stabilize and survive random verification")
{
    const std::vector<std::size_t> dims{24, 48};
    for (BoundKind kind : {BoundKind::relative, BoundKind::form}) {
        const BoundReport r = kind == BoundKind::relative ? relative_bound(0.1, dims, kRef)
                                                          : form_bound(0.1, dims, kRef);
        CHECK(r.stabilized);
        CHECK(std::isfinite(r.constant));
        CHECK(bound_objective(kind, 0.1, r.maximizer, Truncation{48, 0}, kRef) ==
              doctest::Approx(r.constant).epsilon(1e-12));
        const VerifyResult v = verify_bound(r, kRef, 2000);
        CHECK(v.violations == 0);
        BoundReport low = r;
        low.constant -= 0.05;
        CHECK(verify_bound(low, kRef, 2000).violations > 0);
    }
}

TEST_CASE("bound argument checks")
{
    const std::vector<std::size_t> dims{16};
    CHECK_THROWS_AS(relative_bound(0.0, dims, kRef), InvalidArgument);
    CHECK_THROWS_AS(form_bound(-1.0, dims, kRef), InvalidArgument);
    const std::vector<std::size_t> bad{32, 16};
    CHECK_THROWS_AS(relative_bound(0.1, bad, kRef), InvalidArgument);
    const std::vector<std::size_t> none;
    CHECK_THROWS_AS(relative_bound(0.1, none, kRef), InvalidArgument);
}

TEST_CASE("accretivity floor")
{
    for (double mu : {0.1, 1.0})
        for (double lc : {0.0, 1.0})
            for (double l : {0.0, 0.5}) {
                const GribovParams p{lc, 1.0, mu, l};
                CAPTURE(mu);
                CAPTURE(l);
                CHECK(std::abs(accretivity_floor(Truncation{40, 1}, p) - mu) <= 1e-12);
                CHECK(std::abs(accretivity_floor(Truncation{40, 0}, p)) <= 1e-12);
            }
    CHECK_THROWS_AS(accretivity_floor(Truncation{16, 1}, GribovParams{1.0, 1.0, 0.0, 0.1}), InvalidArgument);
    CHECK_THROWS_AS(accretivity_floor(Truncation{16, 1}, GribovParams{-1.0, 1.0, 0.1, 0.1}), InvalidArgument);
}

TEST_CASE("subordination norms")
{
    const GribovParams diag_p{1.0, 1.0, 1.0, 0.0};
    const std::vector<std::size_t> dims{16, 32};
    const SubordinationReport d = subordination_norm(1.0, dims, diag_p);
    double expect = 0.0;
    for (std::size_t n = 0; n < 16; ++n)
        expect = std::max(expect, n / (lam(static_cast<double>(n)) + 1.0));
    CHECK(d.rows[0].norm == doctest::Approx(expect).epsilon(1e-13));
    CHECK(d.trend == Trend::plateau);

    const std::vector<std::size_t> grid{25, 50, 100, 200};
    const SubordinationReport half = subordination_norm(0.5, grid, kRef);
    const SubordinationReport less = subordination_norm(0.4, grid, kRef);
    for (std::size_t i = 1; i < grid.size(); ++i) {
        CHECK(half.rows[i].norm >= half.rows[i - 1].norm * (1.0 - 1e-12));
        CHECK(less.rows[i].norm >= less.rows[i - 1].norm * (1.0 - 1e-12));
    }
    CHECK(half.trend == Trend::plateau);
    CHECK(less.trend == Trend::growing);
    CHECK(to_string(less.trend) == "growing");
    CHECK_THROWS_AS(subordination_norm(0.0, grid, kRef), InvalidArgument);
}

TEST_CASE("Carleman exponents")
{
    const Truncation tr{400, 0};
    const CarlemanFit g = carleman_exponent_fit(OperatorKind::g_resolvent, tr, kRef, 20, 200);
    CHECK(g.exponent >= -3.1);
    CHECK(g.exponent <= -2.9);
    CHECK(g.r2 > 0.999);
    // G alone: identical for any coupling
    const CarlemanFit g2 =
        carleman_exponent_fit(OperatorKind::g_resolvent, tr, GribovParams{1.0, 1.0, 3.0, 2.0}, 20, 200);
    CHECK(g2.exponent == g.exponent);

    const CarlemanFit h = carleman_exponent_fit(OperatorKind::h_resolvent, tr, kRef, 20, 200);
    CHECK(h.exponent >= -3.1);
    CHECK(h.exponent <= -2.9);

    CHECK(carleman_exponent_fit(OperatorKind::g_semigroup, tr, kRef, 20, 100, 0.1).violated_p == 0);
    CHECK(carleman_exponent_fit(OperatorKind::h_semigroup, Truncation{64, 0}, kRef, 20, 32, 0.1).violated_p == 0);
    // at tiny t the first hundred s-numbers are still close to 1
    CHECK(carleman_exponent_fit(OperatorKind::g_semigroup, tr, kRef, 20, 100, 1e-7).violated_p == 6);

    CHECK_THROWS_AS(carleman_exponent_fit(OperatorKind::g_resolvent, tr, kRef, 2, 50), InvalidArgument);
    CHECK_THROWS_AS(carleman_exponent_fit(OperatorKind::g_resolvent, tr, kRef, 20, 250), InvalidArgument);
    CHECK_THROWS_AS(carleman_exponent_fit(OperatorKind::g_resolvent, tr, kRef, 50, 50), InvalidArgument);
}

TEST_CASE("small-t limits")
{
    CHECK(small_t_dim(1e-6) == 400);
    CHECK(small_t_dim(1.0) == 8);
    const std::vector<double> grid{1e-6, 1e-5, 1e-4, 1e-3};
    const std::vector<SmallTRow> rows = small_t_limits(grid);
    CHECK(std::abs(rows[0].scaled_norm - std::exp(-1.0)) < 1e-3);
    CHECK(std::abs(rows[0].scaled_trace / std::tgamma(4.0 / 3.0) - 1.0) < 0.02);
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].trace_norm < rows[i - 1].trace_norm);
    std::vector<double> tr;
    for (const SmallTRow& r : rows)
        tr.push_back(r.trace_norm);
    const double slope = semigroup::loglog_slope(grid, tr);
    CHECK(slope >= -0.35);
    CHECK(slope <= -0.31);

    const std::vector<double> tiny{1e-9};
    CHECK_THROWS_AS(small_t_limits(tiny), InvalidArgument);
    const std::vector<double> neg{-1.0};
    CHECK_THROWS_AS(small_t_limits(neg), InvalidArgument);
}
