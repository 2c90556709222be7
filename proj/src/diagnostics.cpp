#include "gribov/diagnostics.hpp"

#include "gribov/dense_linalg.hpp"
#include "gribov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>

namespace gribov::diag {

namespace {

struct Problem
{
    BoundKind kind;
    double epsilon;
    fock::Tridiagonal h;
    std::vector<double> g;
};

Problem make_problem(BoundKind kind, double epsilon, const fock::Truncation& trunc,
                     const fock::GribovParams& params)
{
    return {kind, epsilon, fock::hamiltonian_bands(trunc, params, fock::Regularizer::none),
            fock::diag_power_values(trunc, 3)};
}

std::vector<cplx> apply(const fock::Tridiagonal& h, std::span<const cplx> x, bool adjoint)
{
    const std::size_t n = x.size();
    std::vector<cplx> y(n);
    for (std::size_t i = 0; i < n; ++i) {
        cplx acc = (adjoint ? std::conj(h.diag[i]) : h.diag[i]) * x[i];
        if (i > 0)
            acc += (adjoint ? std::conj(h.super[i - 1]) : h.sub[i - 1]) * x[i - 1];
        if (i + 1 < n)
            acc += (adjoint ? std::conj(h.sub[i]) : h.super[i]) * x[i + 1];
        y[i] = acc;
    }
    return y;
}

double norm(std::span<const cplx> x)
{
    double s = 0.0;
    for (const cplx& z : x)
        s += std::norm(z);
    return std::sqrt(s);
}

cplx dotc(std::span<const cplx> a, std::span<const cplx> b)
{
    cplx s{};
    for (std::size_t i = 0; i < a.size(); ++i)
        s += std::conj(a[i]) * b[i];
    return s;
}

void normalize(std::vector<cplx>& x)
{
    const double n = norm(x);
    for (cplx& z : x)
        z /= n;
}

// Objective at a unit vector; the gradient satisfies df = Re<grad, dφ>.
double evaluate(const Problem& p, std::span<const cplx> phi, std::vector<cplx>* grad)
{
    const std::size_t n = phi.size();
    const std::vector<cplx> hp = apply(p.h, phi, false);
    if (p.kind == BoundKind::relative) {
        std::vector<cplx> gp(n);
        for (std::size_t i = 0; i < n; ++i)
            gp[i] = p.g[i] * phi[i];
        const double nh = norm(hp), ng = norm(gp);
        if (grad) {
            grad->assign(n, cplx{});
            if (nh > 0.0) {
                const std::vector<cplx> hh = apply(p.h, hp, true);
                for (std::size_t i = 0; i < n; ++i)
                    (*grad)[i] += hh[i] / nh;
            }
            if (ng > 0.0)
                for (std::size_t i = 0; i < n; ++i)
                    (*grad)[i] -= p.epsilon * p.g[i] * gp[i] / ng;
        }
        return nh - p.epsilon * ng;
    }
    const cplx z = dotc(phi, hp);
    double quad = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        quad += p.g[i] * std::norm(phi[i]);
    const double az = std::abs(z);
    if (grad) {
        grad->assign(n, cplx{});
        if (az > 0.0) {
            const cplx u = std::conj(z) / az;
            const std::vector<cplx> hap = apply(p.h, phi, true);
            for (std::size_t i = 0; i < n; ++i)
                (*grad)[i] = u * hp[i] + std::conj(u) * hap[i];
        }
        for (std::size_t i = 0; i < n; ++i)
            (*grad)[i] -= 2.0 * p.epsilon * p.g[i] * phi[i];
    }
    return az - p.epsilon * quad;
}

// Diagonal curvature estimate of the objective, used to precondition the ascent.
std::vector<double> curvature(const Problem& p, std::span<const cplx> phi)
{
    const std::size_t n = phi.size();
    std::vector<double> c(n);
    double ng = 0.0, nh = 0.0;
    if (p.kind == BoundKind::relative) {
        const std::vector<cplx> hp = apply(p.h, phi, false);
        nh = std::max(norm(hp), 1e-3);
        for (std::size_t i = 0; i < n; ++i)
            ng += std::pow(p.g[i] * std::abs(phi[i]), 2);
        ng = std::max(std::sqrt(ng), 1.0);
    }
    for (std::size_t i = 0; i < n; ++i) {
        double band = std::abs(p.h.diag[i]);
        if (i > 0)
            band += std::abs(p.h.super[i - 1]);
        if (i + 1 < n)
            band += std::abs(p.h.sub[i]);
        c[i] = p.kind == BoundKind::relative ? p.epsilon * p.g[i] * p.g[i] / ng + band * band / nh
                                             : 2.0 * (p.epsilon * p.g[i] + band);
    }
    return c;
}

// Preconditioned projected gradient ascent on the unit sphere with backtracking.
double ascend(const Problem& p, std::vector<cplx>& phi, std::size_t max_iter)
{
    normalize(phi);
    const std::size_t n = phi.size();
    std::vector<cplx> grad, trial(n), dir(n);
    double f = evaluate(p, phi, &grad);
    double step = 1.0;
    for (std::size_t it = 0; it < max_iter; ++it) {
        const std::vector<double> c = curvature(p, phi);
        const double radial = dotc(phi, grad).real();
        for (std::size_t i = 0; i < n; ++i)
            dir[i] = (grad[i] - radial * phi[i]) / (1.0 + c[i]);
        const double back = dotc(phi, dir).real();
        for (std::size_t i = 0; i < n; ++i)
            dir[i] -= back * phi[i];
        const double slope = dotc(grad, dir).real();
        if (!(slope > 1e-28 * (1.0 + std::abs(f))))
            break;
        bool improved = false;
        for (int tries = 0; tries < 60; ++tries) {
            for (std::size_t i = 0; i < n; ++i)
                trial[i] = phi[i] + step * dir[i];
            normalize(trial);
            const double ft = evaluate(p, trial, nullptr);
            if (ft > f) {
                const double gain = ft - f;
                phi.swap(trial);
                f = evaluate(p, phi, &grad);
                improved = true;
                step = std::min(step * 2.0, 1e6);
                if (gain <= 1e-16 * (1.0 + std::abs(f)))
                    return f;
                break;
            }
            step *= 0.5;
        }
        if (!improved)
            break;
    }
    return f;
}

BoundReport bound_report(BoundKind kind, double epsilon, std::span<const std::size_t> dims,
                         const fock::GribovParams& params, const SupOptions& o)
{
    if (!(epsilon > 0.0) || !std::isfinite(epsilon))
        throw InvalidArgument("bound: epsilon must be > 0 (got " + std::to_string(epsilon) + ")");
    if (dims.empty())
        throw InvalidArgument("bound: empty dim list");
    for (std::size_t i = 0; i < dims.size(); ++i) {
        fock::Truncation{dims[i], 0}.validate();
        if (i > 0 && dims[i] <= dims[i - 1])
            throw InvalidArgument("bound: dims must be strictly ascending");
    }
    params.validate();

    BoundReport rep;
    rep.kind = kind;
    rep.epsilon = epsilon;
    rep.rel_tol = o.rel_tol;
    rep.seed = o.seed;
    rep.trunc_dims.assign(dims.begin(), dims.end());
    std::vector<cplx> carried;
    for (std::size_t n : dims) {
        const Problem p = make_problem(kind, epsilon, {n, 0}, params);
        std::mt19937_64 rng(o.seed + n);
        std::normal_distribution<double> gauss;
        double best = -std::numeric_limits<double>::infinity();
        std::vector<cplx> best_phi;
        const auto consider = [&](std::vector<cplx> phi) {
            const double f = ascend(p, phi, o.max_iterations);
            if (f > best) {
                best = f;
                best_phi = std::move(phi);
            }
        };
        for (std::size_t b = 0; b < n; ++b) {
            std::vector<cplx> e(n);
            e[b] = 1.0;
            consider(std::move(e));
        }
        for (std::size_t s = 0; s < o.random_starts; ++s) {
            // decay exponents 0..3 alternate flat and low-mode weighted starts
            const double decay = static_cast<double>(s % 4);
            std::vector<cplx> x(n);
            for (std::size_t i = 0; i < n; ++i)
                x[i] = cplx(gauss(rng), gauss(rng)) * std::pow(1.0 + static_cast<double>(i), -decay);
            consider(std::move(x));
        }
        if (!carried.empty()) {
            carried.resize(n);
            consider(carried);
        }
        rep.constants_by_dim.push_back(best);
        carried = best_phi;
    }
    rep.constant = rep.constants_by_dim.back();
    rep.maximizer = carried;
    if (rep.constants_by_dim.size() >= 2) {
        const double last = rep.constants_by_dim.back();
        const double prev = rep.constants_by_dim[rep.constants_by_dim.size() - 2];
        rep.stabilized = std::abs(last - prev) <= o.rel_tol * (1.0 + std::abs(last));
    }
    return rep;
}

} // namespace

BoundReport relative_bound(double epsilon, std::span<const std::size_t> dims,
                           const fock::GribovParams& params, const SupOptions& options)
{
    return bound_report(BoundKind::relative, epsilon, dims, params, options);
}

BoundReport form_bound(double epsilon, std::span<const std::size_t> dims,
                       const fock::GribovParams& params, const SupOptions& options)
{
    return bound_report(BoundKind::form, epsilon, dims, params, options);
}

double bound_objective(BoundKind kind, double epsilon, std::span<const cplx> phi,
                       const fock::Truncation& trunc, const fock::GribovParams& params)
{
    if (phi.size() != trunc.dim)
        throw InvalidArgument("bound_objective: vector length does not match the truncation");
    std::vector<cplx> x(phi.begin(), phi.end());
    if (norm(x) == 0.0)
        throw InvalidArgument("bound_objective: zero vector");
    normalize(x);
    return evaluate(make_problem(kind, epsilon, trunc, params), x, nullptr);
}

VerifyResult verify_bound(const BoundReport& report, const fock::GribovParams& params,
                          std::size_t samples, double slack, std::uint64_t seed)
{
    if (report.trunc_dims.empty())
        throw InvalidArgument("verify_bound: report has no dims");
    const std::size_t n = report.trunc_dims.back();
    const Problem p = make_problem(report.kind, report.epsilon, {n, 0}, params);
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss;
    std::uniform_real_distribution<double> unif(0.0, 4.0);
    VerifyResult r;
    r.samples = samples;
    r.worst_excess = -std::numeric_limits<double>::infinity();
    std::vector<cplx> x(n);
    for (std::size_t s = 0; s < samples; ++s) {
        const int mode = static_cast<int>(s % 3);
        const double decay = mode == 0 ? 0.0 : unif(rng);
        const double jitter = mode == 2 ? std::pow(10.0, -unif(rng) - 1.0) : 1.0;
        for (std::size_t i = 0; i < n; ++i) {
            const cplx z = cplx(gauss(rng), gauss(rng)) * std::pow(1.0 + static_cast<double>(i), -decay);
            if (mode == 2 && report.maximizer.size() == n)
                x[i] = report.maximizer[i] + jitter * z;
            else
                x[i] = z;
        }
        normalize(x);
        const double excess = evaluate(p, x, nullptr) - report.constant;
        r.worst_excess = std::max(r.worst_excess, excess);
        if (excess > slack)
            ++r.violations;
    }
    return r;
}

double accretivity_floor(const fock::Truncation& trunc, const fock::GribovParams& params)
{
    params.validate();
    params.require_accretive();
    trunc.validate();
    const CMatrix m = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values;
    CMatrix herm = (m + m.adjoint()) * cplx(0.5);
    for (std::size_t i = 0; i < herm.rows(); ++i)
        herm(i, i) = herm(i, i).real();
    return linalg::hermitian_eigenvalues(herm).front();
}

SubordinationReport subordination_norm(double delta, std::span<const std::size_t> dims,
                                       const fock::GribovParams& params)
{
    if (!(delta > 0.0) || !std::isfinite(delta))
        throw InvalidArgument("subordination_norm: delta must be > 0 (got " + std::to_string(delta) + ")");
    if (dims.empty())
        throw InvalidArgument("subordination_norm: empty dim list");
    params.validate();
    SubordinationReport rep;
    rep.delta = delta;
    for (std::size_t i = 0; i < dims.size(); ++i) {
        const fock::Truncation trunc{dims[i], 0};
        trunc.validate();
        if (i > 0 && dims[i] <= dims[i - 1])
            throw InvalidArgument("subordination_norm: dims must be strictly ascending");
        std::vector<double> w = fock::diag_power_values(trunc, 3);
        for (double& x : w)
            x = std::pow(x + 1.0, -delta);
        const CMatrix m = scale_cols(fock::build_interaction(trunc, params).values, w);
        rep.rows.push_back({dims[i], linalg::operator_norm(m)});
    }
    if (rep.rows.size() >= 2) {
        const double last = rep.rows.back().norm, prev = rep.rows[rep.rows.size() - 2].norm;
        rep.last_ratio = prev > 0.0 ? last / prev : 1.0;
        rep.trend = rep.last_ratio - 1.0 <= 0.01 ? Trend::plateau : Trend::growing;
    }
    return rep;
}

std::string to_string(Trend t) { return t == Trend::plateau ? "plateau" : "growing"; }

CarlemanFit carleman_exponent_fit(OperatorKind kind, const fock::Truncation& trunc,
                                  const fock::GribovParams& params, std::size_t window_lo,
                                  std::size_t window_hi, double t)
{
    trunc.validate();
    params.validate();
    if (window_lo < 4 || window_hi <= window_lo || window_hi > trunc.dim / 2)
        throw InvalidArgument("carleman_exponent_fit: window [" + std::to_string(window_lo) + ", " +
                              std::to_string(window_hi) + "] must satisfy 4 <= lo < hi <= dim/2 = " +
                              std::to_string(trunc.dim / 2));
    const bool semigroup = kind == OperatorKind::g_semigroup || kind == OperatorKind::h_semigroup;
    if (semigroup && !(t > 0.0))
        throw InvalidArgument("carleman_exponent_fit: t must be > 0");

    CarlemanFit fit;
    fit.kind = kind;
    fit.window_lo = window_lo;
    fit.window_hi = window_hi;
    const std::vector<double> g = fock::diag_power_values(trunc, 3);
    std::vector<double> s;
    switch (kind) {
    case OperatorKind::g_resolvent:
        for (double x : g)
            s.push_back(1.0 / (x + 1.0));
        break;
    case OperatorKind::g_semigroup:
        for (double x : g)
            s.push_back(std::exp(-t * params.lambda_cubic * x));
        break;
    case OperatorKind::h_resolvent: {
        CMatrix h = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values;
        h += CMatrix::identity(trunc.dim);
        s = linalg::singular_values(linalg::inverse(h)).s_numbers;
        break;
    }
    case OperatorKind::h_semigroup: {
        const CMatrix h = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values;
        s = linalg::singular_values(linalg::matrix_exp(h, t)).s_numbers;
        break;
    }
    }
    std::sort(s.begin(), s.end(), std::greater<>());
    fit.s_numbers = s;

    if (semigroup) {
        for (int p = 1; p <= 6; ++p)
            for (std::size_t n = window_lo; n <= window_hi; ++n)
                if (s[n - 1] > std::pow(static_cast<double>(n), -p))
                    fit.violated_p = p;
        return fit;
    }
    double mx = 0.0, my = 0.0;
    const double cnt = static_cast<double>(window_hi - window_lo + 1);
    for (std::size_t n = window_lo; n <= window_hi; ++n) {
        mx += std::log(static_cast<double>(n)) / cnt;
        my += std::log(s[n - 1]) / cnt;
    }
    double sxy = 0.0, sxx = 0.0, syy = 0.0;
    for (std::size_t n = window_lo; n <= window_hi; ++n) {
        const double dx = std::log(static_cast<double>(n)) - mx, dy = std::log(s[n - 1]) - my;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    fit.exponent = sxy / sxx;
    fit.r2 = syy > 0.0 ? sxy * sxy / (sxx * syy) : 1.0;
    return fit;
}

std::size_t small_t_dim(double t)
{
    return std::max<std::size_t>(8, static_cast<std::size_t>(std::ceil(4.0 * std::cbrt(1.0 / t))));
}

std::vector<SmallTRow> small_t_limits(std::span<const double> t_grid, std::size_t cap)
{
    if (t_grid.empty())
        throw InvalidArgument("small_t_limits: empty t grid");
    std::vector<SmallTRow> rows;
    for (double t : t_grid) {
        if (!(t > 0.0) || !std::isfinite(t))
            throw InvalidArgument("small_t_limits: t must be > 0 (got " + std::to_string(t) + ")");
        const std::size_t n = small_t_dim(t);
        if (n > cap)
            throw InvalidArgument("small_t_limits: t = " + std::to_string(t) + " needs N = " +
                                  std::to_string(n) + " above the cap " + std::to_string(cap));
        SmallTRow row;
        row.t = t;
        row.dim = n;
        for (double x : fock::diag_power_values(fock::Truncation{n, 0}, 3)) {
            const double e = std::exp(-t * x);
            row.scaled_norm = std::max(row.scaled_norm, t * x * e);
            row.trace_norm += e;
        }
        row.scaled_trace = std::cbrt(t) * (row.trace_norm - 3.0);
        rows.push_back(row);
    }
    return rows;
}

} // namespace gribov::diag
