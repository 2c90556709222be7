#include "gribov/semigroup.hpp"

#include "gribov/dense_linalg.hpp"
#include "gribov/errors.hpp"
#include "gribov/kernels.hpp"
#include "gribov/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>

namespace gribov::semigroup {

namespace {

void require_time(double t, bool strictly_positive, const char* who)
{
    if (!std::isfinite(t) || t < 0.0 || (strictly_positive && t == 0.0))
        throw InvalidArgument(std::string(who) + ": t must be " +
                              (strictly_positive ? "> 0" : ">= 0") + " (got " + std::to_string(t) + ")");
}

std::vector<double> cubic_levels(const fock::Truncation& trunc, double scale)
{
    std::vector<double> a = fock::diag_power_values(trunc, 3);
    for (double& x : a)
        x *= scale;
    return a;
}

double trace_norm(const CMatrix& m) { return linalg::schatten_norm(m, 1.0); }

// y = V x for tridiagonal V and dense x.
CMatrix apply_bands(const fock::Tridiagonal& v, const CMatrix& x)
{
    const std::size_t n = x.rows(), cols = x.cols();
    const simd::KernelTable& k = simd::active();
    CMatrix y(n, cols);
    for (std::size_t i = 0; i < n; ++i) {
        if (v.diag[i] != cplx{})
            k.axpy(cols, v.diag[i], x.row(i), y.row(i));
        if (i > 0 && v.sub[i - 1] != cplx{})
            k.axpy(cols, v.sub[i - 1], x.row(i - 1), y.row(i));
        if (i + 1 < n && v.super[i] != cplx{})
            k.axpy(cols, v.super[i], x.row(i + 1), y.row(i));
    }
    return y;
}

double bands_norm1(const fock::Tridiagonal& v)
{
    const std::size_t n = v.dim();
    double best = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        double s = std::abs(v.diag[j]);
        if (j > 0)
            s += std::abs(v.super[j - 1]);
        if (j + 1 < n)
            s += std::abs(v.sub[j]);
        best = std::max(best, s);
    }
    return best;
}

struct RawDyson
{
    std::vector<CMatrix> terms;
    std::size_t doublings = 0;
};

RawDyson dyson_raw(std::size_t max_k, double t, const fock::Truncation& trunc,
                   const fock::GribovParams& params, std::size_t q, double base_step)
{
    const std::size_t n = trunc.dim;
    const std::vector<double> a = cubic_levels(trunc, params.lambda_cubic);
    const fock::Tridiagonal v = fock::hamiltonian_bands(trunc, params, fock::Regularizer::none);

    double rate = bands_norm1(v);
    for (double x : a)
        rate = std::max(rate, std::abs(x));
    std::size_t m = 0;
    if (t * rate > base_step)
        m = static_cast<std::size_t>(std::ceil(std::log2(t * rate / base_step)));
    const double tau = std::ldexp(t, -static_cast<int>(m));

    // collocation nodes on [0, τ] and evaluation points (nodes plus τ)
    const quad::Rule nodes = quad::gauss_legendre(q, 0.0, tau);
    std::vector<double> eval(nodes.nodes);
    eval.push_back(tau);
    const auto lagrange = [&](std::size_t l, double u) {
        double p = 1.0;
        for (std::size_t j = 0; j < q; ++j)
            if (j != l)
                p *= (u - nodes.nodes[j]) / (nodes.nodes[l] - nodes.nodes[j]);
        return p;
    };
    // w[i][l][r] = ∫_0^{s_i} e^{−(s_i−u) a_r} L_l(u) du
    std::vector<std::vector<std::vector<double>>> w(
        eval.size(), std::vector<std::vector<double>>(q, std::vector<double>(n, 0.0)));
    for (std::size_t i = 0; i < eval.size(); ++i) {
        const quad::Rule inner = quad::gauss_legendre(q + 8, 0.0, eval[i]);
        for (std::size_t r = 0; r < inner.nodes.size(); ++r) {
            const double u = inner.nodes[r];
            for (std::size_t l = 0; l < q; ++l) {
                const double wl = inner.weights[r] * lagrange(l, u);
                for (std::size_t row = 0; row < n; ++row)
                    w[i][l][row] += wl * std::exp(-(eval[i] - u) * a[row]);
            }
        }
    }

    // S_k at the evaluation points; index q is the endpoint τ
    std::vector<CMatrix> prev(eval.size()), cur(eval.size());
    RawDyson out;
    out.terms.assign(max_k + 1, CMatrix());
    for (std::size_t i = 0; i < eval.size(); ++i) {
        const std::vector<double> e = diag_semigroup_values(a, 1.0, eval[i]);
        prev[i] = CMatrix::from_diagonal(std::span<const double>(e));
    }
    out.terms[0] = prev[q];
    const simd::KernelTable& kern = simd::active();
    for (std::size_t k = 1; k <= max_k; ++k) {
        std::vector<CMatrix> y(q);
        for (std::size_t l = 0; l < q; ++l)
            y[l] = apply_bands(v, prev[l]);
        for (std::size_t i = 0; i < eval.size(); ++i) {
            CMatrix s(n, n);
            for (std::size_t l = 0; l < q; ++l)
                for (std::size_t row = 0; row < n; ++row)
                    kern.axpy(n, -w[i][l][row], y[l].row(row), s.row(row));
            cur[i] = std::move(s);
        }
        out.terms[k] = cur[q];
        prev.swap(cur);
    }

    for (std::size_t d = 0; d < m; ++d) {
        std::vector<CMatrix> next(max_k + 1);
        for (std::size_t k = 0; k <= max_k; ++k) {
            CMatrix acc(n, n);
            for (std::size_t b = 0; b <= k; ++b)
                acc += out.terms[k - b] * out.terms[b];
            next[k] = std::move(acc);
        }
        out.terms.swap(next);
    }
    // S_0 is known exactly; repeated squaring would only add rounding
    const std::vector<double> e0 = diag_semigroup_values(a, 1.0, t);
    out.terms[0] = CMatrix::from_diagonal(std::span<const double>(e0));
    out.doublings = m;
    return out;
}

void check_dyson_args(std::size_t max_k, double t, const DysonOptions& o)
{
    require_time(t, false, "dyson_terms");
    if (max_k > o.order_cap)
        throw InvalidArgument("dyson_terms: order " + std::to_string(max_k) + " exceeds the cap " +
                              std::to_string(o.order_cap));
    if (o.quad_order < 4)
        throw InvalidArgument("dyson_terms: quad_order must be >= 4 (got " +
                              std::to_string(o.quad_order) + ")");
    if (!(o.base_step > 0.0))
        throw InvalidArgument("dyson_terms: base_step must be > 0");
}

double term_mismatch(const std::vector<CMatrix>& a, const std::vector<CMatrix>& b)
{
    double worst = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k)
        worst = std::max(worst, (a[k] - b[k]).frobenius_norm());
    const double ref = a[0].frobenius_norm();
    return ref > 0.0 ? worst / ref : worst;
}

} // namespace

std::vector<double> diag_semigroup_values(std::span<const double> g, double scale, double t)
{
    require_time(t, false, "diag_semigroup");
    std::vector<double> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i)
        out[i] = t == 0.0 ? 1.0 : std::exp(-t * scale * g[i]);
    return out;
}

fock::FockMatrix diag_semigroup(const fock::FockMatrix& g, double scale, double t)
{
    if (!g.values.is_diagonal())
        throw InvalidArgument("diag_semigroup: input must be diagonal");
    std::vector<double> d(g.dim());
    for (std::size_t i = 0; i < d.size(); ++i)
        d[i] = g(i, i).real();
    const std::vector<double> e = diag_semigroup_values(d, scale, t);
    return {CMatrix::from_diagonal(std::span<const double>(e)), g.offset};
}

DysonTerms dyson_terms(std::size_t max_k, double t, const fock::Truncation& trunc,
                       const fock::GribovParams& params, const DysonOptions& options)
{
    check_dyson_args(max_k, t, options);
    trunc.validate();
    params.validate();
    RawDyson base = dyson_raw(max_k, t, trunc, params, options.quad_order, options.base_step);
    DysonTerms out;
    out.doublings = base.doublings;
    if (options.certify) {
        const RawDyson fine =
            dyson_raw(max_k, t, trunc, params, 2 * options.quad_order, options.base_step);
        out.certification = term_mismatch(base.terms, fine.terms);
        if (!(out.certification <= options.tol))
            throw ConvergenceError("dyson_terms: doubling the collocation order changed the terms by " +
                                       std::to_string(out.certification) + " (tol " +
                                       std::to_string(options.tol) + ")",
                                   2 * options.quad_order);
    }
    out.terms = std::move(base.terms);
    return out;
}

fock::FockMatrix dyson_term(std::size_t k, double t, const fock::Truncation& trunc,
                            const fock::GribovParams& params, std::size_t quad_order)
{
    DysonOptions o;
    o.quad_order = quad_order;
    DysonTerms d = dyson_terms(k, t, trunc, params, o);
    return {std::move(d.terms[k]), trunc.offset};
}

DysonSumReport dyson_sum_report(std::size_t max_k, double t, const fock::Truncation& trunc,
                                const fock::GribovParams& params, const DysonOptions& options)
{
    if (max_k < 1)
        throw InvalidArgument("dyson_sum_report: K must be >= 1");
    check_dyson_args(max_k, t, options);
    trunc.validate();
    params.validate();
    const RawDyson base = dyson_raw(max_k, t, trunc, params, options.quad_order, options.base_step);
    const RawDyson fine =
        dyson_raw(max_k, t, trunc, params, 2 * options.quad_order, options.base_step);
    const CMatrix f =
        linalg::matrix_exp(fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values, t);

    DysonSumReport rep;
    rep.certification = term_mismatch(base.terms, fine.terms);
    CMatrix partial(trunc.dim, trunc.dim), partial_fine(trunc.dim, trunc.dim);
    for (std::size_t k = 0; k <= max_k; ++k) {
        partial += base.terms[k];
        partial_fine += fine.terms[k];
        rep.rows.push_back({k, trace_norm(partial - f)});
    }
    rep.refined_last = trace_norm(partial_fine - f);
    return rep;
}

fock::FockMatrix i1_closed_form(double t, const fock::Truncation& trunc, const fock::GribovParams& params)
{
    require_time(t, true, "i1_closed_form");
    const std::vector<double> a = cubic_levels(trunc, params.lambda_cubic);
    const fock::Tridiagonal v = fock::hamiltonian_bands(trunc, params, fock::Regularizer::none);
    const std::size_t n = trunc.dim;
    // ∫_0^t e^{−(t−s)x} e^{−s y} ds, symmetric in (x, y)
    const auto kernel = [t](double x, double y) {
        const double lo = std::min(x, y), hi = std::max(x, y);
        const double d = hi - lo;
        if (d == 0.0)
            return t * std::exp(-t * lo);
        return std::exp(-t * lo) * (-std::expm1(-t * d)) / d;
    };
    fock::FockMatrix out{CMatrix(n, n), trunc.offset};
    for (std::size_t i = 0; i < n; ++i) {
        out.values(i, i) = v.diag[i] * kernel(a[i], a[i]);
        if (i + 1 < n) {
            out.values(i + 1, i) = v.sub[i] * kernel(a[i + 1], a[i]);
            out.values(i, i + 1) = v.super[i] * kernel(a[i], a[i + 1]);
        }
    }
    return out;
}

std::vector<double> shifted_power(const fock::Truncation& trunc, double p)
{
    std::vector<double> g = fock::diag_power_values(trunc, 3);
    for (double& x : g)
        x = std::pow(x + 1.0, p);
    return g;
}

I2Report i2_bound_report(double t, const fock::Truncation& trunc, const fock::GribovParams& params,
                         double delta)
{
    require_time(t, true, "i2_bound_report");
    if (!(delta >= 0.5) || !std::isfinite(delta))
        throw InvalidArgument("i2_bound_report: delta must be >= 1/2 (got " + std::to_string(delta) + ")");
    trunc.validate();
    params.validate();
    const CMatrix h = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values;
    const CMatrix v = fock::build_interaction(trunc, params).values;
    const std::vector<double> a = cubic_levels(trunc, params.lambda_cubic);

    const CMatrix f = linalg::matrix_exp(h, t);
    const std::vector<double> e = diag_semigroup_values(a, 1.0, t);
    CMatrix i2 = f - CMatrix::from_diagonal(std::span<const double>(e));
    i2 += i1_closed_form(t, trunc, params).values;

    I2Report r;
    r.i2_norm = trace_norm(i2);
    const std::vector<double> up = shifted_power(trunc, delta), down = shifted_power(trunc, -delta);
    r.subordination = linalg::operator_norm(scale_cols(v, down));
    const std::vector<double> e3 = diag_semigroup_values(a, 1.0, t / 3.0);
    double wg = 0.0;
    for (std::size_t i = 0; i < e3.size(); ++i)
        wg += up[i] * e3[i];
    r.weight_g = wg;
    r.weight_h = trace_norm(scale_rows(up, linalg::matrix_exp(h, t / 3.0)));
    const double pre = r.subordination * r.subordination * t * t;
    r.bound_literal = pre * r.weight_g;
    r.bound = pre * std::max(r.weight_g, r.weight_h);
    return r;
}

std::vector<AsymptoticsRow> trace_asymptotics_report(std::span<const double> t_grid,
                                                     const fock::Truncation& trunc,
                                                     const fock::GribovParams& params, double delta)
{
    if (t_grid.empty())
        throw InvalidArgument("trace_asymptotics_report: empty t grid");
    for (std::size_t i = 0; i < t_grid.size(); ++i) {
        require_time(t_grid[i], true, "trace_asymptotics_report");
        if (i > 0 && !(t_grid[i] > t_grid[i - 1]))
            throw InvalidArgument("trace_asymptotics_report: t grid must be strictly ascending");
    }
    const CMatrix h = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values;
    const CMatrix v = fock::build_interaction(trunc, params).values;
    const std::vector<double> a = cubic_levels(trunc, params.lambda_cubic);
    std::vector<AsymptoticsRow> rows;
    for (double t : t_grid) {
        AsymptoticsRow row;
        row.t = t;
        row.delta = delta;
        const CMatrix f = linalg::matrix_exp(h, t);
        const std::vector<double> e = diag_semigroup_values(a, 1.0, t);
        const CMatrix gap = f - CMatrix::from_diagonal(std::span<const double>(e));
        const CMatrix i1 = i1_closed_form(t, trunc, params).values;
        row.full_gap = trace_norm(gap);
        row.i1_trace_norm = trace_norm(i1);
        row.i1_trace = std::abs(i1.trace());
        row.first_order = t * trace_norm(scale_rows(e, v));
        const I2Report r2 = i2_bound_report(t, trunc, params, delta);
        row.i2_trace_norm = r2.i2_norm;
        row.i2_bound = r2.bound;
        row.weight = r2.weight_g;
        rows.push_back(row);
    }
    return rows;
}

double loglog_slope(std::span<const double> x, std::span<const double> y)
{
    if (x.size() != y.size() || x.size() < 2)
        throw InvalidArgument("loglog_slope: need at least two matching points");
    double mx = 0.0, my = 0.0;
    const double n = static_cast<double>(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) {
        if (!(x[i] > 0.0) || !(y[i] > 0.0))
            throw InvalidArgument("loglog_slope: values must be positive");
        mx += std::log(x[i]) / n;
        my += std::log(y[i]) / n;
    }
    double sxy = 0.0, sxx = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) {
        const double dx = std::log(x[i]) - mx;
        sxy += dx * (std::log(y[i]) - my);
        sxx += dx * dx;
    }
    return sxy / sxx;
}

TrotterReport trotter_report(double t, std::span<const std::size_t> n_list, const fock::Truncation& trunc,
                             const fock::GribovParams& params, fock::Regularizer regularizer)
{
    require_time(t, true, "trotter_report");
    if (n_list.empty())
        throw InvalidArgument("trotter_report: empty n list");
    for (std::size_t i = 0; i < n_list.size(); ++i) {
        if (n_list[i] < 2)
            throw InvalidArgument("trotter_report: every n must be >= 2");
        if (i > 0 && n_list[i] <= n_list[i - 1])
            throw InvalidArgument("trotter_report: n list must be strictly ascending");
    }
    if (regularizer == fock::Regularizer::none)
        throw InvalidArgument("trotter_report: regularizer must be quartic or cubic");
    trunc.validate();
    params.validate();

    std::vector<double> r;
    if (regularizer == fock::Regularizer::quartic) {
        r = fock::diag_power_values(trunc, 2);
        for (double& x : r)
            x *= params.lambda_quartic;
    } else {
        r = cubic_levels(trunc, params.lambda_cubic);
    }
    const CMatrix v = fock::build_interaction(trunc, params).values;
    const CMatrix f = linalg::matrix_exp(fock::build_hamiltonian(trunc, params, regularizer).values, t);

    TrotterReport rep;
    for (std::size_t n : n_list) {
        const double tau = t / static_cast<double>(n);
        const CMatrix step = scale_rows(diag_semigroup_values(r, 1.0, tau), linalg::matrix_exp(v, tau));
        CMatrix power = CMatrix::identity(trunc.dim), base = step;
        for (std::size_t e = n; e > 0; e >>= 1) {
            if (e & 1U)
                power = power * base;
            if (e > 1)
                base = base * base;
        }
        TrotterRow row;
        row.n = n;
        row.deviation = trace_norm(power - f);
        row.constant = row.deviation * static_cast<double>(n) / std::log(static_cast<double>(n));
        rep.rows.push_back(row);
    }

    double sxy = 0.0, sxx = 0.0;
    for (const TrotterRow& row : rep.rows) {
        const double x = std::log(static_cast<double>(row.n)) / static_cast<double>(row.n);
        sxy += x * row.deviation;
        sxx += x * x;
    }
    rep.fitted_constant = sxy / sxx;
    double res = 0.0;
    std::size_t used = 0;
    for (const TrotterRow& row : rep.rows) {
        if (row.deviation == 0.0)
            continue;
        const double x = std::log(static_cast<double>(row.n)) / static_cast<double>(row.n);
        const double rel = (row.deviation - rep.fitted_constant * x) / row.deviation;
        res += rel * rel;
        ++used;
    }
    rep.fit_residual = used ? std::sqrt(res / static_cast<double>(used)) : 0.0;

    const std::size_t n_max = rep.rows.back().n;
    double cmin = 0.0, cmax = 0.0;
    bool first = true;
    for (const TrotterRow& row : rep.rows) {
        if (2 * row.n < n_max)
            continue;
        cmin = first ? row.constant : std::min(cmin, row.constant);
        cmax = first ? row.constant : std::max(cmax, row.constant);
        first = false;
    }
    rep.top_octave_spread = cmin > 0.0 ? cmax / cmin - 1.0 : 0.0;
    rep.monotone = true;
    for (std::size_t i = 1; i < rep.rows.size(); ++i)
        if (!(rep.rows[i].deviation < rep.rows[i - 1].deviation))
            rep.monotone = false;
    return rep;
}

std::vector<double> semigroup_s_numbers(double t, const fock::Truncation& trunc,
                                        const fock::GribovParams& params, SemigroupKind which)
{
    require_time(t, true, "semigroup_s_numbers");
    if (which == SemigroupKind::g_semigroup) {
        std::vector<double> s = diag_semigroup_values(cubic_levels(trunc, params.lambda_cubic), 1.0, t);
        std::sort(s.begin(), s.end(), std::greater<>());
        return s;
    }
    const CMatrix h = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic).values;
    return linalg::singular_values(linalg::matrix_exp(h, t)).s_numbers;
}

std::vector<std::vector<double>> schatten_profile(std::span<const double> t_list,
                                                  std::span<const double> p_list,
                                                  const fock::Truncation& trunc,
                                                  const fock::GribovParams& params, SemigroupKind which)
{
    for (double p : p_list)
        if (!(p > 0.0))
            throw InvalidArgument("schatten_profile: every p must be > 0 (got " + std::to_string(p) + ")");
    std::vector<std::vector<double>> table;
    for (double t : t_list) {
        const std::vector<double> s = semigroup_s_numbers(t, trunc, params, which);
        std::vector<double> row;
        for (double p : p_list)
            row.push_back(linalg::schatten_norm(s, p));
        table.push_back(std::move(row));
    }
    return table;
}

} // namespace gribov::semigroup
