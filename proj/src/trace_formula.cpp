#include "gribov/trace_formula.hpp"

#include "gribov/dense_linalg.hpp"
#include "gribov/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

namespace gribov::trace {

namespace {

double level(std::size_t n) { return fock::falling_factorial(n, 3); }

void check_nodes(std::size_t nodes)
{
    if (nodes < 64)
        throw InvalidArgument("contour: at least 64 quadrature nodes required (got " +
                              std::to_string(nodes) + ")");
}

void check_corrections(std::size_t j)
{
    if (j < 1 || j > kMaxCorrections)
        throw InvalidArgument("corrections must be in 1.." + std::to_string(kMaxCorrections) +
                              " (got " + std::to_string(j) + ")");
}

// Tr[(H R)^j] summed over the trapezoid nodes of one circle.
struct NodeSum
{
    std::vector<cplx> per_j;
    cplx tail{};
};

NodeSum trapezoid(double radius, std::size_t nodes, std::size_t max_j, const fock::Truncation& trunc,
                  const fock::GribovParams& params)
{
    NodeSum out;
    out.per_j.assign(max_j, cplx{});
    std::vector<cplx> coef(max_j);
    for (std::size_t j = 1; j <= max_j; ++j)
        coef[j - 1] = (j % 2 == 1 ? 1.0 : -1.0) / static_cast<double>(j);
    const double m = static_cast<double>(nodes);
    for (std::size_t k = 0; k < nodes; ++k) {
        const cplx sigma = std::polar(radius, 2.0 * std::numbers::pi * static_cast<double>(k) / m);
        const IntegrandTraces tr = correction_traces(sigma, max_j, trunc, params);
        for (std::size_t j = 0; j < max_j; ++j) {
            // -(1/2πi) ∮ f dσ with dσ = iσ dθ
            out.per_j[j] -= coef[j] * tr.traces[j] * sigma / m;
            out.tail -= coef[j] * tr.last_diagonal[j] * sigma / m;
        }
    }
    return out;
}

} // namespace

void ContourSpec::validate(double lambda_cubic) const
{
    check_nodes(nodes);
    if (index < 2)
        throw InvalidArgument("contour: index must be >= 2; levels 0, 1, 2 of G coincide at 0 and "
                              "cannot be separated (got " +
                              std::to_string(index) + ")");
    if (!(lambda_cubic > 0.0))
        throw InvalidArgument("contour: lambda_cubic must be > 0");
    const double lo = lambda_cubic * level(index), hi = lambda_cubic * level(index + 1);
    if (!(radius > lo && radius < hi))
        throw InvalidArgument("contour: radius " + std::to_string(radius) +
                              " does not separate levels " + std::to_string(lo) + " and " +
                              std::to_string(hi));
    if (std::min(radius - lo, hi - radius) < pole_margin)
        throw InvalidArgument("contour: radius " + std::to_string(radius) +
                              " violates the pole margin " + std::to_string(pole_margin));
}

ContourSpec contour_for_index(std::size_t n, const fock::GribovParams& params, std::size_t nodes)
{
    params.validate();
    if (n < 2)
        throw InvalidArgument("contour_for_index: n must be >= 2; levels 0, 1, 2 of G coincide at 0 "
                              "and cannot be separated (got " +
                              std::to_string(n) + ")");
    const double lc = params.lambda_cubic;
    return contour_with_radius(n, params, 0.5 * lc * (level(n) + level(n + 1)), nodes);
}

ContourSpec contour_with_radius(std::size_t n, const fock::GribovParams& params, double radius,
                                std::size_t nodes)
{
    params.validate();
    ContourSpec c;
    c.index = n;
    c.radius = radius;
    c.nodes = nodes;
    c.pole_margin = 0.25 * params.lambda_cubic * (level(n + 1) - level(n));
    c.validate(params.lambda_cubic);
    return c;
}

IntegrandTraces correction_traces(cplx sigma, std::size_t max_j, const fock::Truncation& trunc,
                                  const fock::GribovParams& params)
{
    check_corrections(max_j);
    const fock::Tridiagonal h = fock::hamiltonian_bands(trunc, params, fock::Regularizer::none);
    const std::vector<double> g = fock::diag_power_values(trunc, 3);
    const std::vector<cplx> r = linalg::resolvent_diag_values(g, params.lambda_cubic, sigma);
    const std::size_t n = trunc.dim;

    // K = H R: column l scaled by r_l
    std::vector<cplx> kd(n), kup(n, cplx{}), klo(n, cplx{});
    for (std::size_t l = 0; l < n; ++l) {
        kd[l] = h.diag[l] * r[l];
        if (l > 0) {
            kup[l] = h.super[l - 1] * r[l]; // K(l-1, l)
            klo[l - 1] = h.sub[l - 1] * r[l - 1]; // K(l, l-1)
        }
    }

    IntegrandTraces out;
    out.traces.assign(max_j, cplx{});
    out.last_diagonal.assign(max_j, cplx{});
    const std::ptrdiff_t width = static_cast<std::ptrdiff_t>(max_j);
    const std::size_t span = 2 * max_j + 1;
    std::vector<cplx> u(span), next(span);
    for (std::size_t m = 0; m < n; ++m) {
        std::fill(u.begin(), u.end(), cplx{});
        u[max_j] = 1.0; // row vector e_m^T, offsets -J..J
        for (std::size_t s = 1; s <= max_j; ++s) {
            std::fill(next.begin(), next.end(), cplx{});
            for (std::ptrdiff_t o = -width; o <= width; ++o) {
                const std::ptrdiff_t l = static_cast<std::ptrdiff_t>(m) + o;
                if (l < 0 || l >= static_cast<std::ptrdiff_t>(n))
                    continue;
                const std::size_t lu = static_cast<std::size_t>(l);
                const std::size_t io = static_cast<std::size_t>(o + width);
                // (uK)_l = u_{l-1} K(l-1,l) + u_l K(l,l) + u_{l+1} K(l+1,l)
                cplx acc = u[io] * kd[lu];
                if (o > -width && lu > 0)
                    acc += u[io - 1] * kup[lu];
                if (o < width && lu + 1 < n)
                    acc += u[io + 1] * klo[lu];
                next[io] = acc;
            }
            u.swap(next);
            out.traces[s - 1] += u[max_j];
            if (m + 1 == n)
                out.last_diagonal[s - 1] = u[max_j];
        }
    }
    return out;
}

cplx correction_integrand(cplx sigma, std::size_t j, const fock::Truncation& trunc,
                          const fock::GribovParams& params)
{
    check_corrections(j);
    return correction_traces(sigma, j, trunc, params).traces[j - 1];
}

RhsResult rhs_contour_sum(const ContourSpec& c, const fock::Truncation& trunc,
                          const fock::GribovParams& params, std::size_t corrections)
{
    check_corrections(corrections);
    c.validate(params.lambda_cubic);
    trunc.validate();
    const NodeSum base = trapezoid(c.radius, c.nodes, corrections, trunc, params);
    const NodeSum fine = trapezoid(c.radius, 2 * c.nodes, corrections, trunc, params);
    RhsResult out;
    out.per_j = base.per_j;
    cplx fine_total{};
    for (std::size_t j = 0; j < corrections; ++j) {
        out.total += base.per_j[j];
        fine_total += fine.per_j[j];
    }
    out.node_doubling_delta = std::abs(fine_total - out.total);
    out.tail = std::abs(base.tail);
    return out;
}

std::vector<cplx> cubic_spectrum(const fock::Truncation& trunc, const fock::GribovParams& params)
{
    const fock::FockMatrix h = fock::build_hamiltonian(trunc, params, fock::Regularizer::cubic);
    return linalg::eigen(h, linalg::EigenMode::general).eigenvalues;
}

LhsResult lhs_eigen_sum(const ContourSpec& c, const fock::Truncation& trunc,
                        const fock::GribovParams& params)
{
    c.validate(params.lambda_cubic);
    trunc.validate();
    if (trunc.dim < 4 * (c.index + 1))
        throw InvalidArgument("lhs_eigen_sum: truncation dim " + std::to_string(trunc.dim) +
                              " is below 4(n+1) = " + std::to_string(4 * (c.index + 1)));
    const std::vector<cplx> spec = cubic_spectrum(trunc, params);
    return lhs_eigen_sum(c, trunc, params, spec);
}

LhsResult lhs_eigen_sum(const ContourSpec& c, const fock::Truncation& trunc,
                        const fock::GribovParams& params, std::span<const cplx> spectrum)
{
    c.validate(params.lambda_cubic);
    trunc.validate();
    if (trunc.dim < 4 * (c.index + 1))
        throw InvalidArgument("lhs_eigen_sum: truncation dim " + std::to_string(trunc.dim) +
                              " is below 4(n+1) = " + std::to_string(4 * (c.index + 1)));
    std::vector<cplx> inside;
    for (const cplx& z : spectrum)
        if (std::abs(z - c.center) < c.radius)
            inside.push_back(z);
    std::stable_sort(inside.begin(), inside.end(),
                     [](cplx a, cplx b) { return std::abs(a) < std::abs(b); });

    LhsResult out;
    out.inside_count = inside.size();
    out.expected_count = c.index + 1 - trunc.offset;
    out.valid = out.inside_count == out.expected_count;

    const std::size_t n = trunc.dim;
    const double lc = params.lambda_cubic;
    std::vector<cplx> off(n - 1), diag(n);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const double lv = static_cast<double>(i + trunc.offset);
        off[i] = cplx(0.0, params.lambda_triple * lv * std::sqrt(lv + 1.0));
    }
    for (std::size_t k = 0; k < inside.size(); ++k) {
        // surplus eigenvalues (invalid rows) pair with the next levels
        const std::size_t lk = std::min(k, n - 1) + trunc.offset;
        const double base = lc * level(lk);
        const cplx raw = inside[k] - base;
        cplx shift = raw;
        for (std::size_t m = 0; m < n; ++m) {
            const std::size_t lm = m + trunc.offset;
            diag[m] = lc * (level(lm) - level(lk)) + params.mu * static_cast<double>(lm);
        }
        const cplx polished = linalg::polish_symmetric_tridiagonal(off, diag, raw);
        if (std::isfinite(polished.real()) && std::isfinite(polished.imag()) &&
            std::abs(polished - raw) <= 1e-6 * std::max(1.0, std::abs(raw)))
            shift = polished;
        out.shifts.push_back(shift);
        out.sum += shift;
        out.raw_sum += raw;
    }
    return out;
}

std::vector<FormulaRow> formula_convergence_report(std::span<const std::size_t> n_range,
                                                   const fock::Truncation& trunc,
                                                   const fock::GribovParams& params,
                                                   std::size_t nodes, std::size_t corrections)
{
    if (n_range.empty())
        throw InvalidArgument("formula_convergence_report: empty n range");
    trunc.validate();
    std::vector<ContourSpec> contours;
    for (std::size_t n : n_range)
        contours.push_back(contour_for_index(n, params, nodes));
    for (const ContourSpec& c : contours)
        if (trunc.dim < 4 * (c.index + 1))
            throw InvalidArgument("formula_convergence_report: truncation dim " +
                                  std::to_string(trunc.dim) + " is below 4(n+1) for n = " +
                                  std::to_string(c.index));
    const std::vector<cplx> spec = cubic_spectrum(trunc, params);
    std::vector<FormulaRow> rows;
    for (const ContourSpec& c : contours) {
        FormulaRow row;
        row.contour = c;
        row.lhs = lhs_eigen_sum(c, trunc, params, spec);
        row.rhs = rhs_contour_sum(c, trunc, params, corrections);
        row.gap = std::abs(row.lhs.sum - row.rhs.total);
        row.valid = row.lhs.valid;
        rows.push_back(std::move(row));
    }
    return rows;
}

double conjugation_defect(std::span<const cplx> spectrum)
{
    double worst = 0.0;
    for (const cplx& z : spectrum) {
        double best = std::numeric_limits<double>::infinity();
        for (const cplx& w : spectrum)
            best = std::min(best, std::abs(z - std::conj(w)));
        worst = std::max(worst, best);
    }
    return worst;
}

} // namespace gribov::trace
