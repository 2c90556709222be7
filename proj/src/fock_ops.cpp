#include "gribov/fock_ops.hpp"

#include "gribov/errors.hpp"

#include <cmath>
#include <string>

namespace gribov::fock {

void GribovParams::validate() const
{
    const auto check = [](double v, const char* name) {
        if (!std::isfinite(v))
            throw InvalidArgument(std::string("GribovParams: ") + name + " must be finite");
    };
    check(lambda_cubic, "lambda_cubic");
    check(lambda_quartic, "lambda_quartic");
    check(mu, "mu");
    check(lambda_triple, "lambda_triple");
}

void GribovParams::require_accretive() const
{
    validate();
    if (!(mu > 0.0))
        throw InvalidArgument("accretivity requires mu > 0 (got mu = " + std::to_string(mu) + ")");
    if (!(lambda_cubic >= 0.0))
        throw InvalidArgument("accretivity requires lambda_cubic >= 0 (got " +
                              std::to_string(lambda_cubic) + ")");
}

void Truncation::validate() const
{
    if (dim < 4)
        throw InvalidArgument("Truncation: dim must be >= 4 (got " + std::to_string(dim) + ")");
    if (offset > 1)
        throw InvalidArgument("Truncation: offset must be 0 or 1 (got " + std::to_string(offset) + ")");
}

FockMatrix Tridiagonal::to_dense() const
{
    const std::size_t n = diag.size();
    FockMatrix out{CMatrix(n, n), offset};
    for (std::size_t i = 0; i < n; ++i) {
        out.values(i, i) = diag[i];
        if (i + 1 < n) {
            out.values(i + 1, i) = sub[i];
            out.values(i, i + 1) = super[i];
        }
    }
    return out;
}

double falling_factorial(std::size_t n, int k)
{
    double r = 1.0;
    for (int j = 0; j < k; ++j) {
        if (n < static_cast<std::size_t>(j))
            return 0.0;
        r *= static_cast<double>(n - static_cast<std::size_t>(j));
    }
    return r;
}

FockMatrix build_ladder(const Truncation& trunc, Ladder kind)
{
    trunc.validate();
    const std::size_t n = trunc.dim;
    FockMatrix out{CMatrix(n, n), trunc.offset};
    for (std::size_t i = 1; i < n; ++i) {
        const double amp = std::sqrt(static_cast<double>(i + trunc.offset));
        if (kind == Ladder::annihilation)
            out.values(i - 1, i) = amp;
        else
            out.values(i, i - 1) = amp;
    }
    return out;
}

std::vector<double> diag_power_values(const Truncation& trunc, int order)
{
    trunc.validate();
    if (order < 1 || order > 3)
        throw InvalidArgument("build_diag_power: order must be 1, 2 or 3 (got " +
                              std::to_string(order) + ")");
    std::vector<double> d(trunc.dim);
    for (std::size_t i = 0; i < trunc.dim; ++i)
        d[i] = falling_factorial(i + trunc.offset, order);
    return d;
}

FockMatrix build_diag_power(const Truncation& trunc, int order)
{
    const std::vector<double> d = diag_power_values(trunc, order);
    return {CMatrix::from_diagonal(std::span<const double>(d)), trunc.offset};
}

Tridiagonal hamiltonian_bands(const Truncation& trunc, const GribovParams& params,
                              Regularizer regularizer)
{
    trunc.validate();
    params.validate();
    const std::size_t n = trunc.dim;
    Tridiagonal t;
    t.offset = trunc.offset;
    t.diag.resize(n);
    t.sub.resize(n - 1);
    t.super.resize(n - 1);
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t level = i + trunc.offset;
        double d = params.mu * static_cast<double>(level);
        if (regularizer == Regularizer::cubic)
            d += params.lambda_cubic * falling_factorial(level, 3);
        else if (regularizer == Regularizer::quartic)
            d += params.lambda_quartic * falling_factorial(level, 2);
        t.diag[i] = d;
        if (i + 1 < n) {
            const double amp = params.lambda_triple * static_cast<double>(level) *
                               std::sqrt(static_cast<double>(level + 1));
            t.sub[i] = cplx(0.0, amp);
            t.super[i] = cplx(0.0, amp);
        }
    }
    return t;
}

FockMatrix build_interaction(const Truncation& trunc, const GribovParams& params)
{
    return hamiltonian_bands(trunc, params, Regularizer::none).to_dense();
}

FockMatrix build_hamiltonian(const Truncation& trunc, const GribovParams& params,
                             Regularizer regularizer)
{
    return hamiltonian_bands(trunc, params, regularizer).to_dense();
}

FockMatrix restrict_subspace(const FockMatrix& m, std::size_t drop)
{
    if (drop >= m.dim())
        throw InvalidArgument("restrict_subspace: cannot drop " + std::to_string(drop) +
                              " of " + std::to_string(m.dim()) + " basis vectors");
    return {m.values.trailing_block(drop), m.offset + drop};
}

} // namespace gribov::fock
