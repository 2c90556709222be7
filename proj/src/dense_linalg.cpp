#include "gribov/dense_linalg.hpp"

#include "gribov/errors.hpp"
#include "gribov/kernels.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>

namespace gribov::linalg {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

double norm1(cplx z) { return std::abs(z.real()) + std::abs(z.imag()); }

void require_square(const CMatrix& m, const char* who)
{
    if (!m.square())
        throw InvalidArgument(std::string(who) + ": matrix must be square");
}

// Givens rotation G = [c s; -conj(s) c] with G [p; q] = [r; 0].
struct Givens
{
    double c = 1.0;
    cplx s{};
};

Givens make_givens(cplx p, cplx q)
{
    Givens g;
    if (q == cplx{})
        return g;
    const double ap = std::abs(p), aq = std::abs(q);
    if (ap == 0.0) {
        g.c = 0.0;
        g.s = std::conj(q) / aq;
        return g;
    }
    const double rho = std::hypot(ap, aq);
    g.c = ap / rho;
    g.s = (p / ap) * std::conj(q) / rho;
    return g;
}

// Rows i, i+1 of t from column `from` on: left multiplication by G.
void rotate_rows(CMatrix& t, std::size_t i, std::size_t from, const Givens& g)
{
    simd::active().rot(t.cols() - from, t.row(i) + from, t.row(i + 1) + from, g.c, g.s);
}

// Columns i, i+1 of rows [0, rows_end): right multiplication by G^H.
void rotate_cols(CMatrix& t, std::size_t i, std::size_t rows_end, const Givens& g)
{
    const cplx sc = std::conj(g.s);
    for (std::size_t r = 0; r < rows_end; ++r) {
        const cplx x = t(r, i), y = t(r, i + 1);
        t(r, i) = g.c * x + sc * y;
        t(r, i + 1) = -g.s * x + g.c * y;
    }
}

// Householder reduction to upper Hessenberg form, A = Q H Q^H.
void hessenberg(CMatrix& a, CMatrix* q)
{
    const std::size_t n = a.rows();
    std::vector<cplx> v(n), w(n);
    for (std::size_t k = 0; k + 2 < n; ++k) {
        double xnorm2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i)
            xnorm2 += std::norm(a(i, k));
        double tail = xnorm2 - std::norm(a(k + 1, k));
        if (tail == 0.0)
            continue;
        const double xnorm = std::sqrt(xnorm2);
        const cplx x0 = a(k + 1, k);
        const cplx phase = (x0 == cplx{}) ? cplx(1.0) : x0 / std::abs(x0);
        const cplx alpha = -phase * xnorm;
        std::fill(v.begin(), v.end(), cplx{});
        v[k + 1] = x0 - alpha;
        for (std::size_t i = k + 2; i < n; ++i)
            v[i] = a(i, k);
        double vn2 = 0.0;
        for (std::size_t i = k + 1; i < n; ++i)
            vn2 += std::norm(v[i]);
        const double vn = std::sqrt(vn2);
        for (std::size_t i = k + 1; i < n; ++i)
            v[i] /= vn;

        // left: A <- (I - 2 v v^H) A on rows k+1.., columns k..
        std::fill(w.begin(), w.end(), cplx{});
        for (std::size_t i = k + 1; i < n; ++i)
            simd::active().axpy(n - k, std::conj(v[i]), a.row(i) + k, w.data() + k);
        for (std::size_t i = k + 1; i < n; ++i)
            simd::active().axpy(n - k, -2.0 * v[i], w.data() + k, a.row(i) + k);
        // right: A <- A (I - 2 v v^H) on all rows, columns k+1..
        for (std::size_t r = 0; r < n; ++r) {
            const cplx av = simd::active().dotu(n - k - 1, a.row(r) + k + 1, v.data() + k + 1);
            const cplx f = -2.0 * av;
            cplx* row = a.row(r);
            for (std::size_t j = k + 1; j < n; ++j)
                row[j] += f * std::conj(v[j]);
        }
        if (q) {
            for (std::size_t r = 0; r < n; ++r) {
                const cplx qv = simd::active().dotu(n - k - 1, q->row(r) + k + 1, v.data() + k + 1);
                const cplx f = -2.0 * qv;
                cplx* row = q->row(r);
                for (std::size_t j = k + 1; j < n; ++j)
                    row[j] += f * std::conj(v[j]);
            }
        }
        a(k + 1, k) = alpha;
        for (std::size_t i = k + 2; i < n; ++i)
            a(i, k) = cplx{};
    }
}

bool negligible_subdiag(CMatrix& t, std::size_t i)
{
    const double d = norm1(t(i, i)) + norm1(t(i + 1, i + 1));
    const double sd = norm1(t(i + 1, i));
    if (sd <= kEps * d) {
        t(i + 1, i) = cplx{};
        return true;
    }
    return false;
}

cplx wilkinson_shift(const CMatrix& t, std::size_t iu, std::size_t iter)
{
    if (iter == 10 || iter == 30) {
        // exceptional shift
        const std::size_t back = iu >= 2 ? iu - 2 : 0;
        return std::abs(t(iu, iu - 1).real()) + std::abs(t(iu - 1, back).real());
    }
    std::array<cplx, 4> b{t(iu - 1, iu - 1), t(iu - 1, iu), t(iu, iu - 1), t(iu, iu)};
    double scale = 0.0;
    for (const cplx& z : b)
        scale += std::abs(z);
    if (scale == 0.0)
        return cplx{};
    for (cplx& z : b)
        z /= scale;
    const cplx bc = b[1] * b[2];
    const cplx c = b[0] - b[3];
    const cplx disc = std::sqrt(c * c + 4.0 * bc);
    const cplx det = b[0] * b[3] - bc;
    const cplx tr = b[0] + b[3];
    cplx e1 = 0.5 * (tr + disc), e2 = 0.5 * (tr - disc);
    if (norm1(e1) > norm1(e2))
        e2 = det / e1;
    else if (norm1(e2) != 0.0)
        e1 = det / e2;
    return scale * (norm1(e1 - b[3]) < norm1(e2 - b[3]) ? e1 : e2);
}

// Complex Schur form of an upper Hessenberg matrix, in place. Returns sweeps used.
std::size_t schur_from_hessenberg(CMatrix& t, CMatrix* q, std::size_t max_iters)
{
    const std::size_t n = t.rows();
    if (n < 2)
        return 0;
    std::size_t iu = n - 1, iter = 0, total = 0;
    while (true) {
        while (iu > 0) {
            if (!negligible_subdiag(t, iu - 1))
                break;
            iter = 0;
            --iu;
        }
        if (iu == 0)
            break;
        ++iter;
        ++total;
        if (total > max_iters)
            throw ConvergenceError("eigen: complex QR did not converge, active block ends at row " +
                                       std::to_string(iu),
                                   total);
        std::size_t il = iu - 1;
        while (il > 0 && !negligible_subdiag(t, il - 1))
            --il;

        const cplx shift = wilkinson_shift(t, iu, iter);
        Givens g = make_givens(t(il, il) - shift, t(il + 1, il));
        rotate_rows(t, il, il, g);
        rotate_cols(t, il, std::min(il + 2, iu) + 1, g);
        if (q)
            rotate_cols(*q, il, n, g);

        for (std::size_t i = il + 1; i < iu; ++i) {
            g = make_givens(t(i, i - 1), t(i + 1, i - 1));
            rotate_rows(t, i, i - 1, g);
            t(i + 1, i - 1) = cplx{};
            rotate_cols(t, i, std::min(i + 2, iu) + 1, g);
            if (q)
                rotate_cols(*q, i, n, g);
        }
    }
    return total;
}

// Eigenvectors of upper triangular t (columns), not normalized.
CMatrix triangular_eigenvectors(const CMatrix& t)
{
    const std::size_t n = t.rows();
    const double small = std::max(kEps * t.frobenius_norm(), std::numeric_limits<double>::min());
    CMatrix x(n, n);
    std::vector<cplx> col(n);
    for (std::size_t k = n; k-- > 0;) {
        std::fill(col.begin(), col.end(), cplx{});
        col[k] = 1.0;
        const cplx lam = t(k, k);
        for (std::size_t j = k; j-- > 0;) {
            cplx s{};
            for (std::size_t l = j + 1; l <= k; ++l)
                s += t(j, l) * col[l];
            cplx d = t(j, j) - lam;
            if (std::abs(d) < small)
                d = small;
            col[j] = -s / d;
            const double big = std::abs(col[j]);
            if (big > 1e100) {
                for (std::size_t l = j; l <= k; ++l)
                    col[l] /= big;
            }
        }
        for (std::size_t i = 0; i <= k; ++i)
            x(i, k) = col[i];
    }
    return x;
}

void normalize_columns(CMatrix& v)
{
    for (std::size_t j = 0; j < v.cols(); ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < v.rows(); ++i)
            s += std::norm(v(i, j));
        s = std::sqrt(s);
        if (s > 0.0)
            for (std::size_t i = 0; i < v.rows(); ++i)
                v(i, j) /= s;
    }
}

// Implicit QL on the real symmetric tridiagonal (d, e), e[i] = T(i+1, i).
// zt rows are the eigenvectors (transposed accumulation) when non-null.
std::size_t tridiagonal_ql(std::vector<double>& d, std::vector<double>& e,
                           std::vector<std::vector<double>>* zt, std::size_t max_iters)
{
    const std::size_t n = d.size();
    std::size_t total = 0;
    e.resize(n, 0.0);
    if (n > 0)
        e[n - 1] = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
        std::size_t iter = 0;
        std::size_t m;
        do {
            for (m = l; m + 1 < n; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= kEps * dd)
                    break;
            }
            if (m != l) {
                if (++iter > max_iters)
                    throw ConvergenceError("eigen: implicit QL did not converge at index " +
                                               std::to_string(l),
                                           total);
                ++total;
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + std::copysign(r, g));
                double s = 1.0, c = 1.0, p = 0.0;
                bool early = false;
                for (std::size_t i = m; i-- > l;) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        early = true;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    if (zt) {
                        auto& zi = (*zt)[i];
                        auto& zi1 = (*zt)[i + 1];
                        for (std::size_t k = 0; k < n; ++k) {
                            f = zi1[k];
                            zi1[k] = s * zi[k] + c * f;
                            zi[k] = c * zi[k] - s * f;
                        }
                    }
                }
                if (early)
                    continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
    return total;
}

double relative_tie() { return 1e-12; }

double arg_0_2pi(cplx z)
{
    double a = std::arg(z);
    if (a < 0.0)
        a += 2.0 * std::numbers::pi;
    return a;
}

SpectralData eigen_hermitian(const CMatrix& m, const EigenOptions& opt)
{
    const std::size_t n = m.rows();
    const double fro = m.frobenius_norm();
    if (max_abs_diff(m, m.adjoint()) > 1e-12 * fro)
        throw InvalidArgument("eigen: hermitian mode requires M = M^H (deviation " +
                              std::to_string(max_abs_diff(m, m.adjoint())) + ")");
    CMatrix a = m;
    CMatrix q;
    if (opt.want_vectors)
        q = CMatrix::identity(n);
    hessenberg(a, opt.want_vectors ? &q : nullptr);

    std::vector<double> d(n), e(n, 0.0);
    std::vector<cplx> phase(n, cplx(1.0));
    for (std::size_t i = 0; i < n; ++i)
        d[i] = a(i, i).real();
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const cplx sub = a(i + 1, i);
        const double as = std::abs(sub);
        e[i] = as;
        phase[i + 1] = as > 0.0 ? phase[i] * sub / as : phase[i];
    }

    std::vector<std::vector<double>> zt;
    if (opt.want_vectors) {
        zt.assign(n, std::vector<double>(n, 0.0));
        for (std::size_t i = 0; i < n; ++i)
            zt[i][i] = 1.0;
    }
    SpectralData out;
    out.iterations = tridiagonal_ql(d, e, opt.want_vectors ? &zt : nullptr,
                                    opt.max_iterations_per_eigenvalue);
    out.tolerance = opt.residual_tolerance * std::max(fro, 1.0);
    out.eigenvalues.assign(d.begin(), d.end());
    if (opt.want_vectors) {
        // zt row j holds eigenvector j of the real tridiagonal; undo the phase scaling
        CMatrix dz(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                dz(i, j) = phase[i] * zt[j][i];
        out.eigenvectors = q * dz;
    }
    return out;
}

SpectralData eigen_general(const CMatrix& m, const EigenOptions& opt)
{
    const std::size_t n = m.rows();
    CMatrix t = m;
    CMatrix q;
    if (opt.want_vectors)
        q = CMatrix::identity(n);
    hessenberg(t, opt.want_vectors ? &q : nullptr);
    SpectralData out;
    out.iterations = schur_from_hessenberg(t, opt.want_vectors ? &q : nullptr,
                                           opt.max_iterations_per_eigenvalue * std::max<std::size_t>(n, 1));
    out.tolerance = opt.residual_tolerance * std::max(m.frobenius_norm(), 1.0);
    out.eigenvalues = t.diagonal();
    if (opt.want_vectors) {
        out.eigenvectors = q * triangular_eigenvectors(t);
        normalize_columns(out.eigenvectors);
    }
    return out;
}

void fill_residuals(const CMatrix& m, SpectralData& s)
{
    const std::size_t n = m.rows();
    const CMatrix mv = m * s.eigenvectors;
    s.residuals.assign(n, 0.0);
    for (std::size_t k = 0; k < n; ++k) {
        double r = 0.0, v = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            r += std::norm(mv(i, k) - s.eigenvalues[k] * s.eigenvectors(i, k));
            v += std::norm(s.eigenvectors(i, k));
        }
        s.residuals[k] = v > 0.0 ? std::sqrt(r / v) : 0.0;
    }
}

void check_defective(SpectralData& s)
{
    const std::size_t n = s.eigenvalues.size();
    for (std::size_t k = 0; k + 1 < n; ++k) {
        for (std::size_t j = k + 1; j < n; ++j) {
            const double scale = std::max(1.0, std::abs(s.eigenvalues[k]));
            if (std::abs(s.eigenvalues[k] - s.eigenvalues[j]) > 1e-8 * scale)
                continue;
            cplx ip{};
            for (std::size_t i = 0; i < n; ++i)
                ip += std::conj(s.eigenvectors(i, k)) * s.eigenvectors(i, j);
            if (std::abs(ip) > 1.0 - 1e-6)
                s.diagnostics.push_back("eigenvalues " + std::to_string(k) + " and " +
                                        std::to_string(j) +
                                        " share a numerically parallel eigenvector (defective?)");
        }
    }
}

} // namespace

// ---------------------------------------------------------------- LU

LU::LU(CMatrix a) : lu_(std::move(a))
{
    require_square(lu_, "LU");
    const std::size_t n = lu_.rows();
    perm_.resize(n);
    std::iota(perm_.begin(), perm_.end(), std::size_t{0});
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t p = k;
        double best = std::abs(lu_(k, k));
        for (std::size_t i = k + 1; i < n; ++i) {
            const double v = std::abs(lu_(i, k));
            if (v > best) {
                best = v;
                p = i;
            }
        }
        if (best == 0.0)
            throw InvalidArgument("LU: matrix is singular (zero pivot in column " +
                                  std::to_string(k) + ")");
        if (p != k) {
            std::swap_ranges(lu_.row(k), lu_.row(k) + n, lu_.row(p));
            std::swap(perm_[k], perm_[p]);
        }
        const cplx piv = lu_(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const cplx f = lu_(i, k) / piv;
            lu_(i, k) = f;
            if (f != cplx{})
                simd::active().axpy(n - k - 1, -f, lu_.row(k) + k + 1, lu_.row(i) + k + 1);
        }
    }
}

CMatrix LU::solve(const CMatrix& rhs) const
{
    const std::size_t n = lu_.rows();
    if (rhs.rows() != n)
        throw InvalidArgument("LU::solve: right-hand side has wrong row count");
    const std::size_t m = rhs.cols();
    CMatrix x(n, m);
    for (std::size_t i = 0; i < n; ++i)
        std::copy(rhs.row(perm_[i]), rhs.row(perm_[i]) + m, x.row(i));
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k)
            if (lu_(i, k) != cplx{})
                simd::active().axpy(m, -lu_(i, k), x.row(k), x.row(i));
    for (std::size_t i = n; i-- > 0;) {
        for (std::size_t k = i + 1; k < n; ++k)
            if (lu_(i, k) != cplx{})
                simd::active().axpy(m, -lu_(i, k), x.row(k), x.row(i));
        simd::active().scal(m, 1.0 / lu_(i, i), x.row(i));
    }
    return x;
}

std::vector<cplx> LU::solve(std::span<const cplx> rhs) const
{
    CMatrix b(rhs.size(), 1);
    std::copy(rhs.begin(), rhs.end(), b.data());
    const CMatrix x = solve(b);
    return {x.data(), x.data() + x.rows()};
}

CMatrix LU::inverse() const { return solve(CMatrix::identity(lu_.rows())); }

CMatrix solve(const CMatrix& a, const CMatrix& rhs) { return LU(a).solve(rhs); }

CMatrix inverse(const CMatrix& a) { return LU(a).inverse(); }

// ---------------------------------------------------------------- eigen

double SpectralData::max_residual() const
{
    return residuals.empty() ? 0.0 : *std::max_element(residuals.begin(), residuals.end());
}

void sort_spectrum(SpectralData& data, EigenOrder order)
{
    const std::size_t n = data.eigenvalues.size();
    std::vector<std::size_t> idx(n);
    std::iota(idx.begin(), idx.end(), std::size_t{0});
    const auto& ev = data.eigenvalues;
    if (order == EigenOrder::modulus) {
        std::stable_sort(idx.begin(), idx.end(),
                         [&](std::size_t a, std::size_t b) { return std::abs(ev[a]) < std::abs(ev[b]); });
        // moduli equal to relative 1e-12 form a tie group ordered by argument
        std::size_t start = 0;
        while (start < n) {
            std::size_t end = start + 1;
            const double m0 = std::abs(ev[idx[start]]);
            while (end < n && std::abs(ev[idx[end]]) - m0 <= relative_tie() * std::max(1.0, m0))
                ++end;
            std::stable_sort(idx.begin() + static_cast<std::ptrdiff_t>(start),
                             idx.begin() + static_cast<std::ptrdiff_t>(end),
                             [&](std::size_t a, std::size_t b) {
                                 return arg_0_2pi(ev[a]) < arg_0_2pi(ev[b]);
                             });
            start = end;
        }
    } else {
        std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
            if (ev[a].real() != ev[b].real())
                return ev[a].real() < ev[b].real();
            return ev[a].imag() < ev[b].imag();
        });
    }
    std::vector<cplx> values(n);
    for (std::size_t k = 0; k < n; ++k)
        values[k] = ev[idx[k]];
    data.eigenvalues = std::move(values);
    if (!data.residuals.empty()) {
        std::vector<double> r(n);
        for (std::size_t k = 0; k < n; ++k)
            r[k] = data.residuals[idx[k]];
        data.residuals = std::move(r);
    }
    if (!data.eigenvectors.empty()) {
        CMatrix v(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k)
                v(i, k) = data.eigenvectors(i, idx[k]);
        data.eigenvectors = std::move(v);
    }
}

SpectralData eigen(const CMatrix& m, EigenMode mode, const EigenOptions& options)
{
    require_square(m, "eigen");
    SpectralData out = mode == EigenMode::hermitian ? eigen_hermitian(m, options)
                                                    : eigen_general(m, options);
    if (options.want_vectors) {
        fill_residuals(m, out);
        if (mode == EigenMode::general)
            check_defective(out);
    }
    sort_spectrum(out, options.order);
    return out;
}

SpectralData eigen(const fock::FockMatrix& m, EigenMode mode, const EigenOptions& options)
{
    return eigen(m.values, mode, options);
}

std::vector<double> hermitian_eigenvalues(const CMatrix& m)
{
    EigenOptions opt;
    opt.order = EigenOrder::real_part;
    const SpectralData s = eigen(m, EigenMode::hermitian, opt);
    std::vector<double> out(s.eigenvalues.size());
    for (std::size_t i = 0; i < out.size(); ++i)
        out[i] = s.eigenvalues[i].real();
    return out;
}

// ---------------------------------------------------------------- singular values

double schatten_norm(std::span<const double> s, double p)
{
    if (!(p > 0.0) || !std::isfinite(p))
        throw InvalidArgument("schatten_norm: exponent p must be a finite positive number (got " +
                              std::to_string(p) + ")");
    double smax = 0.0;
    for (double v : s)
        smax = std::max(smax, v);
    if (smax == 0.0)
        return 0.0;
    double acc = 0.0;
    for (double v : s)
        acc += std::pow(v / smax, p);
    return smax * std::pow(acc, 1.0 / p);
}

double SchattenReport::norm(double p) const { return schatten_norm(s_numbers, p); }

namespace {

SchattenReport finish_report(std::vector<double> s, std::span<const double> p_list)
{
    std::sort(s.begin(), s.end(), std::greater<>());
    SchattenReport r;
    r.s_numbers = std::move(s);
    for (double p : p_list)
        r.p_norms[p] = schatten_norm(r.s_numbers, p);
    return r;
}

} // namespace

SchattenReport singular_values(const CMatrix& m, std::span<const double> p_list)
{
    constexpr double kTinyCoupling = std::numeric_limits<double>::min() / kEps;
    for (double p : p_list)
        if (!(p > 0.0))
            throw InvalidArgument("singular_values: exponent p must be > 0 (got " +
                                  std::to_string(p) + ")");
    CMatrix a = m.rows() > m.cols() ? m.adjoint() : m;
    const std::size_t rows = a.rows(), len = a.cols();
    if (rows == 0)
        return finish_report({}, p_list);
    // unit max entry keeps squared row norms away from under/overflow
    const double amax = a.max_abs();
    if (amax == 0.0)
        return finish_report(std::vector<double>(rows, 0.0), p_list);
    a *= cplx(1.0 / amax);
    const simd::KernelTable& k = simd::active();
    // rotation threshold sqrt(len)·eps as in LAPACK's one-sided Jacobi
    const double tol = std::sqrt(static_cast<double>(len)) * kEps;

    std::vector<double> nrm(rows);
    for (std::size_t i = 0; i < rows; ++i)
        nrm[i] = k.norm2_sq(len, a.row(i));

    constexpr int max_sweeps = 80;
    int sweep = 0;
    for (; sweep < max_sweeps; ++sweep) {
        bool rotated = false;
        for (std::size_t i = 0; i + 1 < rows; ++i) {
            for (std::size_t j = i + 1; j < rows; ++j) {
                const double alpha = nrm[i], beta = nrm[j];
                if (alpha == 0.0 || beta == 0.0)
                    continue;
                const cplx gamma = k.dotc(len, a.row(i), a.row(j));
                const double ag = std::abs(gamma);
                // after scaling, couplings near the underflow threshold are noise
                if (ag <= tol * std::sqrt(alpha) * std::sqrt(beta) || ag < kTinyCoupling)
                    continue;
                rotated = true;
                const double zeta = (beta - alpha) / (2.0 * ag);
                const double t = std::copysign(1.0, zeta) / (std::abs(zeta) + std::hypot(1.0, zeta));
                const double c = 1.0 / std::hypot(1.0, t);
                const double s = c * t;
                const cplx phase = gamma / ag;
                k.rot(len, a.row(i), a.row(j), c, -s * std::conj(phase));
                nrm[i] = k.norm2_sq(len, a.row(i));
                nrm[j] = k.norm2_sq(len, a.row(j));
            }
        }
        if (!rotated)
            break;
    }
    if (sweep == max_sweeps)
        throw ConvergenceError("singular_values: Jacobi sweeps did not converge",
                               static_cast<std::size_t>(sweep));
    std::vector<double> s(rows);
    for (std::size_t i = 0; i < rows; ++i)
        s[i] = amax * std::sqrt(nrm[i]);
    return finish_report(std::move(s), p_list);
}

SchattenReport singular_values(const fock::FockMatrix& m, std::span<const double> p_list)
{
    return singular_values(m.values, p_list);
}

SchattenReport singular_values_gram(const CMatrix& m, std::span<const double> p_list)
{
    CMatrix gram = m.adjoint() * m;
    // symmetrize rounding so the Hermitian check sees an exact Hermitian matrix
    for (std::size_t i = 0; i < gram.rows(); ++i) {
        gram(i, i) = gram(i, i).real();
        for (std::size_t j = i + 1; j < gram.cols(); ++j)
            gram(j, i) = std::conj(gram(i, j));
    }
    const std::vector<double> ev = hermitian_eigenvalues(gram);
    std::vector<double> s(ev.size());
    for (std::size_t i = 0; i < ev.size(); ++i)
        s[i] = std::sqrt(std::max(ev[i], 0.0));
    std::sort(s.begin(), s.end(), std::greater<>());
    s.resize(std::min(m.rows(), m.cols()));
    return finish_report(std::move(s), p_list);
}

double schatten_norm(const CMatrix& m, double p)
{
    if (!(p > 0.0) || !std::isfinite(p))
        throw InvalidArgument("schatten_norm: exponent p must be a finite positive number (got " +
                              std::to_string(p) + ")");
    return singular_values(m).norm(p);
}

double schatten_norm(const fock::FockMatrix& m, double p) { return schatten_norm(m.values, p); }

double operator_norm(const CMatrix& m)
{
    const SchattenReport r = singular_values(m);
    return r.s_numbers.empty() ? 0.0 : r.s_numbers.front();
}

// ---------------------------------------------------------------- exponential

namespace {

constexpr std::array<double, 4> kPade3{120.0, 60.0, 12.0, 1.0};
constexpr std::array<double, 6> kPade5{30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0};
constexpr std::array<double, 8> kPade7{17297280.0, 8648640.0, 1995840.0, 277200.0,
                                       25200.0,    1512.0,    56.0,      1.0};
constexpr std::array<double, 10> kPade9{17643225600.0, 8821612800.0, 2075673600.0, 302702400.0,
                                        30270240.0,    2162160.0,    110880.0,     3960.0,
                                        90.0,          1.0};
constexpr std::array<double, 14> kPade13{
    64764752532480000.0, 32382376266240000.0, 7771770303897600.0, 1187353796428800.0,
    129060195264000.0,   10559470521600.0,    670442572800.0,     33522128640.0,
    1323241920.0,        40840800.0,          960960.0,           16380.0,
    182.0,               1.0};

constexpr std::array<double, 4> kTheta{1.495585217958292e-2, 2.539398330063230e-1,
                                       9.504178996162932e-1, 2.097847961257068e0};
constexpr double kTheta13 = 5.371920351148152e0;

void add_scaled(CMatrix& acc, const CMatrix& x, double s)
{
    simd::active().axpy(acc.rows() * acc.cols(), s, x.data(), acc.data());
}

void add_identity(CMatrix& acc, double s)
{
    for (std::size_t i = 0; i < acc.rows(); ++i)
        acc(i, i) += s;
}

template <std::size_t M>
CMatrix pade_low(const CMatrix& a, const std::array<double, M>& b)
{
    // U = A Σ b_odd A^{2j}, V = Σ b_even A^{2j}
    const std::size_t n = a.rows();
    const CMatrix a2 = a * a;
    std::vector<CMatrix> pows{CMatrix::identity(n), a2};
    for (std::size_t k = 2; 2 * k < M; ++k)
        pows.push_back(pows.back() * a2);
    CMatrix u(n, n), v(n, n);
    for (std::size_t j = 0; j < pows.size(); ++j) {
        if (2 * j + 1 < M)
            add_scaled(u, pows[j], b[2 * j + 1]);
        if (2 * j < M)
            add_scaled(v, pows[j], b[2 * j]);
    }
    u = a * u;
    return LU(v - u).solve(v + u);
}

CMatrix pade13(const CMatrix& a)
{
    const std::size_t n = a.rows();
    const auto& b = kPade13;
    const CMatrix a2 = a * a, a4 = a2 * a2, a6 = a4 * a2;
    CMatrix inner(n, n);
    add_scaled(inner, a6, b[13]);
    add_scaled(inner, a4, b[11]);
    add_scaled(inner, a2, b[9]);
    CMatrix u = a6 * inner;
    add_scaled(u, a6, b[7]);
    add_scaled(u, a4, b[5]);
    add_scaled(u, a2, b[3]);
    add_identity(u, b[1]);
    u = a * u;
    CMatrix inner_v(n, n);
    add_scaled(inner_v, a6, b[12]);
    add_scaled(inner_v, a4, b[10]);
    add_scaled(inner_v, a2, b[8]);
    CMatrix v = a6 * inner_v;
    add_scaled(v, a6, b[6]);
    add_scaled(v, a4, b[4]);
    add_scaled(v, a2, b[2]);
    add_identity(v, b[0]);
    return LU(v - u).solve(v + u);
}

} // namespace

CMatrix matrix_exp(const CMatrix& m, double t, const ExpOptions& options)
{
    require_square(m, "matrix_exp");
    if (!(t >= 0.0) || !std::isfinite(t))
        throw InvalidArgument("matrix_exp: t must be finite and >= 0 (got " + std::to_string(t) + ")");
    const std::size_t n = m.rows();
    if (t == 0.0 || n == 0)
        return CMatrix::identity(n);
    if (m.is_diagonal()) {
        CMatrix out(n, n);
        for (std::size_t i = 0; i < n; ++i)
            out(i, i) = std::exp(-t * m(i, i));
        return out;
    }
    CMatrix a = m * cplx(-t);
    const double nrm = a.norm1();
    if (!std::isfinite(nrm))
        throw InvalidArgument("matrix_exp: non-finite entries");
    if (nrm <= kTheta[0])
        return pade_low(a, kPade3);
    if (nrm <= kTheta[1])
        return pade_low(a, kPade5);
    if (nrm <= kTheta[2])
        return pade_low(a, kPade7);
    if (nrm <= kTheta[3])
        return pade_low(a, kPade9);
    int s = 0;
    if (nrm > kTheta13)
        s = static_cast<int>(std::ceil(std::log2(nrm / kTheta13)));
    if (s > options.max_squarings)
        throw InvalidArgument("matrix_exp: ||tM||_1 = " + std::to_string(nrm) + " needs " +
                              std::to_string(s) + " squarings (cap " +
                              std::to_string(options.max_squarings) + ")");
    if (s > 0)
        a *= cplx(std::ldexp(1.0, -s));
    CMatrix r = pade13(a);
    for (int i = 0; i < s; ++i)
        r = r * r;
    return r;
}

fock::FockMatrix matrix_exp(const fock::FockMatrix& m, double t, const ExpOptions& options)
{
    return {matrix_exp(m.values, t, options), m.offset};
}

CheckedExp matrix_exp_checked(const CMatrix& m, double t, double threshold)
{
    CheckedExp out;
    out.value = matrix_exp(m, t);
    if (m.rows() == 0 || m.is_diagonal()) {
        out.crosscheck = 0.0;
        return out;
    }
    EigenOptions opt;
    opt.want_vectors = true;
    SpectralData sd;
    try {
        sd = eigen(m, EigenMode::general, opt);
    } catch (const ConvergenceError&) {
        return out;
    }
    if (sd.max_residual() > sd.tolerance)
        return out;
    CMatrix vinv;
    try {
        vinv = inverse(sd.eigenvectors);
    } catch (const InvalidArgument&) {
        return out;
    }
    std::vector<cplx> ex(sd.eigenvalues.size());
    for (std::size_t i = 0; i < ex.size(); ++i)
        ex[i] = std::exp(-t * sd.eigenvalues[i]);
    CMatrix ve = sd.eigenvectors;
    for (std::size_t i = 0; i < ve.rows(); ++i)
        for (std::size_t j = 0; j < ve.cols(); ++j)
            ve(i, j) *= ex[j];
    const CMatrix recon = ve * vinv;
    const double ref = operator_norm(out.value);
    out.crosscheck = operator_norm(out.value - recon) / (ref > 0.0 ? ref : 1.0);
    out.ill_conditioned = !(out.crosscheck <= threshold);
    return out;
}

// ---------------------------------------------------------------- resolvents

std::vector<cplx> resolvent_diag_values(std::span<const double> g, double scale, cplx sigma,
                                        double pole_tol)
{
    const double guard = pole_tol * std::max(1.0, std::abs(sigma));
    std::vector<cplx> out(g.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const cplx d = scale * g[i] - sigma;
        if (std::abs(d) < guard)
            throw PoleProximityError("resolvent_diag: sigma = (" + std::to_string(sigma.real()) +
                                     ", " + std::to_string(sigma.imag()) +
                                     ") is within the pole guard of level " + std::to_string(i));
        out[i] = 1.0 / d;
    }
    return out;
}

fock::FockMatrix resolvent_diag(const fock::FockMatrix& g, double scale, cplx sigma, double pole_tol)
{
    if (!g.values.is_diagonal())
        throw InvalidArgument("resolvent_diag: input must be diagonal");
    std::vector<double> d(g.dim());
    for (std::size_t i = 0; i < d.size(); ++i) {
        if (g(i, i).imag() != 0.0)
            throw InvalidArgument("resolvent_diag: diagonal must be real");
        d[i] = g(i, i).real();
    }
    const std::vector<cplx> r = resolvent_diag_values(d, scale, sigma, pole_tol);
    return {CMatrix::from_diagonal(std::span<const cplx>(r)), g.offset};
}

// ---------------------------------------------------------------- tridiagonal

bool tridiagonal_solve(std::span<const cplx> lower, std::span<const cplx> diag,
                       std::span<const cplx> upper, std::span<cplx> b)
{
    const std::size_t n = diag.size();
    if (b.size() != n || (n > 0 && (lower.size() + 1 != n || upper.size() + 1 != n)))
        throw InvalidArgument("tridiagonal_solve: band sizes do not match");
    if (n == 0)
        return true;
    std::vector<cplx> dl(lower.begin(), lower.end()), d(diag.begin(), diag.end()),
        du(upper.begin(), upper.end()), du2(n > 2 ? n - 2 : 0);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == cplx{})
                return false;
            const cplx f = dl[i] / d[i];
            d[i + 1] -= f * du[i];
            b[i + 1] -= f * b[i];
            if (i + 2 < n)
                du2[i] = 0.0;
        } else {
            const cplx f = d[i] / dl[i];
            d[i] = dl[i];
            const cplx tmp = d[i + 1];
            d[i + 1] = du[i] - f * tmp;
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du2[i];
            }
            du[i] = tmp;
            const cplx bt = b[i];
            b[i] = b[i + 1];
            b[i + 1] = bt - f * b[i + 1];
        }
    }
    if (d[n - 1] == cplx{})
        return false;
    b[n - 1] /= d[n - 1];
    if (n > 1)
        b[n - 2] = (b[n - 2] - du[n - 2] * b[n - 1]) / d[n - 2];
    for (std::size_t i = n >= 2 ? n - 2 : 0; i-- > 0;)
        b[i] = (b[i] - du[i] * b[i + 1] - du2[i] * b[i + 2]) / d[i];
    return true;
}

cplx polish_symmetric_tridiagonal(std::span<const cplx> off, std::span<const cplx> diag, cplx guess,
                                  int max_iterations)
{
    const std::size_t n = diag.size();
    if (n == 0 || off.size() + 1 != n)
        throw InvalidArgument("polish_symmetric_tridiagonal: band sizes do not match");
    std::vector<cplx> shifted(n), v(n, cplx(1.0)), w(n);
    const auto apply = [&](const std::vector<cplx>& x, std::vector<cplx>& y) {
        for (std::size_t i = 0; i < n; ++i) {
            cplx s = diag[i] * x[i];
            if (i > 0)
                s += off[i - 1] * x[i - 1];
            if (i + 1 < n)
                s += off[i] * x[i + 1];
            y[i] = s;
        }
    };
    const auto normalize = [](std::vector<cplx>& x) {
        double s = 0.0;
        for (const cplx& z : x)
            s += std::norm(z);
        s = std::sqrt(s);
        for (cplx& z : x)
            z /= s;
    };
    const auto inverse_step = [&](cplx shift) {
        for (std::size_t i = 0; i < n; ++i)
            shifted[i] = diag[i] - shift;
        std::copy(v.begin(), v.end(), w.begin());
        if (!tridiagonal_solve(off, shifted, off, w))
            return false;
        v.swap(w);
        normalize(v);
        return true;
    };

    cplx sigma = guess;
    for (int k = 0; k < 2; ++k)
        if (!inverse_step(sigma))
            return sigma;
    for (int it = 0; it < max_iterations; ++it) {
        apply(v, w);
        cplx num{}, den{};
        for (std::size_t i = 0; i < n; ++i) {
            num += v[i] * w[i];
            den += v[i] * v[i];
        }
        if (den == cplx{})
            return sigma;
        const cplx next = num / den;
        const double change = std::abs(next - sigma);
        sigma = next;
        if (change <= 4.0 * kEps * std::max(std::abs(sigma), kEps))
            break;
        if (!inverse_step(sigma))
            break;
    }
    return sigma;
}

} // namespace gribov::linalg
