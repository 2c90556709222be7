#include "cli.hpp"

#include "gribov/dense_linalg.hpp"
#include "gribov/diagnostics.hpp"
#include "gribov/errors.hpp"
#include "gribov/semigroup.hpp"
#include "gribov/trace_formula.hpp"

#include "CLI11.hpp"
#include "json.hpp"

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <exception>
#include <fstream>
#include <iostream>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

namespace gribov::cli {

namespace {

using nlohmann::json;

std::string join(const std::vector<std::string>& v, const char* sep)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? sep : "") + v[i];
    return out;
}

// ------------------------------------------------------------------ parsing

class Reader
{
public:
    std::vector<std::string> errors;

    void keys(const json& obj, const std::string& path, const std::set<std::string>& allowed)
    {
        for (auto it = obj.begin(); it != obj.end(); ++it)
            if (!allowed.count(it.key()))
                errors.push_back(where(path, it.key()) + ": unknown key");
    }

    void number(const json& obj, const std::string& path, const char* key, double& out)
    {
        if (!obj.contains(key))
            return;
        const json& v = obj[key];
        if (!v.is_number())
            errors.push_back(where(path, key) + ": expected a number");
        else
            out = v.get<double>();
    }

    void count(const json& obj, const std::string& path, const char* key, std::size_t& out)
    {
        if (!obj.contains(key))
            return;
        const json& v = obj[key];
        if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
            errors.push_back(where(path, key) + ": expected a non-negative integer");
        else
            out = v.get<std::size_t>();
    }

    void text(const json& obj, const std::string& path, const char* key, std::string& out)
    {
        if (!obj.contains(key))
            return;
        if (!obj[key].is_string())
            errors.push_back(where(path, key) + ": expected a string");
        else
            out = obj[key].get<std::string>();
    }

    void numbers(const json& obj, const std::string& path, const char* key, std::vector<double>& out)
    {
        if (!obj.contains(key))
            return;
        const json& v = obj[key];
        if (!v.is_array()) {
            errors.push_back(where(path, key) + ": expected a list of numbers");
            return;
        }
        std::vector<double> tmp;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number()) {
                errors.push_back(where(path, key) + "[" + std::to_string(i) + "]: expected a number");
                return;
            }
            tmp.push_back(v[i].get<double>());
        }
        out = std::move(tmp);
    }

    void counts(const json& obj, const std::string& path, const char* key, std::vector<std::size_t>& out)
    {
        if (!obj.contains(key))
            return;
        const json& v = obj[key];
        if (!v.is_array()) {
            errors.push_back(where(path, key) + ": expected a list of integers");
            return;
        }
        std::vector<std::size_t> tmp;
        for (std::size_t i = 0; i < v.size(); ++i) {
            if (!v[i].is_number_integer() || v[i].get<std::int64_t>() < 0) {
                errors.push_back(where(path, key) + "[" + std::to_string(i) +
                                 "]: expected a non-negative integer");
                return;
            }
            tmp.push_back(v[i].get<std::size_t>());
        }
        out = std::move(tmp);
    }

    const json* object(const json& obj, const char* key)
    {
        if (!obj.contains(key))
            return nullptr;
        if (!obj[key].is_object()) {
            errors.push_back(std::string(key) + ": expected an object");
            return nullptr;
        }
        return &obj[key];
    }

private:
    static std::string where(const std::string& path, const std::string& key)
    {
        return path.empty() ? key : path + "." + key;
    }
};

std::set<std::string> grid_keys(Command c)
{
    switch (c) {
    case Command::spectrum:
        return {"count"};
    case Command::trace_formula:
        return {"n_min", "n_max", "nodes", "corrections"};
    case Command::semigroup:
        return {"report", "t", "delta", "order", "quad_order", "p", "which"};
    case Command::trotter:
        return {"t", "steps", "regularizer"};
    case Command::diagnostics:
        return {"check", "epsilon", "dims", "deltas", "operator", "window", "t", "samples", "starts"};
    }
    return {};
}

bool one_of(const std::string& s, std::initializer_list<const char*> options)
{
    return std::any_of(options.begin(), options.end(), [&](const char* o) { return s == o; });
}

template <class T>
void check_list(std::vector<std::string>& err, const char* name, const std::vector<T>& v, bool positive,
                bool ascending)
{
    if (v.empty())
        err.push_back(std::string("grids.") + name + ": must not be empty");
    if (v.size() > kMaxList)
        err.push_back(std::string("grids.") + name + ": more than " + std::to_string(kMaxList) + " entries");
    for (std::size_t i = 0; i < v.size(); ++i) {
        const double x = static_cast<double>(v[i]);
        if (positive && !(x > 0.0 && std::isfinite(x))) {
            std::ostringstream os;
            os << "grids." << name << "[" << i << "] = " << x << ": must be finite and > 0";
            err.push_back(os.str());
        }
        if (ascending && i > 0 && !(v[i] > v[i - 1]))
            err.push_back(std::string("grids.") + name + ": must be strictly ascending");
    }
}

// ------------------------------------------------------------------ running

template <class Fn>
void parallel_for(std::size_t count, std::size_t threads, Fn&& fn)
{
    const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
    if (workers == 1) {
        for (std::size_t i = 0; i < count; ++i)
            fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::exception_ptr> failures(count);
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < workers; ++w)
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    failures[i] = std::current_exception();
                }
            }
        });
    for (std::thread& t : pool)
        t.join();
    for (const std::exception_ptr& e : failures)
        if (e)
            std::rethrow_exception(e);
}

double lambda_level(std::size_t n) { return fock::falling_factorial(n, 3); }

Report run_spectrum(const RunConfig& c)
{
    Report r;
    r.columns = {"k", "re", "im", "modulus", "level", "shift_re", "shift_im"};
    const std::vector<cplx> spec = trace::cubic_spectrum(c.trunc, c.params);
    const std::size_t count = c.grids.count ? std::min(c.grids.count, spec.size()) : spec.size();
    for (std::size_t k = 0; k < count; ++k) {
        const double level = c.params.lambda_cubic * lambda_level(k + c.trunc.offset);
        r.rows.push_back({static_cast<std::int64_t>(k), spec[k].real(), spec[k].imag(), std::abs(spec[k]),
                          level, spec[k].real() - level, spec[k].imag()});
    }
    return r;
}

Report run_trace_formula(const RunConfig& c)
{
    const Grids& g = c.grids;
    Report r;
    r.columns = {"n",      "r_n",    "nodes",  "lhs_re", "lhs_im",       "rhs_re",
                 "rhs_im", "gap",    "j1_re",  "j2_re",  "j3_re",        "j4_re",
                 "per_j_im_max", "node_doubling_delta", "inside_count", "valid"};
    std::vector<trace::ContourSpec> contours;
    for (std::size_t n = g.n_min; n <= g.n_max; ++n)
        contours.push_back(trace::contour_for_index(n, c.params, g.nodes));
    const std::vector<cplx> spec = trace::cubic_spectrum(c.trunc, c.params);
    std::vector<trace::FormulaRow> rows(contours.size());
    parallel_for(contours.size(), c.threads, [&](std::size_t i) {
        trace::FormulaRow& row = rows[i];
        row.contour = contours[i];
        row.lhs = trace::lhs_eigen_sum(contours[i], c.trunc, c.params, spec);
        row.rhs = trace::rhs_contour_sum(contours[i], c.trunc, c.params, g.corrections);
        row.gap = std::abs(row.lhs.sum - row.rhs.total);
        row.valid = row.lhs.valid;
    });
    for (const trace::FormulaRow& row : rows) {
        std::vector<double> jre(4, 0.0);
        double im_max = 0.0;
        for (std::size_t j = 0; j < row.rhs.per_j.size(); ++j) {
            if (j < 4)
                jre[j] = row.rhs.per_j[j].real();
            im_max = std::max(im_max, std::abs(row.rhs.per_j[j].imag()));
        }
        r.rows.push_back({static_cast<std::int64_t>(row.contour.index), row.contour.radius,
                          static_cast<std::int64_t>(row.contour.nodes), row.lhs.sum.real(), row.lhs.sum.imag(),
                          row.rhs.total.real(), row.rhs.total.imag(), row.gap, jre[0], jre[1], jre[2], jre[3],
                          im_max, row.rhs.node_doubling_delta,
                          static_cast<std::int64_t>(row.lhs.inside_count), row.valid});
        if (!row.valid)
            r.any_invalid = true;
    }
    r.meta.push_back({"corrections", static_cast<std::int64_t>(g.corrections)});
    return r;
}

Report run_semigroup(const RunConfig& c)
{
    const Grids& g = c.grids;
    Report r;
    if (g.report == "asymptotics") {
        r.columns = {"t", "full_gap", "i1_trace_norm", "i1_trace", "first_order", "i2_trace_norm", "i2_bound",
                     "weight", "delta"};
        std::vector<semigroup::AsymptoticsRow> rows(g.t.size());
        parallel_for(g.t.size(), c.threads, [&](std::size_t i) {
            const double t = g.t[i];
            rows[i] = semigroup::trace_asymptotics_report(std::span<const double>(&t, 1), c.trunc, c.params,
                                                          g.delta)
                          .front();
        });
        std::vector<double> i2;
        for (const auto& a : rows) {
            r.rows.push_back({a.t, a.full_gap, a.i1_trace_norm, a.i1_trace, a.first_order, a.i2_trace_norm,
                              a.i2_bound, a.weight, a.delta});
            i2.push_back(a.i2_trace_norm);
        }
        r.meta.push_back({"shift", std::string("G+I")});
        if (g.t.size() >= 2 && std::all_of(i2.begin(), i2.end(), [](double x) { return x > 0.0; }))
            r.meta.push_back({"i2_loglog_slope", semigroup::loglog_slope(g.t, i2)});
    } else if (g.report == "i2") {
        r.columns = {"t", "i2_norm", "bound", "bound_literal", "subordination", "weight_g", "weight_h"};
        std::vector<semigroup::I2Report> rows(g.t.size());
        parallel_for(g.t.size(), c.threads, [&](std::size_t i) {
            rows[i] = semigroup::i2_bound_report(g.t[i], c.trunc, c.params, g.delta);
        });
        for (std::size_t i = 0; i < rows.size(); ++i)
            r.rows.push_back({g.t[i], rows[i].i2_norm, rows[i].bound, rows[i].bound_literal,
                              rows[i].subordination, rows[i].weight_g, rows[i].weight_h});
        r.meta.push_back({"shift", std::string("G+I")});
    } else if (g.report == "dyson") {
        r.columns = {"t", "k", "distance", "certification", "refined_last", "valid"};
        semigroup::DysonOptions o;
        o.quad_order = g.quad_order;
        std::vector<semigroup::DysonSumReport> reps(g.t.size());
        parallel_for(g.t.size(), c.threads, [&](std::size_t i) {
            reps[i] = semigroup::dyson_sum_report(g.order, g.t[i], c.trunc, c.params, o);
        });
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const bool ok = reps[i].certification <= o.tol;
            if (!ok)
                r.any_invalid = true;
            for (const auto& row : reps[i].rows)
                r.rows.push_back({g.t[i], static_cast<std::int64_t>(row.k), row.distance, reps[i].certification,
                                  reps[i].refined_last, ok});
        }
    } else {
        r.columns = {"t", "p", "norm"};
        const auto which = g.which == "g" ? semigroup::SemigroupKind::g_semigroup
                                          : semigroup::SemigroupKind::h_semigroup;
        const auto table = semigroup::schatten_profile(g.t, g.p, c.trunc, c.params, which);
        for (std::size_t i = 0; i < g.t.size(); ++i)
            for (std::size_t j = 0; j < g.p.size(); ++j)
                r.rows.push_back({g.t[i], g.p[j], table[i][j]});
        r.meta.push_back({"which", g.which});
    }
    r.meta.insert(r.meta.begin(), {"report", g.report});
    return r;
}

Report run_trotter(const RunConfig& c)
{
    const Grids& g = c.grids;
    Report r;
    r.columns = {"t", "n", "deviation", "constant", "fitted_constant", "fit_residual", "top_octave_spread",
                 "monotone"};
    const auto reg = g.regularizer == "cubic" ? fock::Regularizer::cubic : fock::Regularizer::quartic;
    std::vector<semigroup::TrotterReport> reps(g.t.size());
    parallel_for(g.t.size(), c.threads, [&](std::size_t i) {
        reps[i] = semigroup::trotter_report(g.t[i], g.steps, c.trunc, c.params, reg);
    });
    for (std::size_t i = 0; i < reps.size(); ++i)
        for (const auto& row : reps[i].rows)
            r.rows.push_back({g.t[i], static_cast<std::int64_t>(row.n), row.deviation, row.constant,
                              reps[i].fitted_constant, reps[i].fit_residual, reps[i].top_octave_spread,
                              reps[i].monotone});
    r.meta.push_back({"regularizer", g.regularizer});
    return r;
}

Report run_diagnostics(const RunConfig& c)
{
    const Grids& g = c.grids;
    Report r;
    r.meta.push_back({"check", g.check});
    if (g.check == "relative-bound" || g.check == "form-bound") {
        const bool rel = g.check == "relative-bound";
        r.columns = {"epsilon", "dim", "constant", "stabilized", "samples", "violations", "worst_excess"};
        diag::SupOptions o;
        o.seed = c.seed;
        o.random_starts = g.starts;
        std::vector<diag::BoundReport> reps(g.epsilon.size());
        std::vector<diag::VerifyResult> checks(g.epsilon.size());
        parallel_for(g.epsilon.size(), c.threads, [&](std::size_t i) {
            reps[i] = rel ? diag::relative_bound(g.epsilon[i], g.dims, c.params, o)
                          : diag::form_bound(g.epsilon[i], g.dims, c.params, o);
            checks[i] = diag::verify_bound(reps[i], c.params, g.samples, 1e-8, c.seed + 1);
        });
        for (std::size_t i = 0; i < reps.size(); ++i) {
            const auto& rep = reps[i];
            for (std::size_t d = 0; d < rep.trunc_dims.size(); ++d) {
                const bool last = d + 1 == rep.trunc_dims.size();
                r.rows.push_back({rep.epsilon, static_cast<std::int64_t>(rep.trunc_dims[d]),
                                  rep.constants_by_dim[d], rep.stabilized,
                                  static_cast<std::int64_t>(last ? checks[i].samples : 0),
                                  static_cast<std::int64_t>(last ? checks[i].violations : 0),
                                  last ? checks[i].worst_excess : 0.0});
            }
            if (!rep.stabilized || checks[i].violations > 0)
                r.any_invalid = true;
        }
        r.meta.push_back({"seed", static_cast<std::int64_t>(c.seed)});
        r.meta.push_back({"slack", 1e-8});
    } else if (g.check == "accretivity") {
        r.columns = {"offset", "dim", "floor", "mu"};
        const double floor = diag::accretivity_floor(c.trunc, c.params);
        r.rows.push_back({static_cast<std::int64_t>(c.trunc.offset), static_cast<std::int64_t>(c.trunc.dim),
                          floor, c.params.mu});
    } else if (g.check == "subordination") {
        r.columns = {"delta", "dim", "norm", "trend"};
        std::vector<diag::SubordinationReport> reps(g.deltas.size());
        parallel_for(g.deltas.size(), c.threads, [&](std::size_t i) {
            reps[i] = diag::subordination_norm(g.deltas[i], g.dims, c.params);
        });
        for (const auto& rep : reps)
            for (const auto& row : rep.rows)
                r.rows.push_back({rep.delta, static_cast<std::int64_t>(row.dim), row.norm, to_string(rep.trend)});
        r.meta.push_back({"shift", std::string("G+I")});
    } else if (g.check == "carleman") {
        r.columns = {"operator", "t", "window_lo", "window_hi", "exponent", "r2", "violated_p"};
        diag::OperatorKind kind = diag::OperatorKind::g_resolvent;
        if (g.op == "h-resolvent")
            kind = diag::OperatorKind::h_resolvent;
        else if (g.op == "g-semigroup")
            kind = diag::OperatorKind::g_semigroup;
        else if (g.op == "h-semigroup")
            kind = diag::OperatorKind::h_semigroup;
        const bool semi = kind == diag::OperatorKind::g_semigroup || kind == diag::OperatorKind::h_semigroup;
        const std::vector<double> ts = semi ? g.t : std::vector<double>{0.0};
        std::vector<diag::CarlemanFit> fits(ts.size());
        parallel_for(ts.size(), c.threads, [&](std::size_t i) {
            fits[i] = diag::carleman_exponent_fit(kind, c.trunc, c.params, g.window_lo, g.window_hi,
                                                  semi ? ts[i] : 0.1);
        });
        for (std::size_t i = 0; i < fits.size(); ++i)
            r.rows.push_back({g.op, ts[i], static_cast<std::int64_t>(g.window_lo),
                              static_cast<std::int64_t>(g.window_hi), fits[i].exponent, fits[i].r2,
                              static_cast<std::int64_t>(fits[i].violated_p)});
    } else {
        r.columns = {"t", "dim", "scaled_norm", "trace_norm", "scaled_trace"};
        for (const auto& row : diag::small_t_limits(g.t))
            r.rows.push_back({row.t, static_cast<std::int64_t>(row.dim), row.scaled_norm, row.trace_norm,
                              row.scaled_trace});
    }
    return r;
}

// ------------------------------------------------------------------ output

std::string format_double(double x)
{
    if (std::isnan(x))
        return "nan";
    if (std::isinf(x))
        return x > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", x);
    return buf;
}

std::string csv_cell(const Value& v)
{
    if (const double* d = std::get_if<double>(&v))
        return format_double(*d);
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v))
        return std::to_string(*i);
    if (const bool* b = std::get_if<bool>(&v))
        return *b ? "true" : "false";
    const std::string& s = std::get<std::string>(v);
    if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
    std::string q = "\"";
    for (char ch : s)
        q += ch == '"' ? std::string("\"\"") : std::string(1, ch);
    return q + "\"";
}

std::string json_cell(const Value& v)
{
    if (const double* d = std::get_if<double>(&v))
        return std::isfinite(*d) ? format_double(*d) : "null";
    if (const std::int64_t* i = std::get_if<std::int64_t>(&v))
        return std::to_string(*i);
    if (const bool* b = std::get_if<bool>(&v))
        return *b ? "true" : "false";
    return json(std::get<std::string>(v)).dump();
}

} // namespace

ConfigError::ConfigError(std::vector<std::string> errors)
    : std::runtime_error("invalid configuration: " + join(errors, "; ")), errors_(std::move(errors))
{
}

std::string to_string(Command c)
{
    switch (c) {
    case Command::spectrum:
        return "spectrum";
    case Command::trace_formula:
        return "trace-formula";
    case Command::semigroup:
        return "semigroup";
    case Command::trotter:
        return "trotter";
    case Command::diagnostics:
        return "diagnostics";
    }
    return "?";
}

Command parse_command(const std::string& s)
{
    for (Command c : {Command::spectrum, Command::trace_formula, Command::semigroup, Command::trotter,
                      Command::diagnostics})
        if (to_string(c) == s)
            return c;
    throw ConfigError({"command: unknown command '" + s +
                       "' (expected spectrum, trace-formula, semigroup, trotter or diagnostics)"});
}

Format parse_format(const std::string& s)
{
    if (s == "csv")
        return Format::csv;
    if (s == "json")
        return Format::json;
    throw ConfigError({"format: expected csv or json (got '" + s + "')"});
}

RunConfig parse_config(const std::string& json_text)
{
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::parse_error& e) {
        throw ConfigError({std::string("config is not valid JSON: ") + e.what()});
    }
    if (!doc.is_object())
        throw ConfigError({"config: top level must be an object"});

    Reader rd;
    RunConfig cfg;
    rd.keys(doc, "", {"command", "params", "trunc", "grids", "output", "format", "seed", "threads"});
    std::string command;
    rd.text(doc, "", "command", command);
    if (command.empty() && !doc.contains("command"))
        rd.errors.push_back("command: required");
    bool command_ok = false;
    if (!command.empty()) {
        try {
            cfg.command = parse_command(command);
            command_ok = true;
        } catch (const ConfigError& e) {
            rd.errors.insert(rd.errors.end(), e.errors().begin(), e.errors().end());
        }
    }
    if (command_ok && cfg.command == Command::trace_formula)
        cfg.trunc.dim = 160;

    if (const json* p = rd.object(doc, "params")) {
        rd.keys(*p, "params", {"lambda_cubic", "lambda_quartic", "mu", "lambda"});
        rd.number(*p, "params", "lambda_cubic", cfg.params.lambda_cubic);
        rd.number(*p, "params", "lambda_quartic", cfg.params.lambda_quartic);
        rd.number(*p, "params", "mu", cfg.params.mu);
        rd.number(*p, "params", "lambda", cfg.params.lambda_triple);
    }
    if (const json* t = rd.object(doc, "trunc")) {
        rd.keys(*t, "trunc", {"dim", "offset"});
        rd.count(*t, "trunc", "dim", cfg.trunc.dim);
        rd.count(*t, "trunc", "offset", cfg.trunc.offset);
    }
    if (const json* g = rd.object(doc, "grids")) {
        Grids& gr = cfg.grids;
        if (command_ok)
            rd.keys(*g, "grids", grid_keys(cfg.command));
        rd.count(*g, "grids", "count", gr.count);
        rd.count(*g, "grids", "n_min", gr.n_min);
        rd.count(*g, "grids", "n_max", gr.n_max);
        rd.count(*g, "grids", "nodes", gr.nodes);
        rd.count(*g, "grids", "corrections", gr.corrections);
        rd.text(*g, "grids", "report", gr.report);
        rd.numbers(*g, "grids", "t", gr.t);
        rd.number(*g, "grids", "delta", gr.delta);
        rd.count(*g, "grids", "order", gr.order);
        rd.count(*g, "grids", "quad_order", gr.quad_order);
        rd.numbers(*g, "grids", "p", gr.p);
        rd.text(*g, "grids", "which", gr.which);
        rd.counts(*g, "grids", "steps", gr.steps);
        rd.text(*g, "grids", "regularizer", gr.regularizer);
        rd.text(*g, "grids", "check", gr.check);
        rd.numbers(*g, "grids", "epsilon", gr.epsilon);
        rd.counts(*g, "grids", "dims", gr.dims);
        rd.numbers(*g, "grids", "deltas", gr.deltas);
        rd.text(*g, "grids", "operator", gr.op);
        std::vector<std::size_t> window;
        rd.counts(*g, "grids", "window", window);
        if (g->contains("window")) {
            if (window.size() == 2) {
                gr.window_lo = window[0];
                gr.window_hi = window[1];
            } else if (g->at("window").is_array()) {
                rd.errors.push_back("grids.window: expected [lo, hi]");
            }
        }
        rd.count(*g, "grids", "samples", gr.samples);
        rd.count(*g, "grids", "starts", gr.starts);
    }
    rd.text(doc, "", "output", cfg.output_path);
    std::string format;
    rd.text(doc, "", "format", format);
    if (!format.empty()) {
        try {
            cfg.format = parse_format(format);
        } catch (const ConfigError& e) {
            rd.errors.insert(rd.errors.end(), e.errors().begin(), e.errors().end());
        }
    }
    if (doc.contains("seed")) {
        if (!doc["seed"].is_number_unsigned())
            rd.errors.push_back("seed: expected a non-negative integer");
        else
            cfg.seed = doc["seed"].get<std::uint64_t>();
    }
    rd.count(doc, "", "threads", cfg.threads);

    // range checks run on whatever parsed, so one pass reports every problem
    if (command_ok) {
        try {
            validate(cfg);
        } catch (const ConfigError& e) {
            rd.errors.insert(rd.errors.end(), e.errors().begin(), e.errors().end());
        }
    }
    if (!rd.errors.empty())
        throw ConfigError(rd.errors);
    return cfg;
}

RunConfig load_config(const std::string& path)
{
    std::ifstream in(path);
    if (!in)
        throw ConfigError({"config: cannot open '" + path + "': " + std::strerror(errno)});
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_config(ss.str());
}

void validate(const RunConfig& c)
{
    std::vector<std::string> err;
    const auto finite = [&](const char* name, double v) {
        if (!std::isfinite(v))
            err.push_back(std::string("params.") + name + ": must be finite");
    };
    finite("lambda_cubic", c.params.lambda_cubic);
    finite("lambda_quartic", c.params.lambda_quartic);
    finite("mu", c.params.mu);
    finite("lambda", c.params.lambda_triple);
    if (c.trunc.dim < 4 || c.trunc.dim > kMaxDim)
        err.push_back("trunc.dim = " + std::to_string(c.trunc.dim) + ": must be in 4.." + std::to_string(kMaxDim));
    if (c.trunc.offset > 1)
        err.push_back("trunc.offset = " + std::to_string(c.trunc.offset) + ": must be 0 or 1");
    if (c.threads < 1 || c.threads > kMaxThreads)
        err.push_back("threads = " + std::to_string(c.threads) + ": must be in 1.." + std::to_string(kMaxThreads));

    const Grids& g = c.grids;
    switch (c.command) {
    case Command::spectrum:
        if (g.count > c.trunc.dim)
            err.push_back("grids.count: exceeds trunc.dim");
        break;
    case Command::trace_formula:
        if (g.n_min < 2)
            err.push_back("grids.n_min = " + std::to_string(g.n_min) + ": must be >= 2");
        if (g.n_max < g.n_min)
            err.push_back("grids.n_max: must be >= grids.n_min");
        if (g.nodes < 64 || g.nodes > kMaxNodes)
            err.push_back("grids.nodes = " + std::to_string(g.nodes) + ": must be in 64.." +
                          std::to_string(kMaxNodes));
        if (g.corrections < 1 || g.corrections > trace::kMaxCorrections)
            err.push_back("grids.corrections = " + std::to_string(g.corrections) + ": must be in 1.." +
                          std::to_string(trace::kMaxCorrections));
        if (c.trunc.dim < 4 * (g.n_max + 1))
            err.push_back("trunc.dim = " + std::to_string(c.trunc.dim) + ": must be >= 4(n_max+1) = " +
                          std::to_string(4 * (g.n_max + 1)));
        if (!(c.params.lambda_cubic > 0.0))
            err.push_back("params.lambda_cubic: must be > 0 for trace-formula");
        break;
    case Command::semigroup:
        if (!one_of(g.report, {"asymptotics", "dyson", "i2", "schatten"}))
            err.push_back("grids.report = '" + g.report + "': expected asymptotics, dyson, i2 or schatten");
        check_list(err, "t", g.t, true, g.report == "asymptotics");
        if ((g.report == "asymptotics" || g.report == "i2") && !(g.delta >= 0.5))
            err.push_back("grids.delta: must be >= 0.5");
        if (g.report == "dyson") {
            if (g.order < 1 || g.order > semigroup::kDysonOrderCap)
                err.push_back("grids.order = " + std::to_string(g.order) + ": must be in 1.." +
                              std::to_string(semigroup::kDysonOrderCap));
            if (g.quad_order < 4 || g.quad_order > 64)
                err.push_back("grids.quad_order = " + std::to_string(g.quad_order) + ": must be in 4..64");
        }
        if (g.report == "schatten") {
            check_list(err, "p", g.p, true, false);
            if (!one_of(g.which, {"g", "h"}))
                err.push_back("grids.which = '" + g.which + "': expected g or h");
        }
        break;
    case Command::trotter:
        check_list(err, "t", g.t, true, false);
        check_list(err, "steps", g.steps, false, true);
        for (std::size_t i = 0; i < g.steps.size(); ++i)
            if (g.steps[i] < 2)
                err.push_back("grids.steps[" + std::to_string(i) + "]: must be >= 2");
        if (!one_of(g.regularizer, {"quartic", "cubic"}))
            err.push_back("grids.regularizer = '" + g.regularizer + "': expected quartic or cubic");
        break;
    case Command::diagnostics:
        if (!one_of(g.check, {"relative-bound", "form-bound", "accretivity", "subordination", "carleman", "small-t"}))
            err.push_back("grids.check = '" + g.check +
                          "': expected relative-bound, form-bound, accretivity, subordination, carleman or small-t");
        if (g.check == "relative-bound" || g.check == "form-bound") {
            check_list(err, "epsilon", g.epsilon, true, false);
            check_list(err, "dims", g.dims, true, true);
            if (g.samples < 1 || g.samples > 1000000)
                err.push_back("grids.samples: must be in 1..1000000");
        }
        if (g.check == "subordination") {
            check_list(err, "deltas", g.deltas, true, false);
            check_list(err, "dims", g.dims, true, true);
        }
        if (g.check == "relative-bound" || g.check == "form-bound" || g.check == "subordination")
            for (std::size_t i = 0; i < g.dims.size(); ++i)
                if (g.dims[i] < 4 || g.dims[i] > kMaxDim)
                    err.push_back("grids.dims[" + std::to_string(i) + "]: must be in 4.." + std::to_string(kMaxDim));
        if (g.check == "carleman") {
            if (!one_of(g.op, {"g-resolvent", "h-resolvent", "g-semigroup", "h-semigroup"}))
                err.push_back("grids.operator = '" + g.op +
                              "': expected g-resolvent, h-resolvent, g-semigroup or h-semigroup");
            if (g.op == "g-semigroup" || g.op == "h-semigroup")
                check_list(err, "t", g.t, true, false);
        }
        if (g.check == "small-t")
            check_list(err, "t", g.t, true, false);
        break;
    }
    if (!err.empty())
        throw ConfigError(err);
}

Report run(const RunConfig& config)
{
    validate(config);
    Report r;
    switch (config.command) {
    case Command::spectrum:
        r = run_spectrum(config);
        break;
    case Command::trace_formula:
        r = run_trace_formula(config);
        break;
    case Command::semigroup:
        r = run_semigroup(config);
        break;
    case Command::trotter:
        r = run_trotter(config);
        break;
    case Command::diagnostics:
        r = run_diagnostics(config);
        break;
    }
    r.command = to_string(config.command);
    return r;
}

std::string emit(const Report& report, Format format)
{
    std::string out;
    if (format == Format::csv) {
        out += join(report.columns, ",") + "\n";
        for (const auto& row : report.rows) {
            std::vector<std::string> cells;
            for (const Value& v : row)
                cells.push_back(csv_cell(v));
            out += join(cells, ",") + "\n";
        }
        return out;
    }
    out += "{\n  \"command\": " + json(report.command).dump() + ",\n  \"columns\": [";
    for (std::size_t i = 0; i < report.columns.size(); ++i)
        out += (i ? ", " : "") + json(report.columns[i]).dump();
    out += "],\n  \"rows\": [";
    for (std::size_t r = 0; r < report.rows.size(); ++r) {
        out += r ? ",\n    {" : "\n    {";
        for (std::size_t i = 0; i < report.columns.size(); ++i)
            out += (i ? ", " : "") + json(report.columns[i]).dump() + ": " + json_cell(report.rows[r][i]);
        out += "}";
    }
    out += report.rows.empty() ? "],\n" : "\n  ],\n";
    out += "  \"meta\": {";
    for (std::size_t i = 0; i < report.meta.size(); ++i)
        out += (i ? ", " : "") + json(report.meta[i].first).dump() + ": " + json_cell(report.meta[i].second);
    out += "},\n  \"any_invalid\": ";
    out += report.any_invalid ? "true" : "false";
    out += "\n}\n";
    return out;
}

int main_entry(int argc, char** argv)
{
    CLI::App app{"Numerical lab for the truncated Gribov Hamiltonian"};
    std::string config_path, out_path, format;
    std::uint64_t seed = 0;
    std::size_t threads = 0;
    app.add_option("--config", config_path, "JSON run configuration")->envname("GRIBOV_CONFIG")->required();
    auto* out_opt = app.add_option("--out", out_path, "report path (default: stdout)")->envname("GRIBOV_OUT");
    auto* fmt_opt = app.add_option("--format", format, "csv or json")
                        ->envname("GRIBOV_FORMAT")
                        ->check(CLI::IsMember({"csv", "json"}));
    auto* seed_opt = app.add_option("--seed", seed, "random seed")->envname("GRIBOV_SEED");
    auto* thr_opt = app.add_option("--threads", threads, "worker threads")->envname("GRIBOV_THREADS");
    try {
        app.parse(argc, argv);
    } catch (const CLI::Success& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 1;
    }

    try {
        RunConfig cfg = load_config(config_path);
        if (*out_opt)
            cfg.output_path = out_path;
        if (*fmt_opt)
            cfg.format = parse_format(format);
        if (*seed_opt)
            cfg.seed = seed;
        if (*thr_opt)
            cfg.threads = threads;
        const Report report = run(cfg);
        const std::string text = emit(report, cfg.format);
        if (cfg.output_path.empty()) {
            std::cout << text;
        } else {
            std::ofstream f(cfg.output_path, std::ios::binary);
            if (!f) {
                std::cerr << "error: cannot open '" << cfg.output_path << "' for writing: " << std::strerror(errno)
                          << "\n";
                return 1;
            }
            f << text;
            f.close();
            if (!f) {
                std::cerr << "error: writing '" << cfg.output_path << "' failed: " << std::strerror(errno) << "\n";
                return 1;
            }
        }
        if (report.any_invalid) {
            std::cerr << "warning: " << report.command << " report contains rows flagged invalid\n";
            return 2;
        }
        return 0;
    } catch (const ConfigError& e) {
        for (const std::string& m : e.errors())
            std::cerr << "error: " << m << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

} // namespace gribov::cli
