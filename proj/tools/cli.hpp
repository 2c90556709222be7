#pragma once

// Batch front end: JSON run configuration -> report table -> CSV or JSON.

#include "gribov/fock_ops.hpp"

#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace gribov::cli {

enum class Command { spectrum, trace_formula, semigroup, trotter, diagnostics };
enum class Format { csv, json };

inline constexpr std::size_t kMaxDim = 1024;
inline constexpr std::size_t kMaxList = 4096;
inline constexpr std::size_t kMaxNodes = 1 << 16;
inline constexpr std::size_t kMaxThreads = 256;

/// Every offending field, one message each.
class ConfigError : public std::runtime_error
{
public:
    explicit ConfigError(std::vector<std::string> errors);
    const std::vector<std::string>& errors() const noexcept { return errors_; }

private:
    std::vector<std::string> errors_;
};

struct Grids
{
    // spectrum
    std::size_t count = 0; ///< 0: all eigenvalues
    // trace-formula
    std::size_t n_min = 4, n_max = 12, nodes = 512, corrections = 4;
    // semigroup
    std::string report = "asymptotics"; ///< asymptotics | dyson | i2 | schatten
    std::vector<double> t{1e-3, 1e-2, 1e-1};
    double delta = 0.5;
    std::size_t order = 8; ///< Dyson K
    std::size_t quad_order = 8;
    std::vector<double> p{1.0, 2.0};
    std::string which = "h"; ///< g | h
    // trotter
    std::vector<std::size_t> steps{2, 4, 8, 16, 32, 64, 128, 256};
    std::string regularizer = "quartic";
    // diagnostics
    std::string check = "accretivity"; ///< relative-bound | form-bound | accretivity | subordination | carleman | small-t
    std::vector<double> epsilon{0.1, 1.0};
    std::vector<std::size_t> dims{50, 100, 200};
    std::vector<double> deltas{0.5};
    std::string op = "g-resolvent";
    std::size_t window_lo = 20, window_hi = 200;
    std::size_t samples = 10000;
    std::size_t starts = 32;
};

struct RunConfig
{
    Command command = Command::spectrum;
    fock::GribovParams params{1.0, 1.0, 0.1, 0.05};
    fock::Truncation trunc{64, 0};
    Grids grids;
    std::string output_path; ///< empty: stdout
    Format format = Format::csv;
    std::uint64_t seed = 20240521;
    std::size_t threads = 1;
};

/// Strict parse: unknown keys and type errors are collected and thrown together.
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Range checks that need the whole config (throws ConfigError).
void validate(const RunConfig& config);

std::string to_string(Command c);
Command parse_command(const std::string& s);
Format parse_format(const std::string& s);

using Value = std::variant<double, std::int64_t, std::string, bool>;

struct Report
{
    std::string command;
    std::vector<std::string> columns;
    std::vector<std::vector<Value>> rows;
    std::vector<std::pair<std::string, Value>> meta;
    bool any_invalid = false;
};

Report run(const RunConfig& config);

/// Floating point as %.17g; non-finite values become nan/inf in CSV and null in JSON.
std::string emit(const Report& report, Format format);

/// Full command line entry point; returns the process exit code (0, 1 or 2).
int main_entry(int argc, char** argv);

} // namespace gribov::cli
