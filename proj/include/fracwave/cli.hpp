#pragma once

#include <cstddef>
#include <iosfwd>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "fracwave/caputo_l1.hpp"
#include "fracwave/mms.hpp"

namespace fracwave {

enum class Command { solve, temporal_study, spatial_study, caputo_check, bound_report };

std::string_view command_name(Command c);

/// Validated run configuration. Keys of the key=value format:
///
///   command     solve | temporal-study | spatial-study | caputo-check | bound-report
///   example     ex1 | ex2
///   alpha       comma list in (1, 2)
///   N, Ms       comma lists of step / cell counts (>= 2)
///   r           grading exponent override (>= 1)
///   quadrature  points per element (1..7 in 1D; 1, 3, 6, 7 in 2D)
///   error_quadrature  points per element for the error norms (default: quadrature)
///   tol         relative residual of the linear solves
///   output      CSV path
///   threads     worker count across independent runs (1 = serial reference)
///   beta, sigma order and test exponent for caputo-check
///   n_cap       largest N a spatial study may couple to
///   timing      on | off (off leaves the seconds column empty)
struct RunConfig {
    Command command = Command::solve;
    std::string example = "ex1";
    std::vector<double> alphas;
    std::vector<std::size_t> steps;
    std::vector<std::size_t> cells;
    std::optional<double> grading;
    int quad_points = default_quadrature_points;
    std::optional<int> error_quad_points;
    double tolerance = default_solver_tolerance;
    std::string output;
    unsigned threads = 1;
    double beta = 0.5;
    double sigma = 0.5;
    std::size_t max_steps = 4096;
    bool timing = true;

    StudyOptions study_options() const;
};

/// Raised for malformed or out-of-range configuration; names the offending key.
class ConfigError : public std::invalid_argument {
public:
    ConfigError(std::string key, const std::string& message)
        : std::invalid_argument(key.empty() ? message : key + ": " + message), key_(std::move(key))
    {
    }
    const std::string& key() const { return key_; }

private:
    std::string key_;
};

/// Parses whitespace-separated key=value pairs ('#' starts a comment line).
RunConfig parse_config(std::string_view text);

/// Command-line flags: --key=value, --key value, key=value, and
/// --config <file> to read key=value pairs from a file (flags given later win).
/// FRACWAVE_THREADS, when set, overrides threads.
RunConfig parse_args(int argc, const char* const* argv);

/// Executes the configured command, writes the CSV report to config.output and
/// an aligned table to `out`. Returns the process exit status.
int run(const RunConfig& config, std::ostream& out, std::ostream& err);

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report, bool timing);
void write_convergence_table(std::ostream& os, const ConvergenceReport& report);
void write_trajectory_csv(std::ostream& os, const std::vector<LevelRecord>& levels);
void write_truncation_csv(std::ostream& os, const std::vector<TruncationRow<double>>& table);

/// printf-style formatting into a std::string.
std::string format_number(const char* fmt, double value);

} // namespace fracwave
