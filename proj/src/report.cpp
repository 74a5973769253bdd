#include "fracwave/cli.hpp"

#include <cstdio>
#include <iomanip>
#include <ostream>

namespace fracwave {

std::string format_number(const char* fmt, double value)
{
    char buffer[64];
    std::snprintf(buffer, sizeof(buffer), fmt, value);
    return buffer;
}

namespace {

std::string format_alpha(double alpha) { return format_number("%g", alpha); }

std::string format_order(const std::optional<double>& order)
{
    return order ? format_number("%.6f", *order) : std::string();
}

} // namespace

void write_convergence_csv(std::ostream& os, const ConvergenceReport& report, bool timing)
{
    os << "alpha,N,Ms,r,error,oc,seconds,cg_iters\n";
    for (const auto& row : report.rows) {
        const RunSummary& r = row.run;
        os << format_alpha(r.alpha) << ',' << r.steps << ',' << r.cells << ',' << format_number("%.6f", r.grading)
           << ',' << format_number("%.2E", r.error) << ',' << format_order(row.order) << ','
           << (timing ? format_number("%.3f", r.seconds) : std::string()) << ',' << r.cg_iterations << '\n';
    }
}

void write_convergence_table(std::ostream& os, const ConvergenceReport& report)
{
    os << (report.kind == StudyKind::temporal ? "temporal study" : "spatial study")
       << " (error in max-in-time H1-seminorm)\n";
    os << std::setw(6) << "alpha" << std::setw(8) << "N" << std::setw(8) << "Ms" << std::setw(11) << "r"
       << std::setw(11) << "error" << std::setw(11) << "OC" << std::setw(10) << "seconds" << std::setw(9) << "cg_max"
       << '\n';
    for (const auto& row : report.rows) {
        const RunSummary& r = row.run;
        os << std::setw(6) << format_alpha(r.alpha) << std::setw(8) << r.steps << std::setw(8) << r.cells
           << std::setw(11) << format_number("%.6f", r.grading) << std::setw(11) << format_number("%.2E", r.error)
           << std::setw(11) << (row.order ? format_order(row.order) : std::string("-")) << std::setw(10)
           << format_number("%.3f", r.seconds) << std::setw(9) << r.cg_iterations << '\n';
    }
    for (const auto& note : report.notes) {
        os << "note: " << note << '\n';
    }
}

void write_trajectory_csv(std::ostream& os, const std::vector<LevelRecord>& levels)
{
    os << "n,t_n,h1_error,l2_error,bound_quantity\n";
    for (const auto& rec : levels) {
        os << rec.n << ',' << format_number("%.10e", rec.t) << ',' << format_number("%.10e", rec.h1_error) << ','
           << format_number("%.10e", rec.l2_error) << ',' << format_number("%.10e", rec.bound) << '\n';
    }
}

void write_truncation_csv(std::ostream& os, const std::vector<TruncationRow<double>>& table)
{
    os << "N,r,weighted_error,rate\n";
    for (const auto& row : table) {
        os << row.steps << ',' << format_number("%.6f", row.grading) << ',' << format_number("%.6E", row.weighted_error)
           << ',' << format_order(row.rate) << '\n';
    }
}

} // namespace fracwave
