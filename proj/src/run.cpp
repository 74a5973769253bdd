#include "fracwave/cli.hpp"

#include <algorithm>
#include <exception>
#include <fstream>
#include <iomanip>
#include <ostream>

namespace fracwave {

namespace {

std::vector<ManufacturedCase> build_cases(const RunConfig& cfg)
{
    std::vector<ManufacturedCase> cases;
    for (const double a : cfg.alphas) {
        cases.push_back(make_case(cfg.example, a));
    }
    return cases;
}

std::ofstream open_output(const std::string& path)
{
    std::ofstream file(path);
    if (!file) {
        throw std::runtime_error("cannot open output file '" + path + "'");
    }
    return file;
}

void run_solve(const RunConfig& cfg, std::ostream& out)
{
    const ManufacturedCase mcase = make_case(cfg.example, cfg.alphas.front());
    const std::size_t steps = cfg.steps.front();
    const std::size_t cells = cfg.cells.empty() ? coupled_space_cells(steps, mcase.beta()) : cfg.cells.front();
    const double grading = cfg.grading.value_or(recommended_grading(mcase.beta()));
    const CaseRun run = run_case(mcase, steps, cells, grading, cfg.study_options());

    auto file = open_output(cfg.output);
    write_trajectory_csv(file, run.levels);
    out << "solve " << cfg.example << " alpha=" << format_number("%g", mcase.alpha()) << " N=" << steps
        << " Ms=" << cells << " r=" << format_number("%.6f", grading) << '\n'
        << "max H1 error " << format_number("%.2E", run.summary.error) << ", " << run.levels.size()
        << " time levels written to " << cfg.output << '\n';
}

void run_study(const RunConfig& cfg, std::ostream& out)
{
    const auto cases = build_cases(cfg);
    const StudyOptions options = cfg.study_options();
    const ConvergenceReport report = cfg.command == Command::temporal_study
                                         ? temporal_study(cases, cfg.steps, options)
                                         : spatial_study(cases, cfg.cells, options);
    auto file = open_output(cfg.output);
    write_convergence_csv(file, report, cfg.timing);
    write_convergence_table(out, report);
}

void run_caputo_check(const RunConfig& cfg, std::ostream& out)
{
    const double grading = cfg.grading.value_or(recommended_grading(cfg.beta));
    const auto table = truncation_study(cfg.beta, cfg.sigma, std::span<const std::size_t>(cfg.steps), grading);
    auto file = open_output(cfg.output);
    write_truncation_csv(file, table);
    out << "L1 truncation of t^" << format_number("%g", cfg.sigma) << ", beta=" << format_number("%g", cfg.beta)
        << ", r=" << format_number("%.6f", grading) << '\n';
    out << std::setw(8) << "N" << std::setw(16) << "weighted error" << std::setw(11) << "rate" << '\n';
    for (const auto& row : table) {
        out << std::setw(8) << row.steps << std::setw(16) << format_number("%.6E", row.weighted_error)
            << std::setw(11) << (row.rate ? format_number("%.6f", *row.rate) : std::string("-")) << '\n';
    }
}

void run_bound_report(const RunConfig& cfg, std::ostream& out)
{
    const auto cases = build_cases(cfg);
    const StudyOptions options = cfg.study_options();
    struct Job {
        std::size_t case_index;
        std::size_t steps;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        for (const std::size_t n : cfg.steps) {
            jobs.push_back({c, n});
        }
    }
    struct Row {
        double alpha;
        std::size_t steps;
        std::size_t cells;
        double grading;
        double max_bound;
        double final_bound;
    };
    std::vector<Row> rows(jobs.size());
    parallel_for_each_index(jobs.size(), options.threads, [&](std::size_t i) {
        const ManufacturedCase& mcase = cases[jobs[i].case_index];
        const std::size_t steps = jobs[i].steps;
        const std::size_t cells = coupled_space_cells(steps, mcase.beta());
        const double grading = options.grading.value_or(recommended_grading(mcase.beta()));
        const CaseRun run = run_case(mcase, steps, cells, grading, options);
        double worst = 0.0;
        for (const auto& rec : run.levels) {
            worst = std::max(worst, rec.bound);
        }
        rows[i] = {mcase.alpha(), steps, cells, grading, worst, run.levels.back().bound};
    });

    auto file = open_output(cfg.output);
    file << "alpha,N,Ms,r,max_bound,final_bound\n";
    out << "a-priori bound quantity ||V^n|| + ||grad Ubar^n||\n"
        << std::setw(6) << "alpha" << std::setw(8) << "N" << std::setw(8) << "Ms" << std::setw(14) << "max_n"
        << std::setw(14) << "at T" << '\n';
    for (const auto& r : rows) {
        file << format_number("%g", r.alpha) << ',' << r.steps << ',' << r.cells << ',' << format_number("%.6f", r.grading)
             << ',' << format_number("%.6E", r.max_bound) << ',' << format_number("%.6E", r.final_bound) << '\n';
        out << std::setw(6) << format_number("%g", r.alpha) << std::setw(8) << r.steps << std::setw(8) << r.cells
            << std::setw(14) << format_number("%.6E", r.max_bound) << std::setw(14)
            << format_number("%.6E", r.final_bound) << '\n';
    }
}

} // namespace

int run(const RunConfig& config, std::ostream& out, std::ostream& err)
{
    try {
        switch (config.command) {
        case Command::solve:
            run_solve(config, out);
            break;
        case Command::temporal_study:
        case Command::spatial_study:
            run_study(config, out);
            break;
        case Command::caputo_check:
            run_caputo_check(config, out);
            break;
        case Command::bound_report:
            run_bound_report(config, out);
            break;
        }
    } catch (const StepError& e) {
        err << "fracwave: " << command_name(config.command) << " failed at level " << e.level() << ": " << e.what()
            << '\n';
        return 2;
    } catch (const std::exception& e) {
        err << "fracwave: " << command_name(config.command) << " failed: " << e.what() << '\n';
        return 1;
    }
    return 0;
}

} // namespace fracwave
