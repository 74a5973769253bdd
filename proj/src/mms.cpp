#include "fracwave/mms.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "fracwave/caputo_l1.hpp"
#include "fracwave/graded_time.hpp"

namespace fracwave {

namespace {

void check_alpha(double alpha)
{
    if (!(alpha > 1.0 && alpha < 2.0)) {
        std::ostringstream os;
        os << "manufactured case: alpha " << alpha << " outside (1, 2)";
        throw std::invalid_argument(os.str());
    }
}

std::size_t nearest_even(double x)
{
    const double even = 2.0 * std::round(0.5 * x);
    return std::max<std::size_t>(2, static_cast<std::size_t>(even));
}

} // namespace

ManufacturedCase::ManufacturedCase(std::string name, int dimension, double alpha, SpatialFunction profile,
                                   GradientFunction profile_grad, SpatialFunction profile_laplacian,
                                   double profile_energy)
    : name_(std::move(name)),
      dimension_(dimension),
      alpha_(alpha),
      profile_(std::move(profile)),
      profile_grad_(std::move(profile_grad)),
      profile_laplacian_(std::move(profile_laplacian)),
      profile_energy_(profile_energy)
{
    check_alpha(alpha);
    // a(w) = 3 + sin w: bounds [2, 4], Lipschitz constant 1.
    coefficient_ = {[](double w) { return 3.0 + std::sin(w); }, 2.0, 4.0, 1.0};
    caputo_cubic_ = gamma_fn(4.0) / gamma_fn(4.0 - alpha);
    caputo_power_ = gamma_fn(alpha + 1.0);
}

double ManufacturedCase::temporal(double t) const { return t * t * t + std::pow(t, alpha_); }

double ManufacturedCase::temporal_caputo(double t) const
{
    return caputo_cubic_ * std::pow(t, 3.0 - alpha_) + caputo_power_;
}

double ManufacturedCase::energy(double t) const
{
    const double psi = temporal(t);
    return psi * psi * profile_energy_;
}

double ManufacturedCase::forcing(const Point& p, double t) const
{
    return temporal_caputo(t) * profile_(p) - coefficient_(energy(t)) * laplacian_u(p, t);
}

SpatialMesh ManufacturedCase::make_mesh(std::size_t cells) const
{
    return dimension_ == 1 ? build_mesh_1d(0.0, std::numbers::pi, cells) : build_mesh_2d_unit_square(cells);
}

ProblemSpec ManufacturedCase::problem() const
{
    ProblemSpec spec;
    spec.alpha = alpha_;
    spec.final_time = 1.0;
    spec.coefficient = coefficient_;
    spec.forcing = [self = *this](const Point& p, double t) { return self.forcing(p, t); };
    spec.u0 = [](const Point&) { return 0.0; };
    spec.grad_u0 = [](const Point&) { return Point(0.0, 0.0); };
    return spec;
}

ManufacturedCase example1_case(double alpha)
{
    return ManufacturedCase(
        "ex1", 1, alpha, [](const Point& p) { return std::sin(p.x()); },
        [](const Point& p) { return Point(std::cos(p.x()), 0.0); }, [](const Point& p) { return -std::sin(p.x()); },
        0.5 * std::numbers::pi);
}

ManufacturedCase example2_case(double alpha)
{
    return ManufacturedCase(
        "ex2", 2, alpha, [](const Point& p) { return (p.x() - p.x() * p.x()) * (p.y() - p.y() * p.y()); },
        [](const Point& p) {
            const double bx = p.x() - p.x() * p.x();
            const double by = p.y() - p.y() * p.y();
            return Point((1.0 - 2.0 * p.x()) * by, bx * (1.0 - 2.0 * p.y()));
        },
        [](const Point& p) { return -2.0 * ((p.x() - p.x() * p.x()) + (p.y() - p.y() * p.y())); }, 1.0 / 45.0);
}

ManufacturedCase make_case(const std::string& example, double alpha)
{
    if (example == "ex1") {
        return example1_case(alpha);
    }
    if (example == "ex2") {
        return example2_case(alpha);
    }
    throw std::invalid_argument("unknown example '" + example + "' (expected ex1 or ex2)");
}

std::size_t coupled_space_cells(std::size_t steps, double beta)
{
    return nearest_even(std::pow(static_cast<double>(steps), 2.0 - beta));
}

std::size_t coupled_time_steps(std::size_t cells, double beta)
{
    return nearest_even(std::pow(static_cast<double>(cells), 2.0 / (2.0 - beta)));
}

std::vector<std::optional<double>> observed_order(std::span<const std::pair<std::size_t, double>> errors)
{
    if (errors.size() < 2) {
        throw std::invalid_argument("observed_order: need at least two refinement levels");
    }
    std::vector<std::optional<double>> orders(errors.size());
    for (std::size_t k = 0; k + 1 < errors.size(); ++k) {
        if (errors[k + 1].first != 2 * errors[k].first) {
            std::ostringstream os;
            os << "observed_order: refinement " << errors[k].first << " -> " << errors[k + 1].first
               << " is not a doubling";
            throw std::invalid_argument(os.str());
        }
        orders[k] = std::log2(errors[k].second / errors[k + 1].second);
    }
    return orders;
}

CaseRun run_case(const ManufacturedCase& mcase, std::size_t steps, std::size_t cells, double grading,
                 const StudyOptions& options)
{
    const auto start = std::chrono::steady_clock::now();
    const TimeMesh<double> time(1.0, steps, grading);
    auto space = std::make_shared<const FeSpace>(mcase.make_mesh(cells), options.quad_points);
    SolverOptions solver_options;
    solver_options.tolerance = options.tolerance;
    const SolverState state = solve_all(mcase.problem(), time, space, solver_options);
    const std::vector<double> bound = apriori_bound_report(state);

    const int error_quad = options.error_quad_points.value_or(options.quad_points);
    CaseRun run;
    run.levels.reserve(steps + 1);
    double worst = 0.0;
    for (std::size_t n = 0; n <= steps; ++n) {
        const double tn = time.t(n);
        const Vector un = state.recovered(n);
        LevelRecord rec;
        rec.n = n;
        rec.t = tn;
        rec.h1_error = h1_seminorm_error(*space->mesh, un, [&](const Point& p) { return mcase.grad_u(p, tn); },
                                         error_quad);
        rec.l2_error = l2_error(*space->mesh, un, [&](const Point& p) { return mcase.u(p, tn); }, error_quad);
        rec.bound = bound[n];
        if (n >= 1) {
            worst = std::max(worst, rec.h1_error);
        }
        run.levels.push_back(rec);
    }

    run.summary.alpha = mcase.alpha();
    run.summary.steps = steps;
    run.summary.cells = cells;
    run.summary.grading = grading;
    run.summary.error = worst;
    run.summary.cg_iterations = state.max_iterations();
    if (options.timing) {
        run.summary.seconds =
            std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
    return run;
}

void parallel_for_each_index(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn)
{
    const unsigned workers = std::max(1u, std::min<unsigned>(threads, static_cast<unsigned>(count)));
    if (workers <= 1) {
        for (std::size_t i = 0; i < count; ++i) {
            fn(i);
        }
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    std::vector<std::thread> pool;
    pool.reserve(workers);
    for (unsigned w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
            for (std::size_t i = next++; i < count; i = next++) {
                try {
                    fn(i);
                } catch (...) {
                    const std::lock_guard lock(failure_mutex);
                    if (!failure) {
                        failure = std::current_exception();
                    }
                }
            }
        });
    }
    for (auto& t : pool) {
        t.join();
    }
    if (failure) {
        std::rethrow_exception(failure);
    }
}

namespace {

ConvergenceReport run_study(StudyKind kind, std::span<const ManufacturedCase> cases,
                            std::span<const std::size_t> levels, const StudyOptions& options)
{
    if (levels.empty()) {
        throw std::invalid_argument("study: refinement list is empty");
    }
    struct Job {
        std::size_t case_index;
        std::size_t steps;
        std::size_t cells;
        double grading;
        bool capped;
    };
    std::vector<Job> jobs;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        const double beta = cases[c].beta();
        const double grading = options.grading.value_or(recommended_grading(beta));
        for (const std::size_t level : levels) {
            if (kind == StudyKind::temporal) {
                jobs.push_back({c, level, coupled_space_cells(level, beta), grading, false});
            } else {
                const std::size_t coupled = coupled_time_steps(level, beta);
                const bool capped = coupled > options.max_steps;
                jobs.push_back({c, capped ? options.max_steps : coupled, level, grading, capped});
            }
        }
    }

    std::vector<RunSummary> results(jobs.size());
    parallel_for_each_index(jobs.size(), options.threads, [&](std::size_t i) {
        const Job& job = jobs[i];
        results[i] = run_case(cases[job.case_index], job.steps, job.cells, job.grading, options).summary;
        results[i].capped = job.capped;
    });

    ConvergenceReport report;
    report.kind = kind;
    for (std::size_t c = 0; c < cases.size(); ++c) {
        std::vector<std::pair<std::size_t, double>> errors;
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const RunSummary& r = results[c * levels.size() + k];
            errors.emplace_back(kind == StudyKind::temporal ? r.steps : r.cells, r.error);
        }
        std::vector<std::optional<double>> orders(levels.size());
        if (levels.size() >= 2) {
            std::vector<std::pair<std::size_t, double>> keyed;
            for (std::size_t k = 0; k < levels.size(); ++k) {
                keyed.emplace_back(levels[k], errors[k].second);
            }
            orders = observed_order(keyed);
        }
        for (std::size_t k = 0; k < levels.size(); ++k) {
            const RunSummary& r = results[c * levels.size() + k];
            report.rows.push_back({r, orders[k]});
            if (r.capped) {
                std::ostringstream os;
                os << "alpha=" << r.alpha << " Ms=" << r.cells << ": coupled N=" << coupled_time_steps(r.cells, cases[c].beta())
                   << " capped at N=" << r.steps;
                report.notes.push_back(os.str());
            }
        }
    }
    return report;
}

} // namespace

ConvergenceReport temporal_study(std::span<const ManufacturedCase> cases, std::span<const std::size_t> steps_list,
                                 const StudyOptions& options)
{
    return run_study(StudyKind::temporal, cases, steps_list, options);
}

ConvergenceReport temporal_study(const ManufacturedCase& mcase, std::span<const std::size_t> steps_list,
                                 const StudyOptions& options)
{
    return run_study(StudyKind::temporal, std::span<const ManufacturedCase>(&mcase, 1), steps_list, options);
}

ConvergenceReport spatial_study(std::span<const ManufacturedCase> cases, std::span<const std::size_t> cells_list,
                                const StudyOptions& options)
{
    return run_study(StudyKind::spatial, cases, cells_list, options);
}

ConvergenceReport spatial_study(const ManufacturedCase& mcase, std::span<const std::size_t> cells_list,
                                const StudyOptions& options)
{
    return run_study(StudyKind::spatial, std::span<const ManufacturedCase>(&mcase, 1), cells_list, options);
}

} // namespace fracwave
