#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "fracwave/fem_space.hpp"
#include "fracwave/kirchhoff_solver.hpp"

namespace fracwave {

/// Separable manufactured solution u(x, t) = psi(t) X(x) with
/// psi(t) = t^3 + t^alpha, so u(., 0) = 0 and u_t(., 0) = 0.
/// The forcing is f = D^alpha psi X - a(psi^2 ||grad X||^2) psi Laplace(X).
class ManufacturedCase {
public:
    ManufacturedCase(std::string name, int dimension, double alpha, SpatialFunction profile,
                     GradientFunction profile_grad, SpatialFunction profile_laplacian, double profile_energy);

    const std::string& name() const { return name_; }
    int dimension() const { return dimension_; }
    double alpha() const { return alpha_; }
    double beta() const { return 0.5 * alpha_; }
    const KirchhoffCoefficient& coefficient() const { return coefficient_; }

    double temporal(double t) const;
    /// Caputo derivative of order alpha of the temporal factor.
    double temporal_caputo(double t) const;

    double u(const Point& p, double t) const { return temporal(t) * profile_(p); }
    Point grad_u(const Point& p, double t) const { return temporal(t) * profile_grad_(p); }
    double laplacian_u(const Point& p, double t) const { return temporal(t) * profile_laplacian_(p); }
    double caputo_u(const Point& p, double t) const { return temporal_caputo(t) * profile_(p); }
    /// l(u(t)) = ||grad u(t)||^2.
    double energy(double t) const;
    double forcing(const Point& p, double t) const;

    SpatialMesh make_mesh(std::size_t cells) const;
    ProblemSpec problem() const;

private:
    std::string name_;
    int dimension_;
    double alpha_;
    KirchhoffCoefficient coefficient_;
    SpatialFunction profile_;
    GradientFunction profile_grad_;
    SpatialFunction profile_laplacian_;
    double profile_energy_;
    double caputo_cubic_;
    double caputo_power_;
};

/// Omega = (0, pi), a(w) = 3 + sin w, u = (t^3 + t^alpha) sin x.
ManufacturedCase example1_case(double alpha);
/// Omega = (0, 1)^2, a(w) = 3 + sin w, u = (t^3 + t^alpha)(x - x^2)(y - y^2).
ManufacturedCase example2_case(double alpha);
ManufacturedCase make_case(const std::string& example, double alpha);

/// Nearest even integer to N^(2 - beta), at least 2.
std::size_t coupled_space_cells(std::size_t steps, double beta);
/// Nearest even integer to Ms^(2 / (2 - beta)), at least 2.
std::size_t coupled_time_steps(std::size_t cells, double beta);

/// log2(E_k / E_{k+1}) for consecutive entries; the last entry has no order.
/// Keys (N or Ms) must double from one entry to the next.
std::vector<std::optional<double>> observed_order(std::span<const std::pair<std::size_t, double>> errors);

struct StudyOptions {
    /// Temporal grading; defaults to (2 - beta) / beta.
    std::optional<double> grading;
    int quad_points = default_quadrature_points;
    /// Rule for the error norms; defaults to quad_points. A 1-point rule
    /// samples the gradient error at element centroids.
    std::optional<int> error_quad_points;
    double tolerance = default_solver_tolerance;
    /// Spatial studies clamp the coupled N to this.
    std::size_t max_steps = 4096;
    unsigned threads = 1;
    bool timing = true;
};

struct RunSummary {
    double alpha = 0.0;
    std::size_t steps = 0;
    std::size_t cells = 0;
    double grading = 1.0;
    /// max_{1<=n<=N} ||grad(u(t_n) - U^n)||
    double error = 0.0;
    double seconds = 0.0;
    int cg_iterations = 0;
    bool capped = false;
};

struct LevelRecord {
    std::size_t n = 0;
    double t = 0.0;
    double h1_error = 0.0;
    double l2_error = 0.0;
    double bound = 0.0;
};

/// Solves one manufactured problem and measures every level.
struct CaseRun {
    RunSummary summary;
    std::vector<LevelRecord> levels;
};

CaseRun run_case(const ManufacturedCase& mcase, std::size_t steps, std::size_t cells, double grading,
                 const StudyOptions& options);

struct ConvergenceRow {
    RunSummary run;
    std::optional<double> order;
};

enum class StudyKind { temporal, spatial };

struct ConvergenceReport {
    StudyKind kind = StudyKind::temporal;
    std::vector<ConvergenceRow> rows;
    std::vector<std::string> notes;
};

/// Refines N with Ms = coupled_space_cells(N, beta). Runs for several cases are
/// fanned out over options.threads workers; rows come back ordered by case then level.
ConvergenceReport temporal_study(std::span<const ManufacturedCase> cases, std::span<const std::size_t> steps_list,
                                 const StudyOptions& options = {});
ConvergenceReport temporal_study(const ManufacturedCase& mcase, std::span<const std::size_t> steps_list,
                                 const StudyOptions& options = {});
/// Refines Ms with N = coupled_time_steps(Ms, beta), clamped to options.max_steps.
ConvergenceReport spatial_study(std::span<const ManufacturedCase> cases, std::span<const std::size_t> cells_list,
                                const StudyOptions& options = {});
ConvergenceReport spatial_study(const ManufacturedCase& mcase, std::span<const std::size_t> cells_list,
                                const StudyOptions& options = {});

/// Runs fn(i) for i in [0, count) on up to `threads` workers; results keep index order.
void parallel_for_each_index(std::size_t count, unsigned threads, const std::function<void(std::size_t)>& fn);

} // namespace fracwave
