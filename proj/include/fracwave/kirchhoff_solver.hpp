#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <vector>

#include <Eigen/Core>

#include "fracwave/fem_space.hpp"
#include "fracwave/graded_time.hpp"

namespace fracwave {

/// Kirchhoff coefficient a(.) with its declared bounds m1 <= a <= m2 and
/// Lipschitz constant.
struct KirchhoffCoefficient {
    std::function<double(double)> value;
    double lower = 0.0;
    double upper = 0.0;
    double lipschitz = 0.0;

    double operator()(double w) const { return value(w); }
};

using SpaceTimeFunction = std::function<double(const Point&, double)>;

/// D^alpha u - a(||grad u||^2) Laplace(u) = f with homogeneous Dirichlet
/// data, u(0) = u0 and u_t(0) = u1.
struct ProblemSpec {
    double alpha = 1.5;
    double final_time = 1.0;
    KirchhoffCoefficient coefficient;
    SpaceTimeFunction forcing;
    SpatialFunction u0;
    GradientFunction grad_u0;
    /// Absent means u1 = 0.
    std::optional<SpatialFunction> u1;
    std::optional<GradientFunction> grad_u1;
    /// When present, (Laplace u1, phi_i) is assembled from it instead of
    /// -(grad u1, grad phi_i).
    std::optional<SpatialFunction> laplacian_u1;

    double beta() const { return 0.5 * alpha; }
    /// Throws std::invalid_argument on an inconsistent specification.
    void validate() const;
};

struct SolverOptions {
    double tolerance = default_solver_tolerance;
    /// Reject steps whose evaluated coefficient leaves [m1, m2].
    bool check_coefficient_range = true;
};

struct StepDiagnostics {
    std::size_t level = 0;
    double kappa = 0.0;
    int iterations = 0;
    double residual = 0.0;
};

class StepError : public std::runtime_error {
public:
    StepError(std::size_t level, const std::string& what) : std::runtime_error(what), level_(level) {}
    std::size_t level() const { return level_; }

private:
    std::size_t level_;
};

/// Histories of the order-reduced unknowns: column n of `ubar` holds the
/// coefficients of Ubar^n = U^n - t_n P_h u1, column n of `v` those of V^n.
struct SolverState {
    ProblemSpec spec;
    TimeMesh<double> time;
    std::shared_ptr<const FeSpace> space;
    SolverOptions options;

    Eigen::MatrixXd ubar;
    Eigen::MatrixXd v;
    Vector projected_u1;
    /// (Laplace u1, phi_i), zero when u1 = 0.
    Vector laplacian_u1_load;
    std::vector<StepDiagnostics> diagnostics;
    std::size_t current_level = 0;

    /// U^n = Ubar^n + t_n P_h u1.
    Vector recovered(std::size_t n) const;
    std::size_t steps() const { return time.steps(); }
    int max_iterations() const;
};

/// U^0 = R_h u0, V^0 = 0, U^1 = U^0 + tau_1 P_h u1, Ubar^1 = U^1 - t_1 P_h u1,
/// V^1 = D_N Ubar^1.
SolverState initialize(const ProblemSpec& spec, const TimeMesh<double>& time, std::shared_ptr<const FeSpace> space,
                       const SolverOptions& options = {});

/// Advances from level n - 1 to level n >= 2 with one linear SPD solve.
void step(SolverState& state, std::size_t n);

/// initialize + step for n = 2..N.
SolverState solve_all(const ProblemSpec& spec, const TimeMesh<double>& time, std::shared_ptr<const FeSpace> space,
                      const SolverOptions& options = {});

/// ||V^n|| + ||grad Ubar^n|| for n = 0..current level.
std::vector<double> apriori_bound_report(const SolverState& state);

} // namespace fracwave
