#include "fracwave/kirchhoff_solver.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "fracwave/caputo_l1.hpp"

namespace fracwave {

void ProblemSpec::validate() const
{
    if (!(alpha > 1.0 && alpha < 2.0)) {
        throw std::invalid_argument("ProblemSpec: alpha must lie strictly inside (1, 2)");
    }
    if (!(final_time > 0.0)) {
        throw std::invalid_argument("ProblemSpec: final time must be positive");
    }
    if (!coefficient.value || !(coefficient.lower > 0.0) || !(coefficient.upper >= coefficient.lower)) {
        throw std::invalid_argument("ProblemSpec: coefficient needs 0 < m1 <= m2");
    }
    if (!forcing || !u0 || !grad_u0) {
        throw std::invalid_argument("ProblemSpec: forcing, u0 and grad u0 are required");
    }
    if (u1 && !grad_u1 && !laplacian_u1) {
        throw std::invalid_argument("ProblemSpec: u1 needs either grad u1 or Laplace u1");
    }
}

Vector SolverState::recovered(std::size_t n) const
{
    if (n > current_level) {
        throw std::out_of_range("SolverState::recovered: level not computed yet");
    }
    return ubar.col(static_cast<Eigen::Index>(n)) + time.t(n) * projected_u1;
}

int SolverState::max_iterations() const
{
    int worst = 0;
    for (const auto& d : diagnostics) {
        worst = std::max(worst, d.iterations);
    }
    return worst;
}

SolverState initialize(const ProblemSpec& spec, const TimeMesh<double>& time, std::shared_ptr<const FeSpace> space,
                       const SolverOptions& options)
{
    spec.validate();
    if (!space) {
        throw std::invalid_argument("initialize: null finite element space");
    }
    const auto m = static_cast<Eigen::Index>(space->size());
    const auto levels = static_cast<Eigen::Index>(time.steps() + 1);
    const int quad = space->quad_points;

    SolverState state{spec, time, space, options, {}, {}, {}, {}, {}, 0};
    state.ubar = Eigen::MatrixXd::Zero(m, levels);
    state.v = Eigen::MatrixXd::Zero(m, levels);

    state.projected_u1 = Vector::Zero(m);
    state.laplacian_u1_load = Vector::Zero(m);
    if (spec.u1) {
        state.projected_u1 = l2_projection(space->mesh, *spec.u1, quad, options.tolerance).coeffs;
        state.laplacian_u1_load = spec.laplacian_u1 ? assemble_load(*space->mesh, *spec.laplacian_u1, quad)
                                                    : Vector(-assemble_gradient_load(*space->mesh, *spec.grad_u1, quad));
    }

    const Vector u_initial = ritz_projection(space->mesh, spec.grad_u0, quad, options.tolerance).coeffs;
    state.ubar.col(0) = u_initial;

    const Vector u_first = u_initial + time.tau(1) * state.projected_u1;
    state.ubar.col(1) = u_first - time.t(1) * state.projected_u1;
    const auto row = l1_row(time, spec.beta(), 1);
    state.v.col(1) = row.d(1) * (state.ubar.col(1) - state.ubar.col(0));
    state.current_level = 1;
    return state;
}

void step(SolverState& state, std::size_t n)
{
    if (n < 2 || n > state.steps()) {
        throw std::out_of_range("step: level must lie in [2, N]");
    }
    if (state.current_level != n - 1) {
        throw std::logic_error("step: levels must be advanced in order");
    }
    const FeSpace& space = *state.space;
    const double tn = state.time.t(n);
    const auto cols = static_cast<Eigen::Index>(n);

    const auto [w1, w2] = extrapolation_weights(state.time, n);
    const Vector u_hat = w1 * state.recovered(n - 1) + w2 * state.recovered(n - 2);
    const double kappa = state.spec.coefficient(grad_norm_sq(space.stiffness, u_hat));
    if (state.options.check_coefficient_range &&
        (kappa < state.spec.coefficient.lower || kappa > state.spec.coefficient.upper)) {
        std::ostringstream os;
        os << "step " << n << ": coefficient value " << kappa << " outside declared range ["
           << state.spec.coefficient.lower << ", " << state.spec.coefficient.upper << "]";
        throw StepError(n, os.str());
    }

    const auto row = l1_row(state.time, state.spec.beta(), n);
    const double d1 = row.d(1);
    const std::vector<double> weights = history_weights(row);
    const Eigen::Map<const Vector> w(weights.data(), cols);
    const Vector g_raw = state.v.leftCols(cols) * w;
    const Vector h_raw = state.ubar.leftCols(cols) * w;

    const SpaceTimeFunction& f = state.spec.forcing;
    const Vector load = assemble_load(*space.mesh, [&f, tn](const Point& p) { return f(p, tn); }, space.quad_points);

    const Vector history = g_raw / d1 + h_raw;
    const Vector rhs = load / d1 + (tn * kappa / d1) * state.laplacian_u1_load - space.mass * history;
    const SparseMatrix system = d1 * space.mass + (kappa / d1) * space.stiffness;

    SolveResult solved;
    try {
        solved = spd_solve(system, rhs, state.options.tolerance, Vector(state.ubar.col(cols - 1)));
    } catch (const SolverError& err) {
        throw StepError(n, std::string("step ") + std::to_string(n) + ": " + err.what());
    }

    state.ubar.col(cols) = solved.x;
    state.v.col(cols) = d1 * solved.x + h_raw;
    state.diagnostics.push_back({n, kappa, solved.iterations, solved.residual});
    state.current_level = n;
}

SolverState solve_all(const ProblemSpec& spec, const TimeMesh<double>& time, std::shared_ptr<const FeSpace> space,
                      const SolverOptions& options)
{
    SolverState state = initialize(spec, time, std::move(space), options);
    for (std::size_t n = 2; n <= time.steps(); ++n) {
        step(state, n);
    }
    return state;
}

std::vector<double> apriori_bound_report(const SolverState& state)
{
    std::vector<double> bound(state.current_level + 1);
    for (std::size_t n = 0; n <= state.current_level; ++n) {
        const auto col = static_cast<Eigen::Index>(n);
        const Vector vn = state.v.col(col);
        const Vector un = state.ubar.col(col);
        bound[n] = std::sqrt(l2_norm_sq(state.space->mass, vn)) + std::sqrt(grad_norm_sq(state.space->stiffness, un));
    }
    return bound;
}

} // namespace fracwave
