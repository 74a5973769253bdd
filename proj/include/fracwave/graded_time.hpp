#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <sstream>
#include <stdexcept>
#include <utility>
#include <vector>

#include "fracwave/special_functions.hpp"

namespace fracwave {

/// Power-law graded temporal grid t_n = T (n/N)^r on [0, T].
///
/// Grid points and step sizes are both stored; everything downstream reads
/// tau(n) from here rather than differencing t.
template <typename Scalar = double>
class TimeMesh {
public:
    TimeMesh(Scalar final_time, std::size_t steps, Scalar grading)
        : final_time_(final_time), steps_(steps), grading_(grading)
    {
        if (!(final_time > Scalar(0))) {
            throw std::invalid_argument("TimeMesh: final time T must be positive");
        }
        if (steps < 2) {
            throw std::invalid_argument("TimeMesh: need N >= 2 steps");
        }
        if (!(grading >= Scalar(1))) {
            throw std::invalid_argument("TimeMesh: grading exponent r must be >= 1");
        }
        points_.resize(steps + 1);
        const Scalar inv_n = Scalar(1) / Scalar(steps);
        for (std::size_t n = 0; n <= steps; ++n) {
            points_[n] = final_time * std::pow(Scalar(n) * inv_n, grading);
        }
        points_.front() = Scalar(0);
        points_.back() = final_time;

        steps_sizes_.resize(steps);
        for (std::size_t n = 1; n <= steps; ++n) {
            steps_sizes_[n - 1] = points_[n] - points_[n - 1];
        }
    }

    Scalar final_time() const { return final_time_; }
    std::size_t steps() const { return steps_; }
    Scalar grading() const { return grading_; }

    /// t_n, 0 <= n <= N.
    Scalar t(std::size_t n) const { return points_.at(n); }
    /// tau_n = t_n - t_{n-1}, 1 <= n <= N.
    Scalar tau(std::size_t n) const
    {
        if (n == 0 || n > steps_) {
            throw std::out_of_range("TimeMesh::tau: index must lie in [1, N]");
        }
        return steps_sizes_[n - 1];
    }

    const std::vector<Scalar>& points() const { return points_; }
    const std::vector<Scalar>& step_sizes() const { return steps_sizes_; }

    Scalar max_step() const { return *std::max_element(steps_sizes_.begin(), steps_sizes_.end()); }

private:
    Scalar final_time_;
    std::size_t steps_;
    Scalar grading_;
    std::vector<Scalar> points_;
    std::vector<Scalar> steps_sizes_;
};

template <typename Scalar>
TimeMesh<Scalar> build_graded_mesh(Scalar final_time, std::size_t steps, Scalar grading)
{
    return TimeMesh<Scalar>(final_time, steps, grading);
}

/// Weights (w1, w2) of the two-level extrapolant w^n ~ w1 w^{n-1} + w2 w^{n-2}.
template <typename Scalar>
std::pair<Scalar, Scalar> extrapolation_weights(const TimeMesh<Scalar>& mesh, std::size_t n)
{
    if (n < 2 || n > mesh.steps()) {
        std::ostringstream os;
        os << "extrapolation_weights: level " << n << " outside [2, " << mesh.steps() << "]";
        throw std::out_of_range(os.str());
    }
    const Scalar prev = mesh.tau(n - 1);
    const Scalar cur = mesh.tau(n);
    return {(prev + cur) / prev, -cur / prev};
}

/// Grading exponent (2 - beta) / beta that balances the L1 truncation error
/// against the initial-layer singularity of order t^beta.
template <typename Scalar>
Scalar recommended_grading(Scalar beta)
{
    if (!(beta > Scalar(0) && beta < Scalar(1))) {
        throw std::invalid_argument("recommended_grading: beta must lie in (0, 1)");
    }
    return (Scalar(2) - beta) / beta;
}

/// Largest admissible step for the discrete fractional Gronwall inequality.
template <typename Scalar>
Scalar gronwall_step_bound(Scalar beta, Scalar lambda)
{
    return std::pow(Scalar(4) * gamma_fn(Scalar(2) - beta) * lambda, Scalar(-1) / beta);
}

/// True iff max tau_n <= (4 Gamma(2 - beta) Lambda)^(-1/beta).
template <typename Scalar>
bool gronwall_step_condition(const TimeMesh<Scalar>& mesh, Scalar beta, Scalar lambda)
{
    return mesh.max_step() <= gronwall_step_bound(beta, lambda);
}

} // namespace fracwave
