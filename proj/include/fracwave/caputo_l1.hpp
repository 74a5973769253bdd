#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <span>
#include <sstream>
#include <stdexcept>
#include <vector>

#include "fracwave/graded_time.hpp"
#include "fracwave/special_functions.hpp"

namespace fracwave {

/// Coefficients d_{n,k}, k = 1..n, of the L1 approximation to the Caputo
/// derivative of order beta at level n. d(1) multiplies the newest increment.
template <typename Scalar = double>
class L1Row {
public:
    L1Row(std::size_t level, Scalar beta, std::vector<Scalar> coeffs)
        : level_(level), beta_(beta), coeffs_(std::move(coeffs))
    {
        if (coeffs_.size() != level_) {
            throw std::invalid_argument("L1Row: coefficient count must equal the level");
        }
    }

    std::size_t level() const { return level_; }
    Scalar beta() const { return beta_; }
    /// d_{n,k}, 1 <= k <= n.
    Scalar d(std::size_t k) const { return coeffs_[k - 1]; }
    const std::vector<Scalar>& coeffs() const { return coeffs_; }

private:
    std::size_t level_;
    Scalar beta_;
    std::vector<Scalar> coeffs_;
};

namespace detail {

template <typename Scalar>
void check_beta(Scalar beta)
{
    if (!(beta > Scalar(0) && beta < Scalar(1))) {
        throw std::invalid_argument("L1 scheme: order beta must lie in (0, 1)");
    }
}

} // namespace detail

template <typename Scalar>
L1Row<Scalar> l1_row(const TimeMesh<Scalar>& mesh, Scalar beta, std::size_t n)
{
    detail::check_beta(beta);
    if (n < 1 || n > mesh.steps()) {
        std::ostringstream os;
        os << "l1_row: level " << n << " outside [1, " << mesh.steps() << "]";
        throw std::out_of_range(os.str());
    }
    const Scalar one_minus = Scalar(1) - beta;
    const Scalar scale = Scalar(1) / gamma_fn(Scalar(2) - beta);
    const Scalar tn = mesh.t(n);

    // powers[j] = (t_n - t_j)^(1 - beta), j = 0..n
    std::vector<Scalar> powers(n + 1);
    for (std::size_t j = 0; j < n; ++j) {
        powers[j] = std::pow(tn - mesh.t(j), one_minus);
    }
    powers[n] = Scalar(0);

    std::vector<Scalar> coeffs(n);
    for (std::size_t k = 1; k <= n; ++k) {
        coeffs[k - 1] = scale * (powers[n - k] - powers[n - k + 1]) / mesh.tau(n - k + 1);
    }
    return L1Row<Scalar>(n, beta, std::move(coeffs));
}

/// Rows 1..N for the whole mesh; element i holds level i + 1.
template <typename Scalar>
std::vector<L1Row<Scalar>> l1_table(const TimeMesh<Scalar>& mesh, Scalar beta)
{
    std::vector<L1Row<Scalar>> rows;
    rows.reserve(mesh.steps());
    for (std::size_t n = 1; n <= mesh.steps(); ++n) {
        rows.push_back(l1_row(mesh, beta, n));
    }
    return rows;
}

/// Weights of the history w^0..w^{n-1} in D_N w^n, so that
/// D_N w^n = d_{n,1} w^n + sum_j weights[j] w^j.
template <typename Scalar>
std::vector<Scalar> history_weights(const L1Row<Scalar>& row)
{
    const std::size_t n = row.level();
    std::vector<Scalar> weights(n);
    weights[0] = -row.d(n);
    for (std::size_t j = 1; j < n; ++j) {
        weights[j] = row.d(n - j + 1) - row.d(n - j);
    }
    return weights;
}

/// L1 approximation D_N w^n from w^0..w^n; Value may be a scalar or an Eigen vector.
template <typename Scalar, typename Value>
Value discrete_caputo(const L1Row<Scalar>& row, std::span<const Value> history)
{
    const std::size_t n = row.level();
    if (history.size() != n + 1) {
        std::ostringstream os;
        os << "discrete_caputo: history has " << history.size() << " entries, expected " << n + 1;
        throw std::invalid_argument(os.str());
    }
    Value result = row.d(1) * history[n];
    result += -row.d(n) * history[0];
    for (std::size_t k = 1; k < n; ++k) {
        result += (row.d(k + 1) - row.d(k)) * history[n - k];
    }
    return result;
}

template <typename Scalar, typename Value>
Value discrete_caputo(const L1Row<Scalar>& row, const std::vector<Value>& history)
{
    return discrete_caputo(row, std::span<const Value>(history));
}

/// Complementary discrete kernels Q^{(n)}_j, j = 0..n-1, built from rows 1..n.
///
/// These are the discrete convolution inverse of the L1 kernels:
/// sum_{j=k}^{n} Q^{(n)}_{n-j} d_{j, j-k+1} = 1 for every 1 <= k <= n.
template <typename Scalar>
std::vector<Scalar> complementary_kernels(std::span<const L1Row<Scalar>> rows, std::size_t n)
{
    if (n < 1 || n > rows.size()) {
        throw std::out_of_range("complementary_kernels: level outside the available rows");
    }
    auto d = [&](std::size_t level, std::size_t k) { return rows[level - 1].d(k); };

    std::vector<Scalar> q(n);
    q[0] = Scalar(1) / d(n, 1);
    for (std::size_t i = n - 1; i >= 1; --i) {
        Scalar acc = Scalar(0);
        for (std::size_t k = i + 1; k <= n; ++k) {
            acc += (d(k, k - i) - d(k, k - i + 1)) * q[n - k];
        }
        q[n - i] = acc / d(i, 1);
    }
    return q;
}

template <typename Scalar>
std::vector<Scalar> complementary_kernels(const TimeMesh<Scalar>& mesh, Scalar beta, std::size_t n)
{
    if (n < 1 || n > mesh.steps()) {
        throw std::out_of_range("complementary_kernels: level outside [1, N]");
    }
    std::vector<L1Row<Scalar>> rows;
    rows.reserve(n);
    for (std::size_t level = 1; level <= n; ++level) {
        rows.push_back(l1_row(mesh, beta, level));
    }
    return complementary_kernels(std::span<const L1Row<Scalar>>(rows), n);
}

/// Lower-triangular table of complementary kernels for levels 1..N.
template <typename Scalar = double>
class KernelTriangle {
public:
    KernelTriangle(const TimeMesh<Scalar>& mesh, Scalar beta) : rows_(l1_table(mesh, beta))
    {
        kernels_.reserve(rows_.size());
        for (std::size_t n = 1; n <= rows_.size(); ++n) {
            kernels_.push_back(complementary_kernels(std::span<const L1Row<Scalar>>(rows_), n));
        }
    }

    std::size_t levels() const { return kernels_.size(); }
    /// Q^{(n)}_j for 0 <= j <= n - 1.
    Scalar q(std::size_t n, std::size_t j) const { return kernels_.at(n - 1).at(j); }
    const std::vector<Scalar>& row(std::size_t n) const { return kernels_.at(n - 1); }
    const L1Row<Scalar>& l1(std::size_t n) const { return rows_.at(n - 1); }

private:
    std::vector<L1Row<Scalar>> rows_;
    std::vector<std::vector<Scalar>> kernels_;
};

/// Caputo derivative of order `order` in (0, 2) applied to t^sigma:
/// Gamma(sigma + 1) / Gamma(sigma + 1 - order) t^(sigma - order).
/// Requires sigma > 0 for order < 1 and sigma > 1 for order > 1, and sigma >= order.
template <typename Scalar>
Scalar caputo_power(Scalar sigma, Scalar order, Scalar t)
{
    if (!(order > Scalar(0) && order < Scalar(2)) || order == Scalar(1)) {
        throw std::domain_error("caputo_power: order must lie in (0, 1) or (1, 2)");
    }
    const Scalar floor_order = order < Scalar(1) ? Scalar(0) : Scalar(1);
    if (!(sigma > floor_order) || sigma < order) {
        std::ostringstream os;
        os << "caputo_power: exponent " << sigma << " unsupported for order " << order;
        throw std::domain_error(os.str());
    }
    if (t < Scalar(0)) {
        throw std::domain_error("caputo_power: time must be non-negative");
    }
    const Scalar factor = gamma_fn(sigma + Scalar(1)) / gamma_fn(sigma + Scalar(1) - order);
    if (sigma == order) {
        return factor;
    }
    if (t == Scalar(0)) {
        return Scalar(0);
    }
    return factor * std::pow(t, sigma - order);
}

template <typename Scalar>
Scalar exact_caputo_power(Scalar sigma, Scalar beta, Scalar t)
{
    detail::check_beta(beta);
    return caputo_power(sigma, beta, t);
}

template <typename Scalar = double>
struct TruncationRow {
    std::size_t steps;
    Scalar grading;
    Scalar weighted_error;
    std::optional<Scalar> rate;
};

/// max_n t_n^beta |D_N w^n - D^beta w(t_n)| for w = t^sigma on [0, 1].
///
/// The t_n^beta weight cancels the local blow-up near t = 0 so the table shows
/// the global N^-min(2-beta, r sigma) rate. Rates compare consecutive entries
/// and assume the N list doubles.
template <typename Scalar>
std::vector<TruncationRow<Scalar>> truncation_study(Scalar beta, Scalar sigma,
                                                    std::span<const std::size_t> steps_list,
                                                    Scalar grading)
{
    detail::check_beta(beta);
    std::vector<TruncationRow<Scalar>> table;
    table.reserve(steps_list.size());
    for (const std::size_t steps : steps_list) {
        const TimeMesh<Scalar> mesh(Scalar(1), steps, grading);
        std::vector<Scalar> history(steps + 1);
        for (std::size_t j = 0; j <= steps; ++j) {
            history[j] = std::pow(mesh.t(j), sigma);
        }
        Scalar worst = Scalar(0);
        for (std::size_t n = 1; n <= steps; ++n) {
            const auto row = l1_row(mesh, beta, n);
            const Scalar approx = discrete_caputo(row, std::span<const Scalar>(history.data(), n + 1));
            const Scalar exact = exact_caputo_power(sigma, beta, mesh.t(n));
            worst = std::max(worst, std::pow(mesh.t(n), beta) * std::abs(approx - exact));
        }
        table.push_back({steps, grading, worst, std::nullopt});
    }
    for (std::size_t i = 0; i + 1 < table.size(); ++i) {
        table[i].rate = std::log2(table[i].weighted_error / table[i + 1].weighted_error);
    }
    return table;
}

} // namespace fracwave
