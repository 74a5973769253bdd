#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>
#include <stdexcept>

namespace fracwave {

/// Gamma function for positive arguments.
///
/// Delegates to std::tgamma, which is accurate to a few ulp on (0, 170) with
/// glibc; the L1 kernels only need arguments in (0, 5).
template <typename Scalar = double>
Scalar gamma_fn(Scalar x)
{
    if (!(x > Scalar(0))) {
        std::ostringstream os;
        os << "gamma_fn: argument " << x << " must be positive";
        throw std::domain_error(os.str());
    }
    return std::tgamma(x);
}

/// One-parameter Mittag-Leffler function E_beta(z) = sum_k z^k / Gamma(1 + k beta).
///
/// Summed directly with log-space terms; the series stops once a term drops
/// below 1e-16 of the running sum. For negative z the alternating series loses
/// digits to cancellation, so arguments whose largest term exceeds the result
/// by more than 1e5 are rejected, as are results that overflow.
template <typename Scalar = double>
Scalar mittag_leffler(Scalar beta, Scalar z)
{
    if (!(beta > Scalar(0))) {
        throw std::domain_error("mittag_leffler: beta must be positive");
    }
    if (z == Scalar(0)) {
        return Scalar(1);
    }

    const Scalar log_abs_z = std::log(std::abs(z));
    const bool alternating = z < Scalar(0);

    Scalar sum = Scalar(1);
    Scalar largest = Scalar(1);
    bool past_peak = false;
    Scalar previous = Scalar(1);
    constexpr int max_terms = 20000;
    for (int k = 1; k < max_terms; ++k) {
        const Scalar log_term = Scalar(k) * log_abs_z - std::lgamma(Scalar(1) + Scalar(k) * beta);
        if (log_term > std::log(std::numeric_limits<Scalar>::max()) - Scalar(1)) {
            throw std::overflow_error("mittag_leffler: series term overflows");
        }
        Scalar term = std::exp(log_term);
        if (alternating && (k % 2 == 1)) {
            term = -term;
        }
        sum += term;
        largest = std::max(largest, std::abs(term));
        if (std::abs(term) < previous) {
            past_peak = true;
        }
        previous = std::abs(term);
        if (past_peak && std::abs(term) <= Scalar(1e-16) * std::abs(sum)) {
            if (!std::isfinite(sum)) {
                throw std::overflow_error("mittag_leffler: result overflows");
            }
            if (largest > Scalar(1e5) * std::abs(sum)) {
                throw std::range_error("mittag_leffler: cancellation exceeds supported accuracy");
            }
            return sum;
        }
    }
    throw std::overflow_error("mittag_leffler: series did not converge");
}

} // namespace fracwave
