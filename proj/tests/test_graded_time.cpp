#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "fracwave/graded_time.hpp"

using namespace fracwave;

TEST_CASE("quadratic grading on four steps")
{
    const TimeMesh<double> mesh(1.0, 4, 2.0);
    const std::vector<double> expected{0.0, 0.0625, 0.25, 0.5625, 1.0};
    REQUIRE(mesh.points().size() == expected.size());
    for (std::size_t n = 0; n < expected.size(); ++n) {
        CHECK(mesh.t(n) == doctest::Approx(expected[n]).epsilon(1e-15));
    }
    CHECK(mesh.tau(1) == doctest::Approx(0.0625));
    CHECK(mesh.tau(2) == doctest::Approx(0.1875));
    CHECK(mesh.max_step() == doctest::Approx(0.4375));
}

TEST_CASE("r = 1 is the uniform mesh")
{
    const auto mesh = build_graded_mesh(1.0, 4, 1.0);
    for (std::size_t n = 0; n <= 4; ++n) {
        CHECK(mesh.t(n) == doctest::Approx(0.25 * static_cast<double>(n)));
    }
    for (double tau : mesh.step_sizes()) {
        CHECK(tau == doctest::Approx(0.25));
    }
}

TEST_CASE("first node of the beta = 0.7 grading")
{
    const double r = recommended_grading(0.7);
    const TimeMesh<double> mesh(1.0, 8, r);
    // 8^(-13/7), 30-digit reference
    CHECK(mesh.t(1) == doctest::Approx(0.0210296905098805645616).epsilon(1e-13));
    CHECK(mesh.t(0) == 0.0);
    CHECK(mesh.t(8) == 1.0);
}

TEST_CASE("endpoints pinned for awkward T")
{
    const TimeMesh<double> mesh(0.3, 37, 2.7);
    CHECK(mesh.t(0) == 0.0);
    CHECK(mesh.t(37) == 0.3);
    double total = 0.0;
    for (double tau : mesh.step_sizes()) {
        total += tau;
    }
    CHECK(total == doctest::Approx(0.3).epsilon(1e-14));
}

TEST_CASE("mesh estimates: t_n <= 2^r t_{n-1}, steps increase")
{
    for (double r : {1.0, 1.2222, 1.857143, 3.0}) {
        const TimeMesh<double> mesh(1.0, 64, r);
        for (std::size_t n = 2; n <= 64; ++n) {
            CHECK(mesh.t(n) <= std::pow(2.0, r) * mesh.t(n - 1) * (1 + 1e-14));
            CHECK(mesh.tau(n) >= mesh.tau(n - 1) * (1 - 1e-12));
            // tau_n <= r T N^{-1} (t_n/T)^{1-1/r}
            CHECK(mesh.tau(n) <= r / 64.0 * std::pow(mesh.t(n), 1.0 - 1.0 / r) * (1 + 1e-12));
        }
    }
}

TEST_CASE("invalid meshes")
{
    CHECK_THROWS_AS(TimeMesh<double>(0.0, 4, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh<double>(-1.0, 4, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh<double>(1.0, 1, 2.0), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh<double>(1.0, 4, 0.5), std::invalid_argument);
    CHECK_THROWS_AS(TimeMesh<double>(1.0, 4, std::nan("")), std::invalid_argument);
    const TimeMesh<double> mesh(1.0, 4, 1.0);
    CHECK_THROWS_AS(mesh.tau(0), std::out_of_range);
    CHECK_THROWS_AS(mesh.tau(5), std::out_of_range);
}

TEST_CASE("extrapolation weights")
{
    const TimeMesh<double> uniform(1.0, 10, 1.0);
    for (std::size_t n = 2; n <= 10; ++n) {
        const auto [w1, w2] = extrapolation_weights(uniform, n);
        CHECK(w1 == doctest::Approx(2.0));
        CHECK(w2 == doctest::Approx(-1.0));
    }

    const TimeMesh<double> graded(1.0, 4, 2.0);
    const auto [w1, w2] = extrapolation_weights(graded, 2);
    CHECK(w1 == doctest::Approx(4.0));
    CHECK(w2 == doctest::Approx(-3.0));

    CHECK_THROWS_AS(extrapolation_weights(graded, 1), std::out_of_range);
    CHECK_THROWS_AS(extrapolation_weights(graded, 5), std::out_of_range);
}

TEST_CASE("extrapolation reproduces affine functions")
{
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> coef(-3.0, 3.0);
    const TimeMesh<double> mesh(2.0, 20, 2.4);
    for (int trial = 0; trial < 20; ++trial) {
        const double c0 = coef(rng);
        const double c1 = coef(rng);
        for (std::size_t n = 2; n <= 20; ++n) {
            const auto [w1, w2] = extrapolation_weights(mesh, n);
            const double hat = w1 * (c0 + c1 * mesh.t(n - 1)) + w2 * (c0 + c1 * mesh.t(n - 2));
            CHECK(hat == doctest::Approx(c0 + c1 * mesh.t(n)).epsilon(1e-12));
        }
    }
}

TEST_CASE("recommended grading")
{
    CHECK(recommended_grading(0.7) == doctest::Approx(1.857142857142857));
    CHECK(recommended_grading(0.5) == doctest::Approx(3.0));
    CHECK(recommended_grading(0.9) == doctest::Approx(1.222222222222222));
    CHECK_THROWS_AS(recommended_grading(0.0), std::invalid_argument);
    CHECK_THROWS_AS(recommended_grading(1.0), std::invalid_argument);
}

TEST_CASE("discrete Gronwall step condition")
{
    // (4 Gamma(1.5))^{-2} = 1/(4 pi)
    CHECK(gronwall_step_bound(0.5, 1.0) == doctest::Approx(0.0795774715459476679).epsilon(1e-13));

    const TimeMesh<double> coarse(1.0, 4, 1.0);
    CHECK_FALSE(gronwall_step_condition(coarse, 0.5, 1.0));

    const TimeMesh<double> fine(1.0, 20, 1.0);
    CHECK(gronwall_step_condition(fine, 0.5, 1.0));

    CHECK(gronwall_step_condition(coarse, 0.5, 1e-6));
}
