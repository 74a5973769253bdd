#include <doctest.h>

#include <cmath>
#include <memory>
#include <numbers>
#include <random>

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include "fracwave/fem_space.hpp"

using namespace fracwave;

namespace {

constexpr double pi = std::numbers::pi;

Eigen::MatrixXd dense(const SparseMatrix& m) { return Eigen::MatrixXd(m); }

double integrate(const SpatialMesh& mesh, const SpatialFunction& g, int points)
{
    const auto rule = quadrature_rule(mesh.dimension(), points);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            Point x = Point::Zero();
            for (int k = 0; k < mesh.nodes_per_element(); ++k) {
                x += rule.barycentric(k, q) * mesh.vertex(static_cast<std::size_t>(mesh.element_vertex(e, k)));
            }
            total += mesh.measure(e) * rule.weights(q) * g(x);
        }
    }
    return total;
}

} // namespace

TEST_CASE("interval meshes")
{
    const auto mesh = build_mesh_1d(0.0, pi, 4);
    CHECK(mesh.dimension() == 1);
    CHECK(mesh.vertex_count() == 5);
    CHECK(mesh.element_count() == 4);
    CHECK(mesh.interior_count() == 3);
    for (std::size_t v = 0; v < 5; ++v) {
        CHECK(mesh.vertex(v).x() == doctest::Approx(pi * static_cast<double>(v) / 4));
    }
    CHECK(mesh.is_boundary(0));
    CHECK(mesh.is_boundary(4));
    CHECK(mesh.interior_index(0) == -1);
    CHECK(mesh.interior_index(2) == 1);
    CHECK(mesh.interior_vertex(1) == 2);

    CHECK(build_mesh_1d(0.0, 1.0, 2).interior_count() == 1);
    CHECK(build_mesh_1d(0.0, 1.0, 64).mesh_size() == 1.0 / 64);
    CHECK_THROWS_AS(build_mesh_1d(1.0, 0.0, 4), std::invalid_argument);
    CHECK_THROWS_AS(build_mesh_1d(0.0, 1.0, 1), std::invalid_argument);
}

TEST_CASE("unit-square meshes")
{
    const auto two = build_mesh_2d_unit_square(2);
    CHECK(two.element_count() == 8);
    CHECK(two.interior_count() == 1);
    CHECK(two.vertex_count() == 9);

    const auto four = build_mesh_2d_unit_square(4);
    CHECK(four.element_count() == 32);
    CHECK(four.interior_count() == 9);
    double area = 0.0;
    for (std::size_t e = 0; e < four.element_count(); ++e) {
        area += four.measure(e);
        CHECK(four.measure(e) == doctest::Approx(1.0 / 32));
        // hat gradients sum to zero on every element
        CHECK(four.shape_gradients(e).rowwise().sum().norm() < 1e-12);
    }
    CHECK(area == doctest::Approx(1.0).epsilon(1e-15));
    CHECK_THROWS_AS(build_mesh_2d_unit_square(1), std::invalid_argument);
}

TEST_CASE("point location")
{
    const auto mesh = build_mesh_2d_unit_square(5);
    std::mt19937 rng(5);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (int i = 0; i < 100; ++i) {
        const Point p(unit(rng), unit(rng));
        const auto [e, bary] = mesh.locate(p);
        CHECK(bary.sum() == doctest::Approx(1.0));
        CHECK(bary.minCoeff() >= -1e-12);
        Point back = Point::Zero();
        for (int k = 0; k < 3; ++k) {
            back += bary(k) * mesh.vertex(static_cast<std::size_t>(mesh.element_vertex(e, k)));
        }
        CHECK((back - p).norm() < 1e-12);
    }
}

TEST_CASE("quadrature rules")
{
    for (int points = 1; points <= 7; ++points) {
        const auto rule = quadrature_rule(1, points);
        CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        CHECK(rule.exact_degree == 2 * points - 1);
        const auto mesh = build_mesh_1d(0.0, 1.0, 3);
        for (int deg = 0; deg <= rule.exact_degree; ++deg) {
            const double value = integrate(mesh, [deg](const Point& x) { return std::pow(x.x(), deg); }, points);
            CHECK(value == doctest::Approx(1.0 / (deg + 1)).epsilon(1e-13));
        }
    }
    for (int points : {1, 3, 6, 7}) {
        const auto rule = quadrature_rule(2, points);
        CHECK(rule.weights.sum() == doctest::Approx(1.0).epsilon(1e-14));
        const auto mesh = build_mesh_2d_unit_square(3);
        for (int a = 0; a <= rule.exact_degree; ++a) {
            for (int b = 0; a + b <= rule.exact_degree; ++b) {
                const double value = integrate(
                    mesh, [a, b](const Point& x) { return std::pow(x.x(), a) * std::pow(x.y(), b); }, points);
                CHECK(value == doctest::Approx(1.0 / ((a + 1) * (b + 1))).epsilon(1e-13));
            }
        }
    }
    CHECK(quadrature_rule(2, 3).exact_degree == 2);
    CHECK_THROWS_AS(quadrature_rule(1, 0), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_rule(1, 8), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_rule(2, 4), std::invalid_argument);
    CHECK_THROWS_AS(quadrature_rule(3, 1), std::invalid_argument);
}

TEST_CASE("1D Galerkin rows")
{
    const double h = 0.1;
    const auto mesh = build_mesh_1d(0.0, 1.0, 10);
    const Eigen::MatrixXd B = dense(assemble_mass(mesh));
    const Eigen::MatrixXd A = dense(assemble_stiffness(mesh));
    REQUIRE(B.rows() == 9);
    for (Eigen::Index i = 1; i + 1 < 9; ++i) {
        CHECK(B(i, i - 1) == doctest::Approx(h / 6));
        CHECK(B(i, i) == doctest::Approx(4 * h / 6));
        CHECK(B(i, i + 1) == doctest::Approx(h / 6));
        CHECK(A(i, i - 1) == doctest::Approx(-1 / h));
        CHECK(A(i, i) == doctest::Approx(2 / h));
        CHECK(A(i, i + 1) == doctest::Approx(-1 / h));
        CHECK(B.row(i).sum() == doctest::Approx(h));
    }
    CHECK(B(0, 0) == doctest::Approx(4 * h / 6));
    CHECK(A(8, 8) == doctest::Approx(2 / h));
    CHECK(B(0, 2) == 0.0);
}

TEST_CASE("2D Galerkin matrices")
{
    const Eigen::MatrixXd A2 = dense(assemble_stiffness(build_mesh_2d_unit_square(2)));
    REQUIRE(A2.rows() == 1);
    CHECK(A2(0, 0) == doctest::Approx(4.0));

    const auto mesh = build_mesh_2d_unit_square(6);
    const Eigen::MatrixXd B = dense(assemble_mass(mesh));
    const Eigen::MatrixXd A = dense(assemble_stiffness(mesh));
    const double h = 1.0 / 6;
    // deep interior vertex (3, 3): row sum of B is the hat integral h^2,
    // and the five-point stencil appears in A
    const int centre = mesh.interior_index(3 * 7 + 3);
    CHECK(B.row(centre).sum() == doctest::Approx(h * h));
    CHECK(A(centre, centre) == doctest::Approx(4.0));
    CHECK(A.row(centre).sum() == doctest::Approx(0.0).scale(1.0));
}

TEST_CASE("symmetry and definiteness")
{
    std::mt19937 rng(9);
    std::normal_distribution<double> g;
    for (const auto& mesh : {build_mesh_1d(0.0, pi, 12), build_mesh_2d_unit_square(5)}) {
        for (const Eigen::MatrixXd m : {dense(assemble_mass(mesh)), dense(assemble_stiffness(mesh))}) {
            CHECK((m - m.transpose()).norm() == 0.0);
            Eigen::LLT<Eigen::MatrixXd> llt(m);
            CHECK(llt.info() == Eigen::Success);
            for (int trial = 0; trial < 10; ++trial) {
                Eigen::VectorXd x(m.rows());
                for (Eigen::Index i = 0; i < x.size(); ++i) {
                    x(i) = g(rng);
                }
                CHECK(x.dot(m * x) > 0.0);
            }
        }
    }
}

TEST_CASE("load vectors")
{
    const auto zero = assemble_load(build_mesh_1d(0.0, 1.0, 8), [](const Point&) { return 0.0; });
    CHECK(zero.norm() == 0.0);

    const auto line = build_mesh_1d(0.0, 1.0, 8);
    const Vector ones1 = assemble_load(line, [](const Point&) { return 1.0; });
    CHECK((ones1.array() - 0.125).abs().maxCoeff() < 1e-15);

    const auto square = build_mesh_2d_unit_square(4);
    const Vector ones2 = assemble_load(square, [](const Point&) { return 1.0; });
    CHECK((ones2.array() - 1.0 / 16).abs().maxCoeff() < 1e-15);

    // (sin, phi_i) = 2 sin(x_i) (1 - cos h) / h
    const std::size_t cells = 16;
    const auto mesh = build_mesh_1d(0.0, pi, cells);
    const double h = pi / cells;
    const Vector load = assemble_load(mesh, [](const Point& p) { return std::sin(p.x()); }, 5);
    for (std::size_t i = 0; i < mesh.interior_count(); ++i) {
        const double xi = mesh.vertex(mesh.interior_vertex(i)).x();
        CHECK(load(static_cast<Eigen::Index>(i)) ==
              doctest::Approx(2 * std::sin(xi) * (1 - std::cos(h)) / h).epsilon(1e-12));
    }

    // (grad g, grad phi) = (-Laplace g, phi) for g vanishing on the boundary
    const Vector via_grad =
        assemble_gradient_load(mesh, [](const Point& p) { return Point(std::cos(p.x()), 0.0); }, 5);
    CHECK((via_grad - load).norm() < 1e-12);
}

TEST_CASE("linear solver")
{
    SparseMatrix eye(5, 5);
    eye.setIdentity();
    const Vector b = Vector::LinSpaced(5, 1.0, 5.0);
    CHECK((spd_solve(eye, b).x - b).norm() < 1e-14);

    const SparseMatrix A = assemble_stiffness(build_mesh_1d(0.0, 1.0, 40));
    const Vector ones = Vector::Ones(A.rows());
    const auto result = spd_solve(A, A * ones, 1e-13);
    CHECK((result.x - ones).lpNorm<Eigen::Infinity>() < 1e-9);
    CHECK(result.iterations > 0);
    CHECK(result.residual <= 1e-13);

    const auto zero = spd_solve(A, Vector::Zero(A.rows()));
    CHECK(zero.x.norm() == 0.0);
    CHECK(zero.iterations == 0);

    // warm start from the answer needs no iterations
    CHECK(spd_solve(A, A * ones, 1e-10, Vector(ones)).iterations == 0);

    std::mt19937 rng(42);
    std::normal_distribution<double> g;
    Eigen::MatrixXd R(50, 50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        for (Eigen::Index j = 0; j < 50; ++j) {
            R(i, j) = g(rng);
        }
    }
    const Eigen::MatrixXd spd = R * R.transpose() + 50.0 * Eigen::MatrixXd::Identity(50, 50);
    Vector rhs(50);
    for (Eigen::Index i = 0; i < 50; ++i) {
        rhs(i) = g(rng);
    }
    const Vector reference = spd.llt().solve(rhs);
    const SparseMatrix sparse = spd.sparseView();
    CHECK((spd_solve(sparse, rhs, 1e-14).x - reference).norm() / reference.norm() < 1e-10);

    CHECK_THROWS_AS(spd_solve(sparse, rhs, 1e-14, std::nullopt, 1), SolverError);
    CHECK_THROWS_AS(spd_solve(sparse, Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(spd_solve(sparse, rhs, 1e-12, Vector(Vector::Zero(3))), std::invalid_argument);
}

TEST_CASE("finite element functions")
{
    auto mesh = std::make_shared<const SpatialMesh>(build_mesh_2d_unit_square(4));
    const auto plane = [](const Point& p) { return p.x() * (1 - p.x()) + 2 * p.y(); };
    const auto u = nodal_interpolant(mesh, plane);
    CHECK(u.nodal_value(0) == 0.0);
    // P1 evaluation is exact at vertices and linear inside elements
    const std::size_t v = 2 * 5 + 1;
    CHECK(u(mesh->vertex(v)) == doctest::Approx(plane(mesh->vertex(v))));
    const Point a = mesh->vertex(6);
    const Point b = mesh->vertex(7);
    CHECK(u(0.5 * (a + b)) == doctest::Approx(0.5 * (u.nodal_value(6) + u.nodal_value(7))));
    CHECK_THROWS_AS(FeFunction(mesh, Vector::Zero(3)), std::invalid_argument);
    CHECK_THROWS_AS(FeFunction(nullptr, Vector::Zero(3)), std::invalid_argument);
}

TEST_CASE("projections are identities on the discrete space")
{
    auto mesh = std::make_shared<const SpatialMesh>(build_mesh_2d_unit_square(5));
    const auto bump = [](const Point& p) { return std::sin(pi * p.x()) * p.y() * (1 - p.y()); };
    const auto u = nodal_interpolant(mesh, bump);
    const SpatialFunction as_function = [&u](const Point& p) { return u(p); };
    CHECK((l2_projection(mesh, as_function).coeffs - u.coeffs).norm() < 1e-10);

    const SparseMatrix A = assemble_stiffness(*mesh);
    const GradientFunction grad = [&](const Point& p) {
        const auto [e, bary] = mesh->locate(p);
        Point gsum = Point::Zero();
        for (int k = 0; k < 3; ++k) {
            gsum += u.nodal_value(static_cast<std::size_t>(mesh->element_vertex(e, k))) *
                    mesh->shape_gradients(e).col(k);
        }
        return gsum;
    };
    CHECK((ritz_projection(mesh, grad, 1).coeffs - u.coeffs).norm() < 1e-10);

    CHECK(l2_projection(mesh, [](const Point&) { return 0.0; }).coeffs.norm() == 0.0);
}

TEST_CASE("Galerkin orthogonality of the projections")
{
    auto mesh = std::make_shared<const SpatialMesh>(build_mesh_2d_unit_square(6));
    const SpatialFunction g = [](const Point& p) { return std::exp(p.x()) * std::cos(2 * p.y()); };
    const auto proj = l2_projection(mesh, g, 7);
    const Vector residual = assemble_mass(*mesh) * proj.coeffs - assemble_load(*mesh, g, 7);
    CHECK(residual.norm() < 1e-12);
}

TEST_CASE("1D Ritz projection of sin x is its interpolant")
{
    auto mesh = std::make_shared<const SpatialMesh>(build_mesh_1d(0.0, pi, 16));
    const auto ritz = ritz_projection(mesh, [](const Point& p) { return Point(std::cos(p.x()), 0.0); }, 7);
    const auto nodal = nodal_interpolant(mesh, [](const Point& p) { return std::sin(p.x()); });
    CHECK((ritz.coeffs - nodal.coeffs).lpNorm<Eigen::Infinity>() < 1e-12);
}

TEST_CASE("norms and errors")
{
    auto unit = std::make_shared<const SpatialMesh>(build_mesh_1d(0.0, 1.0, 2));
    const FeFunction hat(unit, Vector::Ones(1));
    CHECK(grad_norm_sq(hat) == doctest::Approx(4.0));
    CHECK(grad_norm_sq(FeFunction(unit, Vector::Zero(1))) == 0.0);

    const GradientFunction cosine = [](const Point& p) { return Point(std::cos(p.x()), 0.0); };
    const SpatialFunction sine = [](const Point& p) { return std::sin(p.x()); };
    double previous = 0.0;
    for (std::size_t cells : {16, 32, 64, 128}) {
        auto mesh = std::make_shared<const SpatialMesh>(build_mesh_1d(0.0, pi, cells));
        const double h = mesh->mesh_size();
        const auto u = nodal_interpolant(mesh, sine);
        CHECK(std::abs(grad_norm_sq(u) - pi / 2) < h * h);
        const double err = h1_seminorm_error(u, cosine);
        if (previous > 0.0) {
            CHECK(std::log2(previous / err) == doctest::Approx(1.0).epsilon(0.02));
        }
        previous = err;
        CHECK(l2_error(*mesh, u.coeffs, sine) < h * h);
        CHECK(l2_norm_sq(assemble_mass(*mesh), u.coeffs) == doctest::Approx(pi / 2).epsilon(2 * h * h));

        const FeFunction zero(mesh, Vector::Zero(static_cast<Eigen::Index>(mesh->interior_count())));
        CHECK(h1_seminorm_error(zero, cosine, 5) == doctest::Approx(std::sqrt(pi / 2)).epsilon(1e-10));
        CHECK(h1_seminorm_error(u, [&](const Point& p) {
                  const auto [e, bary] = mesh->locate(p);
                  double slope = 0.0;
                  for (int k = 0; k < 2; ++k) {
                      slope += u.nodal_value(static_cast<std::size_t>(mesh->element_vertex(e, k))) *
                               mesh->shape_gradients(e)(0, k);
                  }
                  return Point(slope, 0.0);
              }) < 1e-12);
    }
}

TEST_CASE("finite element space bundles matrices")
{
    const FeSpace space(build_mesh_2d_unit_square(3), 6);
    CHECK(space.size() == 4);
    CHECK(space.mass.rows() == 4);
    CHECK(space.stiffness.cols() == 4);
    CHECK(space.quad_points == 6);
}
