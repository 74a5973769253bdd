#include "fracwave/fem_space.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

namespace fracwave {

namespace {

Eigen::Index idx(std::size_t i) { return static_cast<Eigen::Index>(i); }

QuadratureRule gauss_legendre(int points)
{
    // Golub-Welsch on [-1, 1], then mapped to the unit interval.
    Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(points, points);
    for (int k = 1; k < points; ++k) {
        const double b = k / std::sqrt(4.0 * k * k - 1.0);
        jacobi(k, k - 1) = b;
        jacobi(k - 1, k) = b;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
    QuadratureRule rule;
    rule.barycentric.resize(3, points);
    rule.weights.resize(points);
    for (int q = 0; q < points; ++q) {
        const double s = 0.5 * (1.0 + eig.eigenvalues()(q));
        rule.barycentric.col(q) << 1.0 - s, s, 0.0;
        const double v0 = eig.eigenvectors()(0, q);
        rule.weights(q) = v0 * v0;
    }
    rule.exact_degree = 2 * points - 1;
    return rule;
}

void add_orbit(QuadratureRule& rule, int& q, double a, double w)
{
    const double b = 1.0 - 2.0 * a;
    rule.barycentric.col(q++) << a, a, b;
    rule.barycentric.col(q++) << a, b, a;
    rule.barycentric.col(q++) << b, a, a;
    rule.weights.segment(q - 3, 3).setConstant(w);
}

QuadratureRule dunavant(int points)
{
    QuadratureRule rule;
    rule.barycentric.resize(3, points);
    rule.weights.resize(points);
    int q = 0;
    switch (points) {
    case 1:
        rule.barycentric.col(q) << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
        rule.weights(q++) = 1.0;
        rule.exact_degree = 1;
        break;
    case 3:
        add_orbit(rule, q, 1.0 / 6.0, 1.0 / 3.0);
        rule.exact_degree = 2;
        break;
    case 6:
        add_orbit(rule, q, 0.445948490915965, 0.223381589678011);
        add_orbit(rule, q, 0.091576213509771, 0.109951743655322);
        rule.exact_degree = 4;
        break;
    case 7:
        rule.barycentric.col(q) << 1.0 / 3.0, 1.0 / 3.0, 1.0 / 3.0;
        rule.weights(q++) = 0.225;
        add_orbit(rule, q, 0.470142064105115, 0.132394152788506);
        add_orbit(rule, q, 0.101286507323456, 0.125939180544827);
        rule.exact_degree = 5;
        break;
    default:
        throw std::invalid_argument("quadrature_rule: triangles support 1, 3, 6 or 7 points");
    }
    return rule;
}

Point map_point(const SpatialMesh& mesh, std::size_t e, const Eigen::Vector3d& bary)
{
    Point p = Point::Zero();
    for (int a = 0; a < mesh.nodes_per_element(); ++a) {
        p += bary(a) * mesh.vertex(static_cast<std::size_t>(mesh.element_vertex(e, a)));
    }
    return p;
}

// Gradient of the P1 function with interior coefficients `coeffs` on element e.
Point element_gradient(const SpatialMesh& mesh, const Vector& coeffs, std::size_t e)
{
    Point g = Point::Zero();
    for (int a = 0; a < mesh.nodes_per_element(); ++a) {
        const int i = mesh.interior_index(static_cast<std::size_t>(mesh.element_vertex(e, a)));
        if (i >= 0) {
            g += coeffs(i) * mesh.shape_gradients(e).col(a);
        }
    }
    return g;
}

SparseMatrix assemble_local(const SpatialMesh& mesh, bool mass)
{
    const int nodes = mesh.nodes_per_element();
    const double denom = (nodes) * (nodes + 1);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(mesh.element_count() * static_cast<std::size_t>(nodes * nodes));
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto& grads = mesh.shape_gradients(e);
        for (int a = 0; a < nodes; ++a) {
            const int i = mesh.interior_index(static_cast<std::size_t>(mesh.element_vertex(e, a)));
            if (i < 0) {
                continue;
            }
            for (int b = 0; b < nodes; ++b) {
                const int j = mesh.interior_index(static_cast<std::size_t>(mesh.element_vertex(e, b)));
                if (j < 0) {
                    continue;
                }
                const double value = mass ? mesh.measure(e) * (a == b ? 2.0 : 1.0) / denom
                                          : mesh.measure(e) * grads.col(a).dot(grads.col(b));
                triplets.emplace_back(i, j, value);
            }
        }
    }
    const auto m = idx(mesh.interior_count());
    SparseMatrix matrix(m, m);
    matrix.setFromTriplets(triplets.begin(), triplets.end());
    return matrix;
}

} // namespace

Point SpatialMesh::vertex(std::size_t v) const { return coords_.col(idx(v)); }

void SpatialMesh::finalize()
{
    interior_index_.assign(vertex_count(), -1);
    interior_vertices_.clear();
    for (std::size_t v = 0; v < vertex_count(); ++v) {
        if (!boundary_[v]) {
            interior_index_[v] = static_cast<int>(interior_vertices_.size());
            interior_vertices_.push_back(v);
        }
    }
    interior_count_ = interior_vertices_.size();

    measures_.resize(element_count());
    gradients_.resize(element_count());
    for (std::size_t e = 0; e < element_count(); ++e) {
        Eigen::Matrix<double, 2, 3> grads = Eigen::Matrix<double, 2, 3>::Zero();
        const Point p0 = vertex(static_cast<std::size_t>(element_vertex(e, 0)));
        const Point p1 = vertex(static_cast<std::size_t>(element_vertex(e, 1)));
        if (dimension_ == 1) {
            const double len = p1.x() - p0.x();
            measures_[e] = len;
            grads(0, 0) = -1.0 / len;
            grads(0, 1) = 1.0 / len;
        } else {
            const Point p2 = vertex(static_cast<std::size_t>(element_vertex(e, 2)));
            Eigen::Matrix2d jac;
            jac.col(0) = p1 - p0;
            jac.col(1) = p2 - p0;
            const double det = jac.determinant();
            measures_[e] = 0.5 * std::abs(det);
            const Eigen::Matrix2d inv_t = jac.inverse().transpose();
            grads.col(1) = inv_t.col(0);
            grads.col(2) = inv_t.col(1);
            grads.col(0) = -(grads.col(1) + grads.col(2));
        }
        gradients_[e] = grads;
    }
}

std::pair<std::size_t, Eigen::Vector3d> SpatialMesh::locate(const Point& p) const
{
    const auto clamp_cell = [this](double s) {
        const double c = std::floor(s);
        return static_cast<std::size_t>(std::clamp(c, 0.0, static_cast<double>(cells_ - 1)));
    };
    if (dimension_ == 1) {
        const double s = (p.x() - origin_.x()) / h_;
        const std::size_t cell = clamp_cell(s);
        const double local = s - static_cast<double>(cell);
        return {cell, Eigen::Vector3d(1.0 - local, local, 0.0)};
    }
    const double sx = (p.x() - origin_.x()) / h_;
    const double sy = (p.y() - origin_.y()) / h_;
    const std::size_t i = clamp_cell(sx);
    const std::size_t j = clamp_cell(sy);
    const double s = sx - static_cast<double>(i);
    const double r = sy - static_cast<double>(j);
    const std::size_t base = 2 * (j * cells_ + i);
    if (s >= r) {
        return {base, Eigen::Vector3d(1.0 - s, s - r, r)};
    }
    return {base + 1, Eigen::Vector3d(1.0 - r, s, r - s)};
}

SpatialMesh build_mesh_1d(double a, double b, std::size_t cells)
{
    if (!(b > a)) {
        throw std::invalid_argument("build_mesh_1d: need b > a");
    }
    if (cells < 2) {
        throw std::invalid_argument("build_mesh_1d: need Ms >= 2 cells");
    }
    SpatialMesh mesh;
    mesh.dimension_ = 1;
    mesh.cells_ = cells;
    mesh.h_ = (b - a) / static_cast<double>(cells);
    mesh.origin_ = Point(a, 0.0);
    mesh.coords_.resize(2, idx(cells + 1));
    for (std::size_t v = 0; v <= cells; ++v) {
        const double x = v == cells ? b : a + static_cast<double>(v) * mesh.h_;
        mesh.coords_.col(idx(v)) << x, 0.0;
    }
    mesh.connectivity_.resize(3, idx(cells));
    for (std::size_t e = 0; e < cells; ++e) {
        mesh.connectivity_.col(idx(e)) << static_cast<int>(e), static_cast<int>(e + 1), -1;
    }
    mesh.boundary_.assign(cells + 1, false);
    mesh.boundary_.front() = true;
    mesh.boundary_.back() = true;
    mesh.finalize();
    return mesh;
}

SpatialMesh build_mesh_2d_unit_square(std::size_t cells)
{
    if (cells < 2) {
        throw std::invalid_argument("build_mesh_2d_unit_square: need Ms >= 2 cells per direction");
    }
    SpatialMesh mesh;
    mesh.dimension_ = 2;
    mesh.cells_ = cells;
    mesh.h_ = 1.0 / static_cast<double>(cells);
    const std::size_t per_row = cells + 1;
    const auto vid = [per_row](std::size_t i, std::size_t j) { return static_cast<int>(j * per_row + i); };
    const auto coord = [cells](std::size_t i) {
        return i == cells ? 1.0 : static_cast<double>(i) / static_cast<double>(cells);
    };

    mesh.coords_.resize(2, idx(per_row * per_row));
    mesh.boundary_.assign(per_row * per_row, false);
    for (std::size_t j = 0; j <= cells; ++j) {
        for (std::size_t i = 0; i <= cells; ++i) {
            const auto v = static_cast<std::size_t>(vid(i, j));
            mesh.coords_.col(idx(v)) << coord(i), coord(j);
            mesh.boundary_[v] = i == 0 || j == 0 || i == cells || j == cells;
        }
    }
    mesh.connectivity_.resize(3, idx(2 * cells * cells));
    for (std::size_t j = 0; j < cells; ++j) {
        for (std::size_t i = 0; i < cells; ++i) {
            const std::size_t base = 2 * (j * cells + i);
            mesh.connectivity_.col(idx(base)) << vid(i, j), vid(i + 1, j), vid(i + 1, j + 1);
            mesh.connectivity_.col(idx(base + 1)) << vid(i, j), vid(i + 1, j + 1), vid(i, j + 1);
        }
    }
    mesh.finalize();
    return mesh;
}

QuadratureRule quadrature_rule(int dimension, int points)
{
    if (dimension == 1) {
        if (points < 1 || points > 7) {
            throw std::invalid_argument("quadrature_rule: 1D Gauss rules support 1..7 points");
        }
        return gauss_legendre(points);
    }
    if (dimension == 2) {
        return dunavant(points);
    }
    throw std::invalid_argument("quadrature_rule: dimension must be 1 or 2");
}

FeFunction::FeFunction(std::shared_ptr<const SpatialMesh> m, Vector c) : mesh(std::move(m)), coeffs(std::move(c))
{
    if (!mesh) {
        throw std::invalid_argument("FeFunction: null mesh");
    }
    if (static_cast<std::size_t>(coeffs.size()) != mesh->interior_count()) {
        throw std::invalid_argument("FeFunction: coefficient count must equal the interior vertex count");
    }
}

double FeFunction::nodal_value(std::size_t v) const
{
    const int i = mesh->interior_index(v);
    return i < 0 ? 0.0 : coeffs(i);
}

double FeFunction::operator()(const Point& p) const
{
    const auto [e, bary] = mesh->locate(p);
    double value = 0.0;
    for (int a = 0; a < mesh->nodes_per_element(); ++a) {
        value += bary(a) * nodal_value(static_cast<std::size_t>(mesh->element_vertex(e, a)));
    }
    return value;
}

SparseMatrix assemble_mass(const SpatialMesh& mesh) { return assemble_local(mesh, true); }

SparseMatrix assemble_stiffness(const SpatialMesh& mesh) { return assemble_local(mesh, false); }

Vector assemble_load(const SpatialMesh& mesh, const SpatialFunction& g, int quad_points)
{
    const QuadratureRule rule = quadrature_rule(mesh.dimension(), quad_points);
    Vector load = Vector::Zero(idx(mesh.interior_count()));
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            const Eigen::Vector3d bary = rule.barycentric.col(q);
            const double value = g(map_point(mesh, e, bary)) * rule.weights(q) * mesh.measure(e);
            for (int a = 0; a < mesh.nodes_per_element(); ++a) {
                const int i = mesh.interior_index(static_cast<std::size_t>(mesh.element_vertex(e, a)));
                if (i >= 0) {
                    load(i) += value * bary(a);
                }
            }
        }
    }
    return load;
}

Vector assemble_gradient_load(const SpatialMesh& mesh, const GradientFunction& grad_g, int quad_points)
{
    const QuadratureRule rule = quadrature_rule(mesh.dimension(), quad_points);
    Vector load = Vector::Zero(idx(mesh.interior_count()));
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const auto& grads = mesh.shape_gradients(e);
        for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            Point gq = grad_g(map_point(mesh, e, rule.barycentric.col(q)));
            if (mesh.dimension() == 1) {
                gq.y() = 0.0;
            }
            const double w = rule.weights(q) * mesh.measure(e);
            for (int a = 0; a < mesh.nodes_per_element(); ++a) {
                const int i = mesh.interior_index(static_cast<std::size_t>(mesh.element_vertex(e, a)));
                if (i >= 0) {
                    load(i) += w * gq.dot(grads.col(a));
                }
            }
        }
    }
    return load;
}

SolveResult spd_solve(const SparseMatrix& matrix, const Vector& rhs, double tol, const std::optional<Vector>& guess,
                      int max_iterations)
{
    if (matrix.rows() != matrix.cols() || matrix.rows() != rhs.size()) {
        throw std::invalid_argument("spd_solve: dimension mismatch");
    }
    if (guess && guess->size() != rhs.size()) {
        throw std::invalid_argument("spd_solve: initial guess has the wrong size");
    }
    const int limit = max_iterations > 0 ? max_iterations : std::max<int>(100, 10 * static_cast<int>(rhs.size()));

    SolveResult result;
    const double rhs_norm = rhs.norm();
    if (rhs_norm == 0.0) {
        result.x = Vector::Zero(rhs.size());
        return result;
    }

    const Vector inv_diag = matrix.diagonal().cwiseInverse();
    result.x = guess ? *guess : Vector::Zero(rhs.size());
    Vector r = rhs - matrix * result.x;
    Vector z = inv_diag.cwiseProduct(r);
    Vector p = z;
    Vector ap(rhs.size());
    double rz = r.dot(z);
    const double threshold = tol * rhs_norm;

    int it = 0;
    double r_norm = r.norm();
    while (r_norm > threshold && it < limit) {
        ap.noalias() = matrix * p;
        const double step = rz / p.dot(ap);
        result.x += step * p;
        r -= step * ap;
        ++it;
        r_norm = r.norm();
        if (r_norm <= threshold) {
            break;
        }
        z = inv_diag.cwiseProduct(r);
        const double rz_next = r.dot(z);
        p = z + (rz_next / rz) * p;
        rz = rz_next;
    }
    result.iterations = it;
    result.residual = r_norm / rhs_norm;
    if (!(r_norm <= threshold)) {
        std::ostringstream os;
        os << "spd_solve: no convergence after " << it << " iterations, relative residual " << result.residual
           << " (tolerance " << tol << ")";
        throw SolverError(os.str(), it, result.residual);
    }
    return result;
}

FeFunction nodal_interpolant(std::shared_ptr<const SpatialMesh> mesh, const SpatialFunction& g)
{
    Vector coeffs(idx(mesh->interior_count()));
    for (std::size_t i = 0; i < mesh->interior_count(); ++i) {
        coeffs(idx(i)) = g(mesh->vertex(mesh->interior_vertex(i)));
    }
    return FeFunction(std::move(mesh), std::move(coeffs));
}

FeFunction l2_projection(std::shared_ptr<const SpatialMesh> mesh, const SpatialFunction& g, int quad_points,
                         double tol)
{
    const Vector load = assemble_load(*mesh, g, quad_points);
    auto solved = spd_solve(assemble_mass(*mesh), load, tol);
    return FeFunction(std::move(mesh), std::move(solved.x));
}

FeFunction ritz_projection(std::shared_ptr<const SpatialMesh> mesh, const GradientFunction& grad_g, int quad_points,
                           double tol)
{
    const Vector load = assemble_gradient_load(*mesh, grad_g, quad_points);
    auto solved = spd_solve(assemble_stiffness(*mesh), load, tol);
    return FeFunction(std::move(mesh), std::move(solved.x));
}

double grad_norm_sq(const SparseMatrix& stiffness, const Vector& coeffs) { return coeffs.dot(stiffness * coeffs); }

double grad_norm_sq(const FeFunction& u)
{
    double total = 0.0;
    for (std::size_t e = 0; e < u.mesh->element_count(); ++e) {
        total += u.mesh->measure(e) * element_gradient(*u.mesh, u.coeffs, e).squaredNorm();
    }
    return total;
}

double l2_norm_sq(const SparseMatrix& mass, const Vector& coeffs) { return coeffs.dot(mass * coeffs); }

double h1_seminorm_error(const SpatialMesh& mesh, const Vector& coeffs, const GradientFunction& exact_grad,
                         int quad_points)
{
    const QuadratureRule rule = quadrature_rule(mesh.dimension(), quad_points);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        const Point gh = element_gradient(mesh, coeffs, e);
        double local = 0.0;
        for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            Point diff = gh - exact_grad(map_point(mesh, e, rule.barycentric.col(q)));
            if (mesh.dimension() == 1) {
                diff.y() = 0.0;
            }
            local += rule.weights(q) * diff.squaredNorm();
        }
        total += local * mesh.measure(e);
    }
    return std::sqrt(total);
}

double h1_seminorm_error(const FeFunction& u, const GradientFunction& exact_grad, int quad_points)
{
    return h1_seminorm_error(*u.mesh, u.coeffs, exact_grad, quad_points);
}

double l2_error(const SpatialMesh& mesh, const Vector& coeffs, const SpatialFunction& exact, int quad_points)
{
    const QuadratureRule rule = quadrature_rule(mesh.dimension(), quad_points);
    double total = 0.0;
    for (std::size_t e = 0; e < mesh.element_count(); ++e) {
        double local = 0.0;
        for (Eigen::Index q = 0; q < rule.weights.size(); ++q) {
            const Eigen::Vector3d bary = rule.barycentric.col(q);
            double uh = 0.0;
            for (int a = 0; a < mesh.nodes_per_element(); ++a) {
                const int i = mesh.interior_index(static_cast<std::size_t>(mesh.element_vertex(e, a)));
                if (i >= 0) {
                    uh += bary(a) * coeffs(i);
                }
            }
            const double diff = uh - exact(map_point(mesh, e, bary));
            local += rule.weights(q) * diff * diff;
        }
        total += local * mesh.measure(e);
    }
    return std::sqrt(total);
}

FeSpace::FeSpace(SpatialMesh m, int quad)
    : mesh(std::make_shared<const SpatialMesh>(std::move(m))),
      mass(assemble_mass(*mesh)),
      stiffness(assemble_stiffness(*mesh)),
      quad_points(quad)
{
    quadrature_rule(mesh->dimension(), quad);
}

} // namespace fracwave
