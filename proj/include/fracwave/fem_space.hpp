#pragma once

#include <cstddef>
#include <functional>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Core>
#include <Eigen/SparseCore>

namespace fracwave {

using Vector = Eigen::VectorXd;
using Point = Eigen::Vector2d;
/// Compressed-row sparse matrix on the interior unknowns.
using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Scalar field on the domain. 1D meshes use only the first coordinate.
using SpatialFunction = std::function<double(const Point&)>;
/// Gradient field; 1D meshes read only the first component.
using GradientFunction = std::function<Point(const Point&)>;

class SolverError : public std::runtime_error {
public:
    SolverError(const std::string& what, int iterations, double residual)
        : std::runtime_error(what), iterations_(iterations), residual_(residual)
    {
    }
    int iterations() const { return iterations_; }
    double residual() const { return residual_; }

private:
    int iterations_;
    double residual_;
};

/// P1 mesh of an interval (Ms equal cells) or of the unit square
/// (Ms x Ms cells, each cut into two right triangles along the (+1, +1) diagonal).
///
/// Vertices are numbered lexicographically, x fastest. Only interior vertices
/// carry unknowns; interior_index() maps a vertex to its unknown or -1.
class SpatialMesh {
public:
    int dimension() const { return dimension_; }
    std::size_t cells_per_direction() const { return cells_; }
    double mesh_size() const { return h_; }

    std::size_t vertex_count() const { return static_cast<std::size_t>(coords_.cols()); }
    std::size_t element_count() const { return static_cast<std::size_t>(connectivity_.cols()); }
    /// Number of interior vertices, M.
    std::size_t interior_count() const { return interior_count_; }
    int nodes_per_element() const { return dimension_ + 1; }

    Point vertex(std::size_t v) const;
    int element_vertex(std::size_t e, int local) const { return connectivity_(local, static_cast<Eigen::Index>(e)); }
    bool is_boundary(std::size_t v) const { return boundary_[v]; }
    int interior_index(std::size_t v) const { return interior_index_[v]; }
    /// Vertex number of interior unknown i.
    std::size_t interior_vertex(std::size_t i) const { return interior_vertices_[i]; }

    /// Length or area of element e.
    double measure(std::size_t e) const { return measures_[e]; }
    /// Gradients of the local hat functions on element e, one column per local vertex.
    const Eigen::Matrix<double, 2, 3>& shape_gradients(std::size_t e) const { return gradients_[e]; }

    /// Element containing p and p's barycentric coordinates there.
    std::pair<std::size_t, Eigen::Vector3d> locate(const Point& p) const;

    friend SpatialMesh build_mesh_1d(double a, double b, std::size_t cells);
    friend SpatialMesh build_mesh_2d_unit_square(std::size_t cells);

private:
    SpatialMesh() = default;
    void finalize();

    int dimension_ = 1;
    std::size_t cells_ = 0;
    double h_ = 0.0;
    Point origin_ = Point::Zero();
    Eigen::Matrix2Xd coords_;
    Eigen::Matrix3Xi connectivity_;
    std::vector<bool> boundary_;
    std::vector<int> interior_index_;
    std::vector<std::size_t> interior_vertices_;
    std::size_t interior_count_ = 0;
    std::vector<double> measures_;
    std::vector<Eigen::Matrix<double, 2, 3>> gradients_;
};

SpatialMesh build_mesh_1d(double a, double b, std::size_t cells);
SpatialMesh build_mesh_2d_unit_square(std::size_t cells);

/// Reference-element quadrature: barycentric points (one column each) and
/// weights that sum to one (they are scaled by the element measure).
struct QuadratureRule {
    Eigen::Matrix3Xd barycentric;
    Eigen::VectorXd weights;
    int exact_degree = 0;
};

/// Gauss-Legendre with 1..7 points in 1D; Dunavant rules with 1, 3, 6 or 7 points on triangles.
QuadratureRule quadrature_rule(int dimension, int points);

inline constexpr int default_quadrature_points = 3;

/// Function in the P1 space with homogeneous Dirichlet data: coefficients on
/// the interior vertices of a shared mesh.
struct FeFunction {
    std::shared_ptr<const SpatialMesh> mesh;
    Vector coeffs;

    FeFunction(std::shared_ptr<const SpatialMesh> m, Vector c);

    /// Nodal value at vertex v (zero on the boundary).
    double nodal_value(std::size_t v) const;
    /// P1 interpolation of the nodal values at p.
    double operator()(const Point& p) const;
};

SparseMatrix assemble_mass(const SpatialMesh& mesh);
SparseMatrix assemble_stiffness(const SpatialMesh& mesh);

/// (g, phi_i) for each interior i.
Vector assemble_load(const SpatialMesh& mesh, const SpatialFunction& g, int quad_points = default_quadrature_points);
/// (grad g, grad phi_i) for each interior i.
Vector assemble_gradient_load(const SpatialMesh& mesh, const GradientFunction& grad_g,
                              int quad_points = default_quadrature_points);

struct SolveResult {
    Vector x;
    int iterations = 0;
    double residual = 0.0;
};

inline constexpr double default_solver_tolerance = 1e-12;

/// Jacobi-preconditioned conjugate gradients, stopping on the recursively
/// updated relative residual. Throws SolverError when the
/// relative residual is not reached within max_iterations (default 10 * rows).
SolveResult spd_solve(const SparseMatrix& matrix, const Vector& rhs, double tol = default_solver_tolerance,
                      const std::optional<Vector>& guess = std::nullopt, int max_iterations = 0);

FeFunction nodal_interpolant(std::shared_ptr<const SpatialMesh> mesh, const SpatialFunction& g);
FeFunction l2_projection(std::shared_ptr<const SpatialMesh> mesh, const SpatialFunction& g,
                         int quad_points = default_quadrature_points, double tol = default_solver_tolerance);
FeFunction ritz_projection(std::shared_ptr<const SpatialMesh> mesh, const GradientFunction& grad_g,
                           int quad_points = default_quadrature_points, double tol = default_solver_tolerance);

/// coeffs^T A coeffs = ||grad u||^2.
double grad_norm_sq(const SparseMatrix& stiffness, const Vector& coeffs);
double grad_norm_sq(const FeFunction& u);
/// coeffs^T B coeffs = ||u||^2.
double l2_norm_sq(const SparseMatrix& mass, const Vector& coeffs);

/// ||grad u_h - exact_grad||_{L2} by element quadrature.
double h1_seminorm_error(const FeFunction& u, const GradientFunction& exact_grad,
                         int quad_points = default_quadrature_points);
double h1_seminorm_error(const SpatialMesh& mesh, const Vector& coeffs, const GradientFunction& exact_grad,
                         int quad_points = default_quadrature_points);
/// ||u_h - exact||_{L2} by element quadrature.
double l2_error(const SpatialMesh& mesh, const Vector& coeffs, const SpatialFunction& exact,
                int quad_points = default_quadrature_points);

/// Mesh together with its assembled Galerkin matrices.
struct FeSpace {
    std::shared_ptr<const SpatialMesh> mesh;
    SparseMatrix mass;
    SparseMatrix stiffness;
    int quad_points = default_quadrature_points;

    explicit FeSpace(SpatialMesh m, int quad = default_quadrature_points);
    std::size_t size() const { return mesh->interior_count(); }
};

} // namespace fracwave
