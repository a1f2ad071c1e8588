#pragma once

#include <Eigen/Dense>

#include <string>
#include <string_view>

#include "clsim/random.hpp"

namespace clsim {

enum class GeometryMode { identical, orthogonal, angle, explicit_matrix };

std::string_view to_string(GeometryMode mode);
GeometryMode parse_geometry_mode(std::string_view text);

/// Norms and pairwise squared distances of the task optima. This is all the
/// closed-form expectations ever see of the tasks.
struct TaskGeometry {
    Eigen::VectorXd sq_norms;  // ||w_t*||^2
    Eigen::MatrixXd sq_dists;  // ||w_i* - w_j*||^2

    int task_count() const { return static_cast<int>(sq_norms.size()); }

    /// Inner products implied by the norms and distances.
    Eigen::MatrixXd gram() const;

    /// Leading t x t block (the geometry seen after t tasks).
    TaskGeometry prefix(int t) const;

    /// Multiplies every norm and distance by `factor`.
    TaskGeometry scaled(double factor) const;
};

/// How a geometry was requested. Kept around so sweeps over theta can
/// rebuild it.
struct GeometrySpec {
    GeometryMode mode = GeometryMode::identical;
    double theta_degrees = 0.0;
    Eigen::VectorXd sq_norms;  // explicit mode only
    Eigen::MatrixXd sq_dists;  // explicit mode only
};

/// Unit-norm task optima; columns are w_1*..w_T*.
struct TaskVectors {
    Eigen::MatrixXd vectors;  // p x T

    int dimension() const { return static_cast<int>(vectors.rows()); }
    int task_count() const { return static_cast<int>(vectors.cols()); }
    Eigen::VectorXd task(int t) const { return vectors.col(t); }
};

/// Throws ValidationError unless sizes agree, distances are symmetric with a
/// zero diagonal, entries are nonnegative and the implied Gram matrix is
/// positive semidefinite (smallest eigenvalue >= -1e-9 * max entry).
void validate_geometry(const TaskGeometry& geom);

TaskGeometry make_identical(int task_count);
TaskGeometry make_orthogonal(int task_count);
TaskGeometry make_angle(int task_count, double theta_radians);
TaskGeometry make_explicit(Eigen::VectorXd sq_norms, Eigen::MatrixXd sq_dists);

TaskGeometry make_geometry(const GeometrySpec& spec, int task_count);

/// Numerical rank of the implied Gram matrix.
int geometry_rank(const TaskGeometry& geom);

/// Smallest dimension `realize_vectors` accepts for this geometry.
int min_dimension(const TaskGeometry& geom);

/// Draws task optima with the given geometry in R^p. Built from a random
/// orthonormal frame: Gram-Schmidt on Gaussian draws, redrawing any column
/// whose residual falls under 1e-10 of its original norm.
TaskVectors realize_vectors(const TaskGeometry& geom, int dimension, Rng& rng);

TaskGeometry measure_geometry(const TaskVectors& vecs);

/// Random p x k matrix with orthonormal columns.
Eigen::MatrixXd random_orthonormal_frame(int dimension, int columns, Rng& rng);

}  // namespace clsim
