#pragma once

#include <Eigen/Dense>

#include "clsim/geometry.hpp"
#include "clsim/trainer.hpp"

namespace clsim {

/// Squared parameter distances of a trajectory, with the three error
/// metrics read off them. Indices are 0-based here; row t is task t+1.
struct ErrorReport {
    Eigen::MatrixXd estimation_errors;  // [t][i] = ||w_t - w_i*||^2, i <= t
    Eigen::VectorXd adaptation;
    Eigen::VectorXd generalization;
    Eigen::VectorXd memory;  // memory[0] is NaN

    int task_count() const { return static_cast<int>(adaptation.size()); }
};

ErrorReport compute_errors(const Trajectory& traj, const TaskVectors& vecs);

// The per-metric functions take 1-based task indices.
double adaptation_error(const Trajectory& traj, const TaskVectors& vecs, int t);
double generalization_error(const Trajectory& traj, const TaskVectors& vecs, int t);
/// Throws UndefinedMetricError for t = 1.
double memory_error(const Trajectory& traj, const TaskVectors& vecs, int t);

}  // namespace clsim
