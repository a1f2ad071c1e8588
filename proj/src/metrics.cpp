#include "clsim/metrics.hpp"

#include <limits>
#include <sstream>

#include "clsim/errors.hpp"

namespace clsim {

namespace {

void check_index(const Trajectory& traj, const TaskVectors& vecs, int t) {
    const int count = static_cast<int>(traj.snapshots.size());
    if (t < 1 || t > count || t > vecs.task_count()) {
        std::ostringstream msg;
        msg << "task index " << t << " outside 1.." << count;
        throw ValidationError(msg.str());
    }
}

double sq_distance(const Trajectory& traj, const TaskVectors& vecs, int t, int i) {
    return (traj.snapshots[t - 1] - vecs.vectors.col(i - 1)).squaredNorm();
}

}  // namespace

ErrorReport compute_errors(const Trajectory& traj, const TaskVectors& vecs) {
    const int count = static_cast<int>(traj.snapshots.size());
    if (vecs.task_count() < count) throw ValidationError("fewer task vectors than snapshots");

    ErrorReport r;
    r.estimation_errors = Eigen::MatrixXd::Zero(count, count);
    r.adaptation.resize(count);
    r.generalization.resize(count);
    r.memory.resize(count);
    for (int t = 0; t < count; ++t) {
        for (int i = 0; i <= t; ++i) {
            r.estimation_errors(t, i) = (traj.snapshots[t] - vecs.vectors.col(i)).squaredNorm();
        }
        r.adaptation(t) = r.estimation_errors(t, t);
        r.generalization(t) = r.estimation_errors.row(t).head(t + 1).sum() / (t + 1);
        if (t == 0) {
            r.memory(t) = std::numeric_limits<double>::quiet_NaN();
        } else {
            double diff = 0.0;
            for (int i = 0; i < t; ++i) diff += r.estimation_errors(t, i) - r.estimation_errors(i, i);
            r.memory(t) = diff / t;
        }
    }
    return r;
}

double adaptation_error(const Trajectory& traj, const TaskVectors& vecs, int t) {
    check_index(traj, vecs, t);
    return sq_distance(traj, vecs, t, t);
}

double generalization_error(const Trajectory& traj, const TaskVectors& vecs, int t) {
    check_index(traj, vecs, t);
    double sum = 0.0;
    for (int i = 1; i <= t; ++i) sum += sq_distance(traj, vecs, t, i);
    return sum / t;
}

double memory_error(const Trajectory& traj, const TaskVectors& vecs, int t) {
    check_index(traj, vecs, t);
    if (t < 2) throw UndefinedMetricError("memory error is undefined for the first task");
    double sum = 0.0;
    for (int i = 1; i < t; ++i) sum += sq_distance(traj, vecs, t, i) - sq_distance(traj, vecs, i, i);
    return sum / (t - 1);
}

}  // namespace clsim
