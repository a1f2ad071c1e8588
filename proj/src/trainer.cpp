#include "clsim/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <sstream>

#include "clsim/errors.hpp"
#include "clsim/solvers.hpp"

namespace clsim {

std::string_view to_string(Regime regime) {
    switch (regime) {
        case Regime::Overparameterized: return "Overparameterized";
        case Regime::Underparameterized: return "Underparameterized";
        case Regime::Boundary: return "Boundary";
    }
    return "?";
}

std::string_view to_string(BufferMode mode) {
    return mode == BufferMode::subset_fixed ? "subset-fixed" : "iid-fresh";
}

std::string_view to_string(FirstTaskPolicy policy) {
    return policy == FirstTaskPolicy::plain ? "plain" : "padded";
}

BufferMode parse_buffer_mode(std::string_view text) {
    if (text == "subset-fixed") return BufferMode::subset_fixed;
    if (text == "iid-fresh") return BufferMode::iid_fresh;
    throw ValidationError("unknown buffer mode '" + std::string(text) + "'");
}

FirstTaskPolicy parse_first_task_policy(std::string_view text) {
    if (text == "plain") return FirstTaskPolicy::plain;
    if (text == "padded") return FirstTaskPolicy::padded;
    throw ValidationError("unknown first-task policy '" + std::string(text) + "'");
}

void validate(const SequenceConfig& c) {
    std::ostringstream msg;
    if (c.tasks < 1) msg << "T must be at least 1 (got " << c.tasks << ")";
    else if (c.samples < 1) msg << "n must be at least 1 (got " << c.samples << ")";
    else if (c.dimension < 1) msg << "p must be at least 1 (got " << c.dimension << ")";
    else if (c.rehearsal < 0) msg << "s must be nonnegative (got " << c.rehearsal << ")";
    else if (!(c.sigma >= 0.0)) msg << "sigma must be nonnegative (got " << c.sigma << ")";
    else if (c.geometry.task_count() != c.tasks) {
        msg << "geometry describes " << c.geometry.task_count() << " tasks but T=" << c.tasks;
    }
    if (!msg.str().empty()) throw ValidationError(msg.str());
    validate_geometry(c.geometry);

    if (c.buffer_mode == BufferMode::subset_fixed && c.tasks > 1) {
        const long long stored = static_cast<long long>(c.samples) * (c.tasks - 1);
        if (c.rehearsal > stored) {
            msg << "subset-fixed buffer cannot hold s=" << c.rehearsal << " samples: only n*(T-1)="
                << stored << " are ever observed";
            throw CapacityError(msg.str());
        }
        // quotas shrink as t grows, so the t=2 quota (all of s on task 1) is the binding one
        if (c.rehearsal > c.samples) {
            msg << "subset-fixed buffer needs q_1=" << c.rehearsal << " samples from task 1 at t=2"
                << " but only n=" << c.samples << " are stored";
            throw CapacityError(msg.str());
        }
    }
}

TaskData draw_task_data(const Eigen::VectorXd& w_star, int n, double sigma, Rng& rng) {
    const Eigen::Index p = w_star.size();
    std::normal_distribution<double> normal;
    TaskData data{Eigen::MatrixXd(p, n), Eigen::VectorXd(n)};
    double* x = data.features.data();
    for (Eigen::Index k = 0; k < p * n; ++k) x[k] = normal(rng);
    data.responses.noalias() = data.features.transpose() * w_star;
    if (sigma > 0.0) {
        for (int i = 0; i < n; ++i) data.responses(i) += sigma * normal(rng);
    }
    return data;
}

std::vector<int> buffer_quotas(int s, int previous) {
    if (previous < 1) throw ValidationError("buffer needs at least one previous task");
    std::vector<int> q(previous, s / previous);
    for (int i = 0; i < s % previous; ++i) ++q[i];
    return q;
}

int RehearsalBuffer::size() const {
    int total = 0;
    for (const auto& r : responses) total += static_cast<int>(r.size());
    return total;
}

RehearsalBuffer assemble_buffer(const std::vector<StoredTask>& history, int t, int s,
                                BufferMode mode, double sigma, Rng& rng) {
    if (t < 2) throw ValidationError("rehearsal buffers start at task 2");
    if (static_cast<int>(history.size()) < t - 1) {
        throw ValidationError("history is shorter than the number of previous tasks");
    }
    const std::vector<int> quotas = buffer_quotas(s, t - 1);
    RehearsalBuffer buf;
    buf.features.reserve(t - 1);
    buf.responses.reserve(t - 1);
    for (int i = 0; i < t - 1; ++i) {
        const StoredTask& task = history[i];
        const int q = quotas[i];
        if (mode == BufferMode::iid_fresh) {
            TaskData fresh = draw_task_data(task.w_star, q, sigma, rng);
            buf.features.push_back(std::move(fresh.features));
            buf.responses.push_back(std::move(fresh.responses));
            continue;
        }
        const int stored = static_cast<int>(task.order.size());
        if (q > stored) {
            std::ostringstream msg;
            msg << "buffer quota q_" << (i + 1) << "=" << q << " exceeds the " << stored
                << " samples stored for task " << (i + 1);
            throw CapacityError(msg.str());
        }
        Eigen::MatrixXd z(task.data.features.rows(), q);
        Eigen::VectorXd g(q);
        for (int k = 0; k < q; ++k) {
            z.col(k) = task.data.features.col(task.order[k]);
            g(k) = task.data.responses(task.order[k]);
        }
        buf.features.push_back(std::move(z));
        buf.responses.push_back(std::move(g));
    }
    return buf;
}

Eigen::VectorXd fit_step(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                         const Eigen::VectorXd& w_prev, bool allow_boundary, double& condition) {
    const auto m = rows.rows();
    const int p = static_cast<int>(rows.cols());
    if (classify_samples(p, m) == Regime::Boundary && !allow_boundary) {
        std::ostringstream msg;
        msg << "step has m=" << m << " samples for p=" << p
            << " parameters (|m - p| <= 1); refusing the boundary regime";
        throw BoundaryRegimeError(msg.str());
    }
    if (m < p) return fit_min_norm(rows, responses, w_prev, condition);
    return fit_least_squares(rows, responses, condition);
}

Trajectory train_sequence(const SequenceConfig& config, const TaskVectors& vectors, Rng& rng) {
    validate(config);
    if (vectors.dimension() != config.dimension || vectors.task_count() != config.tasks) {
        std::ostringstream msg;
        msg << "task vectors are " << vectors.dimension() << "x" << vectors.task_count()
            << " but the config needs " << config.dimension << "x" << config.tasks;
        throw ValidationError(msg.str());
    }

    const int p = config.dimension;
    const int n = config.samples;
    const int s = config.rehearsal;
    Trajectory traj;
    std::vector<StoredTask> history;
    history.reserve(config.tasks);
    Eigen::VectorXd w = Eigen::VectorXd::Zero(p);

    for (int t = 1; t <= config.tasks; ++t) {
        const Eigen::VectorXd w_star = vectors.task(t - 1);
        TaskData current = draw_task_data(w_star, n, config.sigma, rng);

        RehearsalBuffer buffer;
        if (t >= 2) {
            buffer = assemble_buffer(history, t, s, config.buffer_mode, config.sigma, rng);
        } else if (config.first_task == FirstTaskPolicy::padded && s > 0) {
            TaskData extra = draw_task_data(w_star, s, config.sigma, rng);
            buffer.features.push_back(std::move(extra.features));
            buffer.responses.push_back(std::move(extra.responses));
        }

        const int m = n + buffer.size();
        Eigen::MatrixXd rows(m, p);
        Eigen::VectorXd rhs(m);
        rows.topRows(n) = current.features.transpose();
        rhs.head(n) = current.responses;
        int offset = n;
        for (std::size_t i = 0; i < buffer.features.size(); ++i) {
            const auto q = buffer.responses[i].size();
            rows.middleRows(offset, q) = buffer.features[i].transpose();
            rhs.segment(offset, q) = buffer.responses[i];
            offset += static_cast<int>(q);
        }

        const Regime regime = classify_samples(p, m);
        double condition = 0.0;
        w = fit_step(rows, rhs, w, config.allow_boundary, condition);

        traj.snapshots.push_back(w);
        traj.sample_counts.push_back(m);
        traj.regimes.push_back(regime);
        traj.conditions.push_back(condition);
        traj.boundary_warnings.push_back(regime == Regime::Boundary);

        StoredTask stored{std::move(current), w_star, std::vector<int>(n)};
        if (config.buffer_mode == BufferMode::subset_fixed) {
            std::iota(stored.order.begin(), stored.order.end(), 0);
            std::shuffle(stored.order.begin(), stored.order.end(), rng);
        } else {
            // iid-fresh never reads the pool back
            stored.data = TaskData{};
            stored.order.clear();
        }
        history.push_back(std::move(stored));
    }
    return traj;
}

}  // namespace clsim
