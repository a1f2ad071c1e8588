#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string_view>
#include <vector>

#include "clsim/geometry.hpp"
#include "clsim/random.hpp"
#include "clsim/regime.hpp"

namespace clsim {

enum class BufferMode {
    subset_fixed,  // fixed random subset of each task's original samples
    iid_fresh,     // fresh draws from each previous task at every step
};

enum class FirstTaskPolicy {
    plain,   // task 1 trains on its n samples only
    padded,  // task 1 also gets s extra fresh samples of its own
};

std::string_view to_string(BufferMode mode);
std::string_view to_string(FirstTaskPolicy policy);
BufferMode parse_buffer_mode(std::string_view text);
FirstTaskPolicy parse_first_task_policy(std::string_view text);

struct SequenceConfig {
    int tasks = 1;         // T
    int samples = 1;       // n per task
    int dimension = 1;     // p
    int rehearsal = 0;     // s, total stored samples
    double sigma = 0.0;    // noise standard deviation
    TaskGeometry geometry = make_identical(1);
    BufferMode buffer_mode = BufferMode::iid_fresh;
    FirstTaskPolicy first_task = FirstTaskPolicy::padded;
    bool allow_boundary = false;  // fit boundary steps anyway instead of throwing
    std::uint64_t seed = 0;
};

/// Throws ValidationError (CapacityError for over-full subset buffers).
void validate(const SequenceConfig& config);

struct TaskData {
    Eigen::MatrixXd features;   // p x n, columns are samples
    Eigen::VectorXd responses;  // n
};

/// Draws n samples of y = X^T w* + eps with standard normal features and
/// N(0, sigma^2) noise.
TaskData draw_task_data(const Eigen::VectorXd& w_star, int n, double sigma, Rng& rng);

/// Per-task quotas for a buffer of s samples spread over `previous` tasks:
/// floor(s / previous), plus one for the first s mod previous tasks.
std::vector<int> buffer_quotas(int s, int previous);

struct RehearsalBuffer {
    std::vector<Eigen::MatrixXd> features;   // Z_i, p x q_i
    std::vector<Eigen::VectorXd> responses;  // g_i, q_i

    int size() const;
};

/// Original samples of one task, with a fixed sampling order used by
/// subset-fixed buffers.
struct StoredTask {
    TaskData data;
    Eigen::VectorXd w_star;
    std::vector<int> order;  // random permutation of 0..n-1
};

/// Buffer used when training task `t` (1-based, t >= 2) from the stored
/// history of tasks 1..t-1.
RehearsalBuffer assemble_buffer(const std::vector<StoredTask>& history, int t, int s,
                                BufferMode mode, double sigma, Rng& rng);

struct Trajectory {
    std::vector<Eigen::VectorXd> snapshots;  // w_1..w_T
    std::vector<int> sample_counts;          // m_t
    std::vector<Regime> regimes;
    std::vector<double> conditions;          // Gram (or design) condition estimate
    std::vector<bool> boundary_warnings;
};

/// Sequential rehearsal training from w_0 = 0. Each step stacks the current
/// task with its buffer, then takes the minimum-distance interpolant when
/// m_t < p or the least-squares fit when m_t > p.
Trajectory train_sequence(const SequenceConfig& config, const TaskVectors& vectors, Rng& rng);

/// Fits one stacked step; exposed so tests can drive a step directly.
Eigen::VectorXd fit_step(const Eigen::MatrixXd& rows, const Eigen::VectorXd& responses,
                         const Eigen::VectorXd& w_prev, bool allow_boundary, double& condition);

}  // namespace clsim
