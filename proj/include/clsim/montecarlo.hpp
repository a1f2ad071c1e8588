#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "clsim/errors.hpp"
#include "clsim/theory.hpp"
#include "clsim/trainer.hpp"

namespace clsim {

enum class Metric { A, M, G };

std::string_view to_string(Metric metric);

struct ExperimentSpec {
    SequenceConfig config;
    GeometrySpec geometry;  // how config.geometry was built; used by theta sweeps
    int replications = 1;
    std::uint64_t master_seed = 0;
};

enum class SweepAxis { p, s, sigma, theta };

std::string_view to_string(SweepAxis axis);
SweepAxis parse_sweep_axis(std::string_view text);

struct SweepSpec {
    ExperimentSpec base;
    SweepAxis axis = SweepAxis::s;
    std::vector<double> values;
};

/// One point of a run or sweep. A skipped row (`skipped` set) carries only
/// the axis value, regime and reason.
struct AggregateRow {
    std::optional<double> axis_value;
    Metric metric = Metric::A;
    int task = 1;
    double mean = 0.0;
    double stderr_ = 0.0;
    std::optional<double> theory;
    Regime regime = Regime::Boundary;
    int replications = 0;
    std::uint64_t master_seed = 0;
    bool skipped = false;
    std::string reason;
};

struct RunOptions {
    int threads = 1;
    TheoryMutation mutation = TheoryMutation::none;
};

/// Raised when a replication fails; names the lowest failing index.
class ReplicationError : public Error {
public:
    ReplicationError(const std::string& what, int replication)
        : Error(what), replication_(replication) {}
    int replication() const noexcept { return replication_; }

private:
    int replication_;
};

/// Per-replication metric values: values[r] holds A, G (t = 1..T) and M
/// (t = 2..T) in the row order produced by run_replications.
struct ReplicationTable {
    std::vector<std::vector<double>> values;
};

/// Replication r draws fresh task vectors and data from substream
/// (master_seed, r). Results are reduced in ascending r, so output does not
/// depend on the thread count. Rows are ordered by task, then A, M, G.
std::vector<AggregateRow> run_replications(const ExperimentSpec& spec,
                                           const RunOptions& options = {});

/// Same as run_replications, also returning the raw per-replication values.
std::vector<AggregateRow> run_replications(const ExperimentSpec& spec, const RunOptions& options,
                                           ReplicationTable& table);

/// Closed-form expectation matching a row, or nullopt when none applies
/// (Boundary, memory at t = 1, plain first task with s > 0).
std::optional<double> theory_value(const SequenceConfig& config, Metric metric, int task,
                                   TheoryMutation mutation = TheoryMutation::none);

/// Runs every axis value. Values that give an invalid or Boundary
/// configuration become skipped rows. Throws EmptySweepError if nothing ran.
std::vector<AggregateRow> run_sweep(const SweepSpec& spec, const RunOptions& options = {});

/// Applies one axis value to a base experiment. Throws ValidationError when
/// the result is not a valid configuration.
ExperimentSpec apply_axis(const ExperimentSpec& base, SweepAxis axis, double value);

}  // namespace clsim
