#include "clsim/montecarlo.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <sstream>
#include <thread>

#include "clsim/errors.hpp"
#include "clsim/metrics.hpp"

namespace clsim {

std::string_view to_string(Metric metric) {
    switch (metric) {
        case Metric::A: return "A";
        case Metric::M: return "M";
        case Metric::G: return "G";
    }
    return "?";
}

std::string_view to_string(SweepAxis axis) {
    switch (axis) {
        case SweepAxis::p: return "p";
        case SweepAxis::s: return "s";
        case SweepAxis::sigma: return "sigma";
        case SweepAxis::theta: return "theta";
    }
    return "?";
}

SweepAxis parse_sweep_axis(std::string_view text) {
    if (text == "p") return SweepAxis::p;
    if (text == "s") return SweepAxis::s;
    if (text == "sigma") return SweepAxis::sigma;
    if (text == "theta") return SweepAxis::theta;
    throw ValidationError("unknown sweep axis '" + std::string(text) + "'");
}

namespace {

struct Cell {
    Metric metric;
    int task;
};

std::vector<Cell> cell_layout(int tasks) {
    std::vector<Cell> cells;
    for (int t = 1; t <= tasks; ++t) {
        cells.push_back({Metric::A, t});
        if (t >= 2) cells.push_back({Metric::M, t});
        cells.push_back({Metric::G, t});
    }
    return cells;
}

// Step sample counts are known before any data is drawn, so boundary steps
// are rejected up front rather than inside a replication.
void check_boundary(const SequenceConfig& c) {
    if (c.allow_boundary) return;
    const int first =
        c.samples + (c.first_task == FirstTaskPolicy::padded ? c.rehearsal : 0);
    const int later = c.samples + c.rehearsal;
    const bool first_bad = classify_samples(c.dimension, first) == Regime::Boundary;
    const bool later_bad = c.tasks >= 2 && classify_samples(c.dimension, later) == Regime::Boundary;
    if (first_bad || later_bad) {
        std::ostringstream msg;
        msg << "boundary regime: a step has |m - p| <= 1 (p=" << c.dimension
            << ", m=" << (first_bad ? first : later) << ")";
        throw BoundaryRegimeError(msg.str());
    }
}

std::vector<double> one_replication(const ExperimentSpec& spec, int r,
                                    const std::vector<Cell>& cells) {
    Rng rng = make_substream(spec.master_seed, static_cast<std::uint64_t>(r));
    const TaskVectors vecs = realize_vectors(spec.config.geometry, spec.config.dimension, rng);
    const Trajectory traj = train_sequence(spec.config, vecs, rng);
    const ErrorReport report = compute_errors(traj, vecs);
    std::vector<double> values;
    values.reserve(cells.size());
    for (const Cell& c : cells) {
        const int i = c.task - 1;
        switch (c.metric) {
            case Metric::A: values.push_back(report.adaptation(i)); break;
            case Metric::M: values.push_back(report.memory(i)); break;
            case Metric::G: values.push_back(report.generalization(i)); break;
        }
    }
    return values;
}

}  // namespace

std::optional<double> theory_value(const SequenceConfig& config, Metric metric, int task,
                                   TheoryMutation mutation) {
    if (config.first_task == FirstTaskPolicy::plain && config.rehearsal > 0) return std::nullopt;
    if (classify_regime(config.dimension, config.samples, config.rehearsal) == Regime::Boundary) {
        return std::nullopt;
    }
    if (metric == Metric::M && task < 2) return std::nullopt;
    const TheoryInput in{task, config.samples, config.dimension, config.rehearsal, config.sigma};
    switch (metric) {
        case Metric::A: return theory_adaptation(in, config.geometry, mutation).total;
        case Metric::M: return theory_memory(in, config.geometry, mutation).total;
        case Metric::G: return theory_generalization(in, config.geometry, mutation).total;
    }
    return std::nullopt;
}

std::vector<AggregateRow> run_replications(const ExperimentSpec& spec, const RunOptions& options,
                                           ReplicationTable& table) {
    if (spec.replications < 1) throw ValidationError("replications must be at least 1");
    validate(spec.config);
    check_boundary(spec.config);
    const int min_p = min_dimension(spec.config.geometry);
    if (spec.config.dimension < min_p) {
        std::ostringstream msg;
        msg << "dimension p=" << spec.config.dimension
            << " is too small to realize the task geometry; need p >= " << min_p;
        throw DimensionError(msg.str(), min_p);
    }

    const int reps = spec.replications;
    const std::vector<Cell> cells = cell_layout(spec.config.tasks);
    table.values.assign(reps, {});
    std::vector<std::exception_ptr> errors(reps);

    std::atomic<int> next{0};
    auto worker = [&] {
        for (int r = next++; r < reps; r = next++) {
            try {
                table.values[r] = one_replication(spec, r, cells);
            } catch (...) {
                errors[r] = std::current_exception();
            }
        }
    };
    const int threads = std::max(1, std::min(options.threads, reps));
    if (threads == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(threads);
        for (int i = 0; i < threads; ++i) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }

    for (int r = 0; r < reps; ++r) {
        if (!errors[r]) continue;
        try {
            std::rethrow_exception(errors[r]);
        } catch (const std::exception& e) {
            std::ostringstream msg;
            msg << "replication " << r << " failed: " << e.what();
            throw ReplicationError(msg.str(), r);
        }
    }

    const Regime regime =
        classify_regime(spec.config.dimension, spec.config.samples, spec.config.rehearsal);
    std::vector<AggregateRow> rows;
    rows.reserve(cells.size());
    for (std::size_t k = 0; k < cells.size(); ++k) {
        double sum = 0.0;
        for (int r = 0; r < reps; ++r) sum += table.values[r][k];
        const double mean = sum / reps;
        double ss = 0.0;
        for (int r = 0; r < reps; ++r) {
            const double d = table.values[r][k] - mean;
            ss += d * d;
        }
        AggregateRow row;
        row.metric = cells[k].metric;
        row.task = cells[k].task;
        row.mean = mean;
        row.stderr_ = reps > 1 ? std::sqrt(ss / (reps - 1)) / std::sqrt(static_cast<double>(reps)) : 0.0;
        row.theory = theory_value(spec.config, row.metric, row.task, options.mutation);
        row.regime = regime;
        row.replications = reps;
        row.master_seed = spec.master_seed;
        rows.push_back(row);
    }
    return rows;
}

std::vector<AggregateRow> run_replications(const ExperimentSpec& spec, const RunOptions& options) {
    ReplicationTable table;
    return run_replications(spec, options, table);
}

namespace {

int integral_value(double value, const char* name) {
    const double r = std::round(value);
    if (std::abs(value - r) > 1e-9 || r < -2e9 || r > 2e9) {
        std::ostringstream msg;
        msg << name << " must be an integer (got " << value << ")";
        throw ValidationError(msg.str());
    }
    return static_cast<int>(r);
}

}  // namespace

ExperimentSpec apply_axis(const ExperimentSpec& base, SweepAxis axis, double value) {
    ExperimentSpec out = base;
    switch (axis) {
        case SweepAxis::p: out.config.dimension = integral_value(value, "p"); break;
        case SweepAxis::s: out.config.rehearsal = integral_value(value, "s"); break;
        case SweepAxis::sigma: out.config.sigma = value; break;
        case SweepAxis::theta:
            out.geometry.mode = GeometryMode::angle;
            out.geometry.theta_degrees = value;
            out.config.geometry = make_geometry(out.geometry, out.config.tasks);
            break;
    }
    validate(out.config);
    return out;
}

std::vector<AggregateRow> run_sweep(const SweepSpec& spec, const RunOptions& options) {
    if (spec.values.empty()) throw EmptySweepError("sweep has no axis values");
    std::vector<AggregateRow> rows;
    int ran = 0;
    for (double value : spec.values) {
        AggregateRow skip;
        skip.axis_value = value;
        skip.skipped = true;
        skip.replications = spec.base.replications;
        skip.master_seed = spec.base.master_seed;
        ExperimentSpec point;
        try {
            point = apply_axis(spec.base, spec.axis, value);
            skip.regime = classify_regime(point.config.dimension, point.config.samples,
                                          point.config.rehearsal);
            check_boundary(point.config);
        } catch (const Error& e) {
            skip.reason = e.what();
            rows.push_back(skip);
            continue;
        }
        auto point_rows = run_replications(point, options);
        for (auto& row : point_rows) {
            row.axis_value = value;
            rows.push_back(std::move(row));
        }
        ++ran;
    }
    if (ran == 0) throw EmptySweepError("every sweep value was skipped (invalid or boundary)");
    return rows;
}

}  // namespace clsim
