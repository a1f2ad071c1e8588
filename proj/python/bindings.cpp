#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "clsim/errors.hpp"
#include "clsim/geometry.hpp"
#include "clsim/metrics.hpp"
#include "clsim/montecarlo.hpp"
#include "clsim/solvers.hpp"
#include "clsim/theory.hpp"
#include "clsim/trainer.hpp"

namespace py = pybind11;
using namespace clsim;

namespace {

py::dict breakdown(const TheoryBreakdown& b) {
    py::dict d;
    d["total"] = b.total;
    d["terms"] = b.terms;
    d["lambda"] = b.lambda;
    d["regime"] = std::string(to_string(b.regime));
    if (b.u.size() > 0) d["u"] = b.u;
    return d;
}

py::list rows_to_list(const std::vector<AggregateRow>& rows) {
    py::list out;
    for (const auto& r : rows) {
        py::dict d;
        d["axis_value"] = r.axis_value ? py::cast(*r.axis_value) : py::none();
        d["skipped"] = r.skipped;
        d["regime"] = std::string(to_string(r.regime));
        d["reps"] = r.replications;
        d["seed"] = r.master_seed;
        if (r.skipped) {
            d["reason"] = r.reason;
        } else {
            d["metric"] = std::string(to_string(r.metric));
            d["task"] = r.task;
            d["mean"] = r.mean;
            d["stderr"] = r.stderr_;
            d["theory"] = r.theory ? py::cast(*r.theory) : py::none();
        }
        out.append(d);
    }
    return out;
}

py::tuple extremum(const Extremum& e) {
    std::vector<int> s;
    std::vector<double> v;
    for (const auto& p : e.curve) {
        s.push_back(p.rehearsal);
        v.push_back(p.value);
    }
    return py::make_tuple(e.argmin, s, v);
}

TheoryInput theory_input(int T, int n, int p, int s, double sigma) { return {T, n, p, s, sigma}; }

ExperimentSpec experiment(const SequenceConfig& config, int reps, std::uint64_t seed) {
    ExperimentSpec e;
    e.config = config;
    e.config.seed = seed;
    e.geometry.mode = GeometryMode::explicit_matrix;
    e.geometry.sq_norms = config.geometry.sq_norms;
    e.geometry.sq_dists = config.geometry.sq_dists;
    e.replications = reps;
    e.master_seed = seed;
    return e;
}

}  // namespace

PYBIND11_MODULE(_clsim, m) {
    m.doc() = "Rehearsal-based continual linear regression: closed forms and simulation";

    auto base = py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    auto validation = py::register_exception<ValidationError>(m, "ValidationError", base.ptr());
    py::register_exception<DimensionError>(m, "DimensionError", validation.ptr());
    py::register_exception<CapacityError>(m, "CapacityError", validation.ptr());
    py::register_exception<RangeError>(m, "RangeError", validation.ptr());
    py::register_exception<EmptySweepError>(m, "EmptySweepError", validation.ptr());
    auto boundary = py::register_exception<BoundaryRegimeError>(m, "BoundaryRegimeError", base.ptr());
    py::register_exception<UndefinedTheoryError>(m, "UndefinedTheoryError", boundary.ptr());
    py::register_exception<UndefinedMetricError>(m, "UndefinedMetricError", base.ptr());
    py::register_exception<RankDeficiencyError>(m, "RankDeficiencyError", base.ptr());
    py::register_exception<ReplicationError>(m, "ReplicationError", base.ptr());

    py::class_<TaskGeometry>(m, "TaskGeometry")
        .def_readonly("sq_norms", &TaskGeometry::sq_norms)
        .def_readonly("sq_dists", &TaskGeometry::sq_dists)
        .def_property_readonly("task_count", &TaskGeometry::task_count)
        .def("gram", &TaskGeometry::gram)
        .def("scaled", &TaskGeometry::scaled);

    m.def("identical", &make_identical, py::arg("tasks"));
    m.def("orthogonal", &make_orthogonal, py::arg("tasks"));
    m.def("angle", [](int tasks, double degrees) { return make_angle(tasks, degrees * M_PI / 180.0); },
          py::arg("tasks"), py::arg("degrees"));
    m.def("explicit", &make_explicit, py::arg("sq_norms"), py::arg("sq_dists"));
    m.def("min_dimension", &min_dimension);
    m.def(
        "realize_vectors",
        [](const TaskGeometry& g, int p, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            return realize_vectors(g, p, rng).vectors;
        },
        py::arg("geometry"), py::arg("p"), py::arg("seed") = 0);
    m.def("measure_geometry", [](const Eigen::MatrixXd& v) { return measure_geometry(TaskVectors{v}); });

    m.def("fit_min_norm",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::VectorXd&, const Eigen::VectorXd&>(
              &fit_min_norm),
          py::arg("rows"), py::arg("responses"), py::arg("w_prev"));
    m.def("fit_least_squares",
          py::overload_cast<const Eigen::MatrixXd&, const Eigen::VectorXd&>(&fit_least_squares),
          py::arg("rows"), py::arg("responses"));

    py::class_<SequenceConfig>(m, "SequenceConfig")
        .def(py::init([](int T, int n, int p, int s, double sigma, const TaskGeometry* geometry,
                         const std::string& buffer, const std::string& first_task, bool allow_boundary) {
                 SequenceConfig c;
                 c.tasks = T;
                 c.samples = n;
                 c.dimension = p;
                 c.rehearsal = s;
                 c.sigma = sigma;
                 c.geometry = geometry ? *geometry : make_identical(T);
                 c.buffer_mode = parse_buffer_mode(buffer);
                 c.first_task = parse_first_task_policy(first_task);
                 c.allow_boundary = allow_boundary;
                 return c;
             }),
             py::arg("T"), py::arg("n"), py::arg("p"), py::arg("s") = 0, py::arg("sigma") = 0.0,
             py::arg("geometry") = nullptr, py::arg("buffer") = "iid-fresh",
             py::arg("first_task") = "padded", py::arg("allow_boundary") = false)
        .def_readwrite("T", &SequenceConfig::tasks)
        .def_readwrite("n", &SequenceConfig::samples)
        .def_readwrite("p", &SequenceConfig::dimension)
        .def_readwrite("s", &SequenceConfig::rehearsal)
        .def_readwrite("sigma", &SequenceConfig::sigma)
        .def_readwrite("geometry", &SequenceConfig::geometry);

    m.def(
        "train_sequence",
        [](const SequenceConfig& c, std::uint64_t seed) {
            Rng rng = make_rng(seed);
            const TaskVectors vecs = realize_vectors(c.geometry, c.dimension, rng);
            const Trajectory traj = train_sequence(c, vecs, rng);
            const ErrorReport r = compute_errors(traj, vecs);
            py::dict d;
            d["vectors"] = vecs.vectors;
            d["snapshots"] = traj.snapshots;
            d["sample_counts"] = traj.sample_counts;
            d["adaptation"] = r.adaptation;
            d["memory"] = r.memory;
            d["generalization"] = r.generalization;
            return d;
        },
        py::arg("config"), py::arg("seed") = 0);

    m.def("classify_regime",
          [](int p, int n, int s) { return std::string(to_string(classify_regime(p, n, s))); });
    m.def("contraction", &contraction);
    m.def(
        "theory_adaptation",
        [](int T, int n, int p, int s, double sigma, const TaskGeometry& g) {
            return breakdown(theory_adaptation(theory_input(T, n, p, s, sigma), g));
        },
        py::arg("T"), py::arg("n"), py::arg("p"), py::arg("s"), py::arg("sigma"), py::arg("geometry"));
    m.def(
        "theory_memory",
        [](int T, int n, int p, int s, double sigma, const TaskGeometry& g) {
            return breakdown(theory_memory(theory_input(T, n, p, s, sigma), g));
        },
        py::arg("T"), py::arg("n"), py::arg("p"), py::arg("s"), py::arg("sigma"), py::arg("geometry"));
    m.def(
        "theory_generalization",
        [](int T, int n, int p, int s, double sigma, const TaskGeometry& g) {
            return breakdown(theory_generalization(theory_input(T, n, p, s, sigma), g));
        },
        py::arg("T"), py::arg("n"), py::arg("p"), py::arg("s"), py::arg("sigma"), py::arg("geometry"));
    m.def(
        "theory_two_task",
        [](int n, int p, int s, double sigma, double n1, double n2, double d) {
            const auto t = theory_two_task(n, p, s, sigma, n1, n2, d);
            return py::make_tuple(t.adaptation, t.memory, t.generalization);
        },
        py::arg("n"), py::arg("p"), py::arg("s"), py::arg("sigma"), py::arg("sq_norm1"),
        py::arg("sq_norm2"), py::arg("sq_dist"));
    m.def(
        "find_adaptation_turning_point",
        [](int T, int n, int p, double sigma, const TaskGeometry& g) {
            return extremum(find_adaptation_turning_point(T, n, p, sigma, g));
        },
        py::arg("T"), py::arg("n"), py::arg("p"), py::arg("sigma"), py::arg("geometry"));
    m.def(
        "find_memory_floor",
        [](int n, int p, double sigma, double n1, double n2, double d) {
            return extremum(find_memory_floor(n, p, sigma, n1, n2, d));
        },
        py::arg("n"), py::arg("p"), py::arg("sigma"), py::arg("sq_norm1"), py::arg("sq_norm2"),
        py::arg("sq_dist"));

    m.def(
        "run_replications",
        [](const SequenceConfig& c, int reps, std::uint64_t seed, int threads) {
            std::vector<AggregateRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_replications(experiment(c, reps, seed), {threads});
            }
            return rows_to_list(rows);
        },
        py::arg("config"), py::arg("reps"), py::arg("seed") = 0, py::arg("threads") = 1);
    m.def(
        "run_sweep",
        [](const SequenceConfig& c, const std::string& axis, const std::vector<double>& values, int reps,
           std::uint64_t seed, int threads) {
            SweepSpec spec{experiment(c, reps, seed), parse_sweep_axis(axis), values};
            std::vector<AggregateRow> rows;
            {
                py::gil_scoped_release release;
                rows = run_sweep(spec, {threads});
            }
            return rows_to_list(rows);
        },
        py::arg("config"), py::arg("axis"), py::arg("values"), py::arg("reps"), py::arg("seed") = 0,
        py::arg("threads") = 1);
}
