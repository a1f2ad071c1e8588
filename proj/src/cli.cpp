#include "clsim/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "clsim/errors.hpp"
#include "clsim/io.hpp"
#include "clsim/montecarlo.hpp"
#include "clsim/theory.hpp"
#include "clsim/verify.hpp"

namespace clsim::cli {

namespace {

using json = nlohmann::ordered_json;

// Raw command-line values; only options actually given override the
// config file and the defaults.
struct Flags {
    int tasks = 0;
    int samples = 0;
    int dimension = 0;
    int rehearsal = 0;
    double sigma = 0.0;
    std::string mode;
    double theta = 0.0;
    std::string buffer;
    std::string first_task;
    int reps = 0;
    std::uint64_t seed = 0;
    std::string axis;
    std::string range;
    std::string values;
    std::string out;
    bool plot = false;
    int threads = 0;
    std::string suite = "quick";
    std::string config;
    bool allow_boundary = false;
    std::string mutation = "none";
};

json defaults() {
    return json{{"T", 2},           {"n", 20},
                {"p", 60},          {"s", 10},
                {"sigma", 0.0},     {"mode", "identical"},
                {"theta", 0.0},     {"buffer", "iid-fresh"},
                {"first-task", "padded"}, {"reps", 50},
                {"seed", 0},        {"allow-boundary", false}};
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string field;
    std::istringstream in(s);
    while (std::getline(in, field, sep)) out.push_back(trim(field));
    return out;
}

json number_list(const std::string& text) {
    json arr = json::array();
    for (const auto& f : split(text, ',')) {
        if (!f.empty()) arr.push_back(parse_double(f));
    }
    return arr;
}

// Line-based key=value text. Numbers become numbers; norms are a comma
// list and distances are rows separated by ';'.
json parse_key_values(std::istream& in) {
    json cfg = json::object();
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos) {
            throw ValidationError("config line " + std::to_string(lineno) + ": expected key=value");
        }
        const std::string key = trim(line.substr(0, eq));
        const std::string value = trim(line.substr(eq + 1));
        if (key == "sq_norms") {
            cfg[key] = number_list(value);
        } else if (key == "sq_dists") {
            json rows = json::array();
            for (const auto& row : split(value, ';')) rows.push_back(number_list(row));
            cfg[key] = rows;
        } else if (value == "true" || value == "false") {
            cfg[key] = value == "true";
        } else {
            try {
                const double d = parse_double(value);
                const bool integral = value.find_first_of(".eEn") == std::string::npos &&
                                      std::abs(d) < 9.0e15;
                if (integral) {
                    cfg[key] = static_cast<std::int64_t>(d);
                } else {
                    cfg[key] = d;
                }
            } catch (const ValidationError&) {
                cfg[key] = value;
            }
        }
    }
    return cfg;
}

json read_config_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open config file '" + path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    const std::string text = buf.str();
    const auto first = text.find_first_not_of(" \t\r\n");
    json cfg;
    if (first != std::string::npos && text[first] == '{') {
        try {
            cfg = json::parse(text);
        } catch (const json::parse_error& e) {
            throw ValidationError("config file '" + path + "' is not valid JSON: " + e.what());
        }
    } else {
        std::istringstream lines(text);
        cfg = parse_key_values(lines);
    }
    if (cfg.contains("theta_degrees") && !cfg.contains("theta")) cfg["theta"] = cfg["theta_degrees"];
    if (cfg.contains("first_task") && !cfg.contains("first-task")) cfg["first-task"] = cfg["first_task"];
    return cfg;
}

int integer_of(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_number()) throw ValidationError(std::string(key) + " must be a number");
    const double d = v.get<double>();
    if (std::abs(d - std::round(d)) > 1e-9 || std::abs(d) > 2e9) {
        throw ValidationError(std::string(key) + " must be an integer");
    }
    return static_cast<int>(std::llround(d));
}

double real_of(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_number()) throw ValidationError(std::string(key) + " must be a number");
    return v.get<double>();
}

std::string text_of(const json& cfg, const char* key) {
    const json& v = cfg.at(key);
    if (!v.is_string()) throw ValidationError(std::string(key) + " must be a string");
    return v.get<std::string>();
}

GeometrySpec geometry_spec(const json& cfg) {
    GeometrySpec g;
    g.mode = parse_geometry_mode(text_of(cfg, "mode"));
    g.theta_degrees = real_of(cfg, "theta");
    if (g.mode == GeometryMode::explicit_matrix) {
        if (!cfg.contains("sq_norms") || !cfg.contains("sq_dists")) {
            throw ValidationError("explicit geometry needs sq_norms and sq_dists in the config file");
        }
        const auto& norms = cfg.at("sq_norms");
        const auto& dists = cfg.at("sq_dists");
        const int t = static_cast<int>(norms.size());
        g.sq_norms.resize(t);
        g.sq_dists.resize(t, t);
        for (int i = 0; i < t; ++i) g.sq_norms(i) = norms.at(i).get<double>();
        if (static_cast<int>(dists.size()) != t) throw ValidationError("sq_dists must be T x T");
        for (int i = 0; i < t; ++i) {
            if (static_cast<int>(dists.at(i).size()) != t) throw ValidationError("sq_dists must be T x T");
            for (int j = 0; j < t; ++j) g.sq_dists(i, j) = dists.at(i).at(j).get<double>();
        }
    }
    return g;
}

ExperimentSpec experiment_of(const json& cfg) {
    ExperimentSpec spec;
    auto& c = spec.config;
    c.tasks = integer_of(cfg, "T");
    c.samples = integer_of(cfg, "n");
    c.dimension = integer_of(cfg, "p");
    c.rehearsal = integer_of(cfg, "s");
    c.sigma = real_of(cfg, "sigma");
    if (c.tasks < 1) throw ValidationError("T must be at least 1");
    spec.geometry = geometry_spec(cfg);
    c.geometry = make_geometry(spec.geometry, c.tasks);
    c.buffer_mode = parse_buffer_mode(text_of(cfg, "buffer"));
    c.first_task = parse_first_task_policy(text_of(cfg, "first-task"));
    c.allow_boundary = cfg.at("allow-boundary").get<bool>();
    spec.replications = integer_of(cfg, "reps");
    if (spec.replications < 1) throw ValidationError("reps must be at least 1");
    const json& seed = cfg.at("seed");
    if (seed.is_number_unsigned()) {
        spec.master_seed = seed.get<std::uint64_t>();
    } else if (seed.is_number_integer() && seed.get<std::int64_t>() >= 0) {
        spec.master_seed = static_cast<std::uint64_t>(seed.get<std::int64_t>());
    } else {
        const double d = real_of(cfg, "seed");
        if (d < 0.0 || d != std::floor(d) || d > 9.0e15) {
            throw ValidationError("seed must be a nonnegative integer");
        }
        spec.master_seed = static_cast<std::uint64_t>(d);
    }
    c.seed = spec.master_seed;
    validate(c);
    return spec;
}

int resolve_threads(const CLI::Option* opt, int flag_value) {
    int threads = 1;
    if (opt->count() > 0) {
        threads = flag_value;
    } else if (const char* env = std::getenv("CLSIM_THREADS"); env && *env) {
        try {
            threads = std::stoi(env);
        } catch (const std::exception&) {
            throw ValidationError(std::string("CLSIM_THREADS is not an integer: ") + env);
        }
    }
    if (threads < 1) throw ValidationError("thread count must be at least 1");
    return threads;
}

std::vector<double> sweep_values(const std::string& range, const std::string& values) {
    std::vector<double> out;
    if (!range.empty() && !values.empty()) throw ValidationError("give either --range or --values, not both");
    if (!values.empty()) {
        for (const auto& f : split(values, ',')) {
            if (!f.empty()) out.push_back(parse_double(f));
        }
        return out;
    }
    if (range.empty()) throw ValidationError("sweep needs --range start:stop:step or --values");
    const auto parts = split(range, ':');
    if (parts.size() != 3) throw ValidationError("--range must look like start:stop:step");
    const double start = parse_double(parts[0]);
    const double stop = parse_double(parts[1]);
    const double step = parse_double(parts[2]);
    if (!(step > 0.0)) throw ValidationError("--range step must be positive");
    const double slack = 1e-9 * step;
    for (long k = 0;; ++k) {
        const double v = start + static_cast<double>(k) * step;
        if (v > stop + slack) break;
        out.push_back(v);
        if (k > 10'000'000) throw ValidationError("--range produces too many values");
    }
    return out;
}

std::string utc_timestamp() {
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

json breakdown_json(const TheoryBreakdown& b) {
    json j;
    j["total"] = b.total;
    j["terms"] = json::object();
    for (const auto& [name, value] : b.terms) j["terms"][name] = value;
    if (b.u.size() > 0) {
        json u = json::array();
        for (Eigen::Index k = 0; k < b.u.rows(); ++k) {
            json row = json::array();
            for (Eigen::Index c = 0; c < b.u.cols(); ++c) row.push_back(b.u(k, c));
            u.push_back(row);
        }
        j["u"] = u;
    }
    return j;
}

json config_echo(const json& resolved, int threads) {
    json echo = resolved;
    echo["threads"] = threads;
    return echo;
}

void write_manifest(const std::string& csv_path, const std::string& command, const json& resolved,
                    int threads, std::uint64_t seed, const std::vector<std::string>& outputs,
                    const std::vector<std::string>& args, const json& extra) {
    json m;
    m["tool"] = "clsim";
    m["version"] = kVersion;
    m["timestamp"] = utc_timestamp();
    m["command"] = command;
    m["argv"] = args;
    m["master_seed"] = seed;
    m["config"] = config_echo(resolved, threads);
    m["outputs"] = outputs;
    for (const auto& [k, v] : extra.items()) m[k] = v;
    std::ofstream f(csv_path + ".manifest.json");
    if (!f) throw ValidationError("cannot write manifest next to '" + csv_path + "'");
    f << m.dump(2) << '\n';
}

void emit_csv(const std::vector<AggregateRow>& rows, const std::string& path, std::ostream& out) {
    if (path.empty()) {
        write_csv(out, rows);
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ValidationError("cannot write '" + path + "'");
    write_csv(f, rows);
}

std::string plot_stem(const std::string& csv_path) {
    std::filesystem::path p(csv_path);
    if (p.extension() == ".csv") p.replace_extension();
    return p.string();
}

TheoryMutation parse_mutation(const std::string& text) {
    if (text == "none") return TheoryMutation::none;
    if (text == "lambda") return TheoryMutation::lambda_without_rehearsal;
    if (text == "mnoise") return TheoryMutation::flipped_memory_noise;
    throw ValidationError("unknown mutation '" + text + "'");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Rehearsal-based continual linear regression: closed forms and simulation", "clsim"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kVersion);
    Flags f;

    auto* theory = app.add_subcommand("theory", "Print closed-form expectations as JSON");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo run of one configuration (CSV)");
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over one axis (CSV, optional SVG)");
    auto* verify = app.add_subcommand("verify", "Check simulation against the closed forms");

    std::map<std::string, CLI::Option*> given;
    auto add_config_flags = [&](CLI::App* cmd, bool with_run) {
        given["T"] = cmd->add_option("--T", f.tasks, "number of tasks");
        given["n"] = cmd->add_option("--n", f.samples, "samples per task");
        given["p"] = cmd->add_option("--p", f.dimension, "parameter dimension");
        given["s"] = cmd->add_option("--s", f.rehearsal, "total rehearsal samples");
        given["sigma"] = cmd->add_option("--sigma", f.sigma, "noise standard deviation");
        given["mode"] = cmd->add_option("--mode", f.mode, "identical|orthogonal|angle|explicit");
        given["theta"] = cmd->add_option("--theta", f.theta, "angle between task optima (degrees)");
        cmd->add_option("--config", f.config, "key=value or JSON config file");
        if (!with_run) return;
        given["buffer"] = cmd->add_option("--buffer", f.buffer, "subset-fixed|iid-fresh");
        given["first-task"] = cmd->add_option("--first-task", f.first_task, "plain|padded");
        given["reps"] = cmd->add_option("--reps", f.reps, "replications");
        given["seed"] = cmd->add_option("--seed", f.seed, "master seed");
        given["allow-boundary"] =
            cmd->add_flag("--allow-boundary", f.allow_boundary, "fit boundary steps instead of failing");
        cmd->add_option("--out", f.out, "output CSV path (stdout when absent)");
    };
    add_config_flags(theory, false);
    // each subcommand gets its own option objects; remember the ones that matter per command
    auto theory_given = given;
    given.clear();
    add_config_flags(simulate, true);
    auto simulate_given = given;
    given.clear();
    add_config_flags(sweep, true);
    sweep->add_option("--axis", f.axis, "p|s|sigma|theta")->required();
    sweep->add_option("--range", f.range, "start:stop:step (inclusive)");
    sweep->add_option("--values", f.values, "comma separated axis values");
    sweep->add_flag("--plot", f.plot, "write one SVG chart per metric next to --out");
    auto sweep_given = given;

    CLI::Option* simulate_threads = simulate->add_option("--threads", f.threads, "worker threads");
    CLI::Option* sweep_threads = sweep->add_option("--threads", f.threads, "worker threads");
    CLI::Option* verify_threads = verify->add_option("--threads", f.threads, "worker threads");
    verify->add_option("--suite", f.suite, "quick|full");
    verify->add_option("--mutation", f.mutation, "self-test: none|lambda|mnoise")->group("");

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return kExitOk;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << '\n';
        return kExitOk;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    }

    auto resolve = [&](const std::map<std::string, CLI::Option*>& opts) {
        json cfg = defaults();
        if (!f.config.empty()) {
            const json file = read_config_file(f.config);
            for (const auto& [k, v] : file.items()) cfg[k] = v;
        }
        auto set = [&](const char* key, auto value) {
            const auto it = opts.find(key);
            if (it != opts.end() && it->second->count() > 0) cfg[key] = value;
        };
        set("T", f.tasks);
        set("n", f.samples);
        set("p", f.dimension);
        set("s", f.rehearsal);
        set("sigma", f.sigma);
        set("mode", f.mode);
        set("theta", f.theta);
        set("buffer", f.buffer);
        set("first-task", f.first_task);
        set("reps", f.reps);
        set("seed", f.seed);
        set("allow-boundary", f.allow_boundary);
        return cfg;
    };

    try {
        if (theory->parsed()) {
            const json cfg = resolve(theory_given);
            ExperimentSpec spec = experiment_of(cfg);
            const auto& c = spec.config;
            const TheoryInput in{c.tasks, c.samples, c.dimension, c.rehearsal, c.sigma};
            json j;
            j["config"] = cfg;
            j["regime"] = std::string(to_string(classify_regime(c.dimension, c.samples, c.rehearsal)));
            j["lambda"] = contraction(c.dimension, c.samples, c.rehearsal);
            j["adaptation"] = breakdown_json(theory_adaptation(in, c.geometry));
            j["memory"] = c.tasks >= 2 ? breakdown_json(theory_memory(in, c.geometry)) : json(nullptr);
            j["generalization"] = breakdown_json(theory_generalization(in, c.geometry));
            out << j.dump(2) << '\n';
            return kExitOk;
        }

        if (simulate->parsed()) {
            const json cfg = resolve(simulate_given);
            const ExperimentSpec spec = experiment_of(cfg);
            RunOptions opts;
            opts.threads = resolve_threads(simulate_threads, f.threads);
            const auto rows = run_replications(spec, opts);
            emit_csv(rows, f.out, out);
            if (!f.out.empty()) {
                write_manifest(f.out, "simulate", cfg, opts.threads, spec.master_seed, {f.out}, args,
                               json::object());
            }
            return kExitOk;
        }

        if (sweep->parsed()) {
            const json cfg = resolve(sweep_given);
            SweepSpec spec;
            spec.base = experiment_of(cfg);
            spec.axis = parse_sweep_axis(f.axis);
            spec.values = sweep_values(f.range, f.values);
            if (spec.values.empty()) throw ValidationError("sweep range is empty");
            if (f.plot && f.out.empty()) throw ValidationError("--plot needs --out");
            RunOptions opts;
            opts.threads = resolve_threads(sweep_threads, f.threads);
            const auto rows = run_sweep(spec, opts);
            emit_csv(rows, f.out, out);

            if (!f.out.empty()) {
                std::vector<std::string> outputs{f.out};
                if (f.plot) {
                    const int last = spec.base.config.tasks;
                    for (Metric metric : {Metric::A, Metric::M, Metric::G}) {
                        if (metric == Metric::M && last < 2) continue;
                        const std::string path =
                            plot_stem(f.out) + "_" + std::string(to_string(metric)) + ".svg";
                        std::ofstream svg(path);
                        if (!svg) throw ValidationError("cannot write '" + path + "'");
                        svg << render_svg(rows, metric, last, spec.axis,
                                          std::string(to_string(metric)) + " vs " +
                                              std::string(to_string(spec.axis)));
                        outputs.push_back(path);
                    }
                }
                json skipped = json::array();
                for (const auto& r : rows) {
                    if (r.skipped) skipped.push_back({{"axis_value", *r.axis_value}, {"reason", r.reason}});
                }
                json extra;
                extra["axis"] = f.axis;
                extra["axis_values"] = spec.values;
                extra["skipped"] = skipped;
                write_manifest(f.out, "sweep", cfg, opts.threads, spec.base.master_seed, outputs, args,
                               extra);
            }
            return kExitOk;
        }

        if (verify->parsed()) {
            const VerifySuite suite = parse_verify_suite(f.suite);
            RunOptions opts;
            opts.threads = resolve_threads(verify_threads, f.threads);
            opts.mutation = parse_mutation(f.mutation);
            const VerifyReport report = run_verify(suite, opts);
            print_report(report, out);
            if (!report.passed) {
                const VerifyCell& w = report.worst();
                err << "verification failed: " << report.failures << " cells outside 3 stderr; worst is config "
                    << w.config_index << " (" << w.config << ") metric " << to_string(w.metric)
                    << " t=" << w.task << " z=" << w.z << '\n';
                return kExitVerifyFailed;
            }
            return kExitOk;
        }
    } catch (const UndefinedMetricError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const BoundaryRegimeError& e) {
        err << "error: " << e.what() << '\n';
        return kExitBoundary;
    } catch (const ReplicationError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const RankDeficiencyError& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    } catch (const nlohmann::json::exception& e) {
        err << "error: bad configuration value: " << e.what() << '\n';
        return kExitInvalid;
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return kExitInvalid;
}

}  // namespace clsim::cli
