#include "blockdyn/cli.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <thread>

#include <CLI11.hpp>
#include <json.hpp>

#include "blockdyn/experiments.hpp"
#include "blockdyn/lemma_lab.hpp"
#include "blockdyn/spectral.hpp"
#include "blockdyn/version.hpp"

namespace blockdyn::cli {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string timestamp_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y%m%d-%H%M%S", &tm);
    return buf;
}

std::string iso_now() {
    const auto now = std::chrono::system_clock::now();
    const std::time_t tt = std::chrono::system_clock::to_time_t(now);
    std::tm tm{};
    gmtime_r(&tt, &tm);
    char buf[40];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

lin::Vector parse_point(const std::string& text, std::size_t expected_dim) {
    lin::Vector v;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        std::size_t used = 0;
        v.push_back(std::stod(item, &used));
    }
    if (v.size() != expected_dim)
        throw std::invalid_argument("point '" + text + "' has " + std::to_string(v.size()) +
                                    " components, expected " + std::to_string(expected_dim));
    return v;
}

struct OutputDir {
    fs::path path;

    explicit OutputDir(std::string requested) {
        path = requested.empty() ? fs::path("runs") / timestamp_now() : fs::path(requested);
        fs::create_directories(path);
    }

    void write(const std::string& name, const std::string& content) const {
        std::ofstream out(path / name, std::ios::binary);
        out << content;
        if (!out) throw std::runtime_error("failed to write " + (path / name).string());
    }
};

void write_manifest(const OutputDir& dir, const std::string& command, const json& config,
                    const std::vector<std::string>& argv) {
    json j;
    j["command"] = command;
    j["version"] = kVersion;
    j["timestamp"] = iso_now();
    j["config"] = config;
    j["argv"] = argv;
    dir.write("manifest.json", j.dump(2));
}

struct FunctionChoice {
    std::string benchmark_id;
    std::string spec_path;

    obj::BenchmarkFunction resolve() const {
        if (!spec_path.empty()) return load_function_spec(spec_path);
        return obj::benchmark_by_id(benchmark_id);
    }
};

std::vector<obj::BregmanGenerator> make_generators(const obj::BlockPartition& part,
                                                   const std::string& kind, double mu) {
    std::vector<obj::BregmanGenerator> gens;
    for (std::size_t s = 0; s < part.block_count(); ++s) {
        if (kind == "sqnorm")
            gens.push_back(obj::squared_norm_generator(part.size(s), mu));
        else if (kind == "logcosh")
            gens.push_back(obj::log_cosh_generator(part.size(s)));
        else
            throw std::invalid_argument("unknown generator kind: " + kind);
    }
    return gens;
}

std::string trace_to_csv(const sol::IterateTrace& trace) {
    std::ostringstream os;
    os.precision(17);
    const std::size_t n = trace.iterates.front().size();
    os << "iteration,f,grad_norm";
    for (std::size_t d = 0; d < n; ++d) os << ",x_" << d;
    os << "\n";
    for (std::size_t k = 0; k < trace.iterates.size(); ++k) {
        os << k << ',' << trace.values[k] << ',' << trace.gradient_norms[k];
        for (double v : trace.iterates[k]) os << ',' << v;
        os << "\n";
    }
    return os.str();
}

std::string inner_trace_to_csv(const sol::IterateTrace& trace) {
    std::ostringstream os;
    os.precision(17);
    const std::size_t n = trace.iterates.front().size();
    os << "iteration,block";
    for (std::size_t d = 0; d < n; ++d) os << ",x_" << d;
    os << "\n";
    for (std::size_t k = 0; k < trace.inner.size(); ++k) {
        for (std::size_t s = 0; s < trace.inner[k].size(); ++s) {
            os << k << ',' << (s + 1);
            for (double v : trace.inner[k][s]) os << ',' << v;
            os << "\n";
        }
    }
    return os.str();
}

}  // namespace

obj::BenchmarkFunction parse_function_spec(const std::string& json_text) {
    const json j = json::parse(json_text);
    const std::string name = j.at("name").get<std::string>();
    const auto& body = j.at("body");
    const std::string kind = body.at("kind").get<std::string>();

    if (kind == "builtin") {
        auto base = obj::benchmark_by_id(body.at("id").get<std::string>());
        base.id = name;
        if (j.contains("partition"))
            base.partition = obj::BlockPartition(j["partition"].get<std::vector<std::size_t>>());
        return base;
    }
    if (kind != "polynomial")
        throw std::invalid_argument("function spec: body.kind must be builtin or polynomial");

    const std::size_t dim = j.at("dimension").get<std::size_t>();
    std::vector<obj::PolynomialTerm> terms;
    for (const auto& t : body.at("terms")) {
        obj::PolynomialTerm term;
        term.coeff = t.at("coeff").get<double>();
        term.exponents = t.at("exponents").get<std::vector<unsigned>>();
        terms.push_back(std::move(term));
    }
    std::optional<obj::Box> box;
    if (j.contains("box"))
        box = obj::Box{j["box"].at("lo").get<lin::Vector>(),
                       j["box"].at("hi").get<lin::Vector>()};
    auto objective =
        obj::polynomial_objective(dim, std::move(terms), j.at("lipschitz").get<double>(), box);

    obj::BlockPartition part(j.at("partition").get<std::vector<std::size_t>>());
    if (part.dimension() != dim)
        throw std::invalid_argument("function spec: partition does not sum to dimension");
    obj::Box sampling = box ? *box : obj::Box{lin::Vector(dim, -2.0), lin::Vector(dim, 2.0)};
    return obj::BenchmarkFunction{name, std::move(objective), std::move(part),
                                  std::move(sampling), {}, true};
}

obj::BenchmarkFunction load_function_spec(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::invalid_argument("cannot open function spec: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return parse_function_spec(ss.str());
}

namespace {

int cmd_solve(const FunctionChoice& fn, const std::string& method_name, double alpha,
              const std::string& x0_text, double tol, std::size_t max_iters,
              const std::string& generator, double mu, bool inner_trace,
              const std::string& out, const std::vector<std::string>& argv) {
    const auto benchmark = fn.resolve();
    const auto method = sol::method_from_string(method_name);

    sol::SolverConfig cfg;
    cfg.method = method;
    cfg.alpha = alpha;
    cfg.max_iterations = max_iters;
    cfg.grad_tolerance = tol;
    cfg.record_inner = inner_trace;
    if (method == sol::Method::Bmd)
        cfg.generators = make_generators(benchmark.partition, generator, mu);

    const auto check = sol::validate_step_size(cfg, benchmark.objective);
    if (!check.valid) {
        std::cerr << "error: alpha=" << alpha << " violates the step-size bound "
                  << check.bound << " for " << method_name << "\n";
        return 2;
    }

    const auto x0 = parse_point(x0_text, benchmark.objective.dimension);
    const auto trace = sol::run(benchmark.objective, benchmark.partition, cfg, x0);

    OutputDir dir(out);
    json config{{"benchmark", benchmark.id}, {"method", method_name},  {"alpha", alpha},
                {"x0", x0},                  {"tol", tol},             {"maxIters", max_iters},
                {"generator", generator},    {"mu", mu},               {"innerTrace", inner_trace}};
    write_manifest(dir, "solve", config, argv);
    dir.write("trace.csv", trace_to_csv(trace));
    if (inner_trace) dir.write("inner_trace.csv", inner_trace_to_csv(trace));

    std::cout << "terminated: " << sol::to_string(trace.reason) << " after "
              << trace.iterations() << " iterations at " << lin::to_string(trace.terminal())
              << " with |grad f| = " << trace.gradient_norms.back() << "\n"
              << "outputs in " << dir.path.string() << "\n";
    return 0;
}

int cmd_spectrum(const FunctionChoice& fn, const std::string& method_name, double alpha,
                 const std::string& at_text, const std::string& generator, double mu,
                 const std::string& out, const std::vector<std::string>& argv) {
    const auto benchmark = fn.resolve();
    const auto method = sol::method_from_string(method_name);

    sol::SolverConfig scfg;
    scfg.method = method;
    scfg.alpha = alpha;
    std::vector<obj::BregmanGenerator> gens;
    if (method == sol::Method::Bmd) {
        gens = make_generators(benchmark.partition, generator, mu);
        scfg.generators = gens;
    }
    const auto check = sol::validate_step_size(scfg, benchmark.objective);
    if (!check.valid) {
        std::cerr << "error: alpha=" << alpha << " violates the step-size bound "
                  << check.bound << " for " << method_name << "\n";
        return 2;
    }

    const auto at = parse_point(at_text, benchmark.objective.dimension);
    const auto report =
        spectral::certify_instability(method, benchmark.objective, benchmark.partition, gens,
                                      alpha, at);
    if (report.grad_norm > report.critical_threshold)
        std::cerr << "warning: |grad f| = " << report.grad_norm
                  << " exceeds the critical-point threshold " << report.critical_threshold
                  << "; the Jacobian formulas assume a fixed point\n";

    const std::string doc = spectral::report_to_json(report);
    OutputDir dir(out);
    json config{{"benchmark", benchmark.id}, {"method", method_name}, {"alpha", alpha},
                {"at", at},                  {"generator", generator}, {"mu", mu}};
    write_manifest(dir, "spectrum", config, argv);
    dir.write("spectral_report.json", doc);
    std::cout << doc << "\n";

    // A strict saddle with an admissible step must show an unstable
    // eigenvalue; anything else falsifies the theory this tool certifies.
    if (report.strict_saddle && !report.unstable) return 1;
    return 0;
}

int cmd_verify_lemmas(std::size_t trials, std::uint64_t seed, const std::string& out,
                      const std::vector<std::string>& argv) {
    lemma_lab::SuiteConfig cfg;
    cfg.seed = seed;
    if (trials != 500) {
        // Family counts scale proportionally from their defaults, with the
        // CLI's --trials acting as the base (default 500).
        const double scale = static_cast<double>(trials) / 500.0;
        auto scaled = [&](std::size_t v) {
            return std::max<std::size_t>(1, static_cast<std::size_t>(v * scale));
        };
        cfg.rayleigh_samples = scaled(cfg.rayleigh_samples);
        cfg.real_part_instances = scaled(cfg.real_part_instances);
        cfg.omega_instances = scaled(cfg.omega_instances);
        cfg.xi_instances = scaled(cfg.xi_instances);
        cfg.multiplicity_instances = scaled(cfg.multiplicity_instances);
        cfg.homotopy_scans = scaled(cfg.homotopy_scans);
    }

    const auto result = lemma_lab::run_suite(cfg);
    const std::string doc = lemma_lab::suite_to_json(result);
    OutputDir dir(out);
    write_manifest(dir, "verify-lemmas", json{{"trials", trials}, {"seed", seed}}, argv);
    dir.write("lemmas.json", doc);
    std::cout << doc << "\n";
    return result.all_passed() ? 0 : 1;
}

int cmd_montecarlo(const std::string& benchmark_id, const std::string& method_name,
                   double alpha, std::size_t trials, std::uint64_t seed,
                   std::size_t max_iters, double tol, std::size_t threads,
                   const std::string& out, const std::vector<std::string>& argv) {
    mc::CampaignConfig cfg;
    cfg.benchmark_id = benchmark_id;
    cfg.method = sol::method_from_string(method_name);
    cfg.alpha = alpha;
    cfg.trials = trials;
    cfg.master_seed = seed;
    cfg.max_iterations = max_iters;
    cfg.grad_tolerance = tol;
    cfg.threads = threads;

    const auto result = mc::run_campaign(cfg);
    OutputDir dir(out);
    json config{{"benchmark", benchmark_id}, {"method", method_name},
                {"alpha", alpha},            {"trials", trials},
                {"seed", seed},              {"maxIters", max_iters},
                {"tol", tol},                {"threads", threads}};
    write_manifest(dir, "montecarlo", config, argv);
    dir.write("trials.csv", mc::campaign_to_csv(result));
    const std::string summary = mc::campaign_summary_json(result);
    dir.write("summary.json", summary);
    std::cout << summary << "\n";

    // Random initialization converging to a strict saddle falsifies the
    // almost-sure avoidance claims: fail loudly.
    return result.count(mc::Classification::StrictSaddle) == 0 ? 0 : 1;
}

int cmd_probe(const std::string& benchmark_id, const std::string& method_name, double alpha,
              const std::string& out, const std::vector<std::string>& argv) {
    const auto benchmark = obj::benchmark_by_id(benchmark_id);
    const auto method = sol::method_from_string(method_name);

    sol::SolverConfig scfg;
    scfg.method = method;
    scfg.alpha = alpha;
    if (method == sol::Method::Bmd)
        scfg.generators = make_generators(benchmark.partition, "sqnorm", 1.0);
    const auto check = sol::validate_step_size(scfg, benchmark.objective);
    if (!check.valid) {
        std::cerr << "error: alpha=" << alpha << " violates the step-size bound "
                  << check.bound << " for " << method_name << "\n";
        return 2;
    }

    const auto record = mc::stable_set_probe(benchmark, method, alpha);
    const std::string doc = mc::probe_to_json(record);
    OutputDir dir(out);
    write_manifest(dir, "probe",
                   json{{"benchmark", benchmark_id}, {"method", method_name}, {"alpha", alpha}},
                   argv);
    dir.write("probe.json", doc);
    std::cout << doc << "\n";
    return record.passed ? 0 : 1;
}

}  // namespace

int dispatch(int argc, const char* const* argv) {
    std::vector<std::string> args;
    for (int i = 0; i < argc; ++i) args.emplace_back(argv[i]);
    return dispatch(args);
}

int dispatch(const std::vector<std::string>& args) {
    CLI::App app{"block-coordinate descent methods, their iteration-map spectra, and "
                 "randomized checks of the saddle-avoidance machinery"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    std::string benchmark = "quad-offdiag";
    std::string spec_path;
    std::string method = "bcgd";
    double alpha = 0.1;
    std::string x0_text;
    std::string at_text;
    double tol = 1e-10;
    std::size_t max_iters = 100000;
    std::string generator = "sqnorm";
    double mu = 1.0;
    bool inner_trace = false;
    std::string out;
    std::uint64_t seed = 0;
    std::size_t trials = 500;
    std::size_t mc_trials = 1000;
    double mc_tol = 1e-9;
    std::size_t mc_max_iters = 200000;
    std::size_t threads = std::max(1u, std::thread::hardware_concurrency());

    auto add_function_opts = [&](CLI::App* sub) {
        sub->add_option("--benchmark", benchmark, "built-in benchmark id");
        sub->add_option("--function-spec", spec_path, "external function spec (JSON)");
        sub->add_option("--method", method, "bcgd | bmd | pbcd")->required();
        sub->add_option("--alpha", alpha, "step size")->required();
        sub->add_option("--out", out, "output directory (default runs/<timestamp>)");
    };

    auto* solve = app.add_subcommand("solve", "run one trajectory and export its trace");
    add_function_opts(solve);
    solve->add_option("--x0", x0_text, "initial point, comma separated")->required();
    solve->add_option("--tol", tol, "gradient-norm stopping tolerance");
    solve->add_option("--max-iters", max_iters, "outer iteration cap");
    solve->add_option("--generator", generator, "bmd generator: sqnorm | logcosh");
    solve->add_option("--mu", mu, "strong convexity of the sqnorm generator");
    solve->add_flag("--inner-trace", inner_trace, "also export every inner sweep point");

    auto* spectrum =
        app.add_subcommand("spectrum", "certify (in)stability of a critical point");
    add_function_opts(spectrum);
    spectrum->add_option("--at", at_text, "critical point, comma separated")->required();
    spectrum->add_option("--generator", generator, "bmd generator: sqnorm | logcosh");
    spectrum->add_option("--mu", mu, "strong convexity of the sqnorm generator");

    auto* lemmas = app.add_subcommand("verify-lemmas", "run the randomized lemma suite");
    lemmas->add_option("--trials", trials, "base instance count (default 500)")
        ->check(CLI::PositiveNumber);
    lemmas->add_option("--seed", seed, "suite seed");
    lemmas->add_option("--out", out, "output directory");
    lemmas->add_option("--threads", threads, "accepted for symmetry; suite runs serially");

    auto* montecarlo =
        app.add_subcommand("montecarlo", "random-initialization campaign with classification");
    montecarlo->add_option("--benchmark", benchmark, "built-in benchmark id")->required();
    montecarlo->add_option("--method", method, "bcgd | bmd | pbcd")->required();
    montecarlo->add_option("--alpha", alpha, "step size")->required();
    montecarlo->add_option("--trials", mc_trials, "number of trials")
        ->check(CLI::PositiveNumber);
    montecarlo->add_option("--seed", seed, "master seed");
    montecarlo->add_option("--max-iters", mc_max_iters, "per-trial iteration cap");
    montecarlo->add_option("--tol", mc_tol, "per-trial gradient tolerance");
    montecarlo->add_option("--threads", threads, "worker threads");
    montecarlo->add_option("--out", out, "output directory");

    auto* probe = app.add_subcommand("probe", "stable-set demonstration on quartic-sep");
    probe->add_option("--benchmark", benchmark, "benchmark with a known invariant set");
    probe->add_option("--method", method, "bcgd | bmd | pbcd")->required();
    probe->add_option("--alpha", alpha, "step size")->required();
    probe->add_option("--out", out, "output directory");

    std::vector<const char*> argv;
    argv.reserve(args.size());
    for (const auto& a : args) argv.push_back(a.c_str());

    try {
        app.parse(static_cast<int>(argv.size()), argv.data());
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    }

    const FunctionChoice fn{benchmark, spec_path};
    try {
        if (solve->parsed())
            return cmd_solve(fn, method, alpha, x0_text, tol, max_iters, generator, mu,
                             inner_trace, out, args);
        if (spectrum->parsed())
            return cmd_spectrum(fn, method, alpha, at_text, generator, mu, out, args);
        if (lemmas->parsed()) return cmd_verify_lemmas(trials, seed, out, args);
        if (montecarlo->parsed())
            return cmd_montecarlo(benchmark, method, alpha, mc_trials, seed, mc_max_iters,
                                  mc_tol, threads, out, args);
        if (probe->parsed()) return cmd_probe(benchmark, method, alpha, out, args);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 2;
}

}  // namespace blockdyn::cli
