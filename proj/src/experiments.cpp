#include "blockdyn/experiments.hpp"

#include <atomic>
#include <cmath>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "blockdyn/eigen.hpp"
#include "blockdyn/rng.hpp"

namespace blockdyn::mc {

using lin::Vector;
using obj::BenchmarkFunction;

std::string to_string(Classification c) {
    switch (c) {
        case Classification::LocalMin: return "local-min";
        case Classification::StrictSaddle: return "strict-saddle";
        case Classification::Degenerate: return "degenerate";
        case Classification::NonConverged: return "non-converged";
        case Classification::EscapedDomain: return "escaped-domain";
    }
    return "?";
}

Classification classify_limit(const obj::Objective& objective, const Vector& x,
                              double grad_tol) {
    // Written so that a NaN/inf gradient norm (diverged trajectory) lands in
    // non-converged instead of falling through to the curvature test.
    const double grad_norm = lin::norm2(objective.gradient(x));
    if (!(grad_norm <= grad_tol)) return Classification::NonConverged;
    const auto spectrum = eig::symmetric_eigen(objective.hessian(x));
    const double lambda_min = spectrum.values.front();
    if (lambda_min < -1e-6) return Classification::StrictSaddle;
    if (lambda_min > 1e-6) return Classification::LocalMin;
    return Classification::Degenerate;
}

std::size_t CampaignResult::count(Classification c) const {
    const auto it = counts.find(c);
    return it == counts.end() ? 0 : it->second;
}

namespace {

std::optional<std::size_t> match_critical_point(const BenchmarkFunction& benchmark,
                                                const Vector& x, double tol) {
    std::optional<std::size_t> best;
    double best_dist = tol;
    for (std::size_t i = 0; i < benchmark.critical_points.size(); ++i) {
        const double d = lin::norm2(lin::sub(x, benchmark.critical_points[i].location));
        if (d <= best_dist) {
            best_dist = d;
            best = i;
        }
    }
    return best;
}

sol::SolverConfig solver_config_for(const BenchmarkFunction& benchmark,
                                    const CampaignConfig& cfg) {
    sol::SolverConfig scfg;
    scfg.method = cfg.method;
    scfg.alpha = cfg.alpha;
    scfg.max_iterations = cfg.max_iterations;
    scfg.grad_tolerance = cfg.grad_tolerance;
    if (cfg.method == sol::Method::Bmd)
        for (std::size_t s = 0; s < benchmark.partition.block_count(); ++s)
            scfg.generators.push_back(
                obj::squared_norm_generator(benchmark.partition.size(s), 1.0));
    return scfg;
}

}  // namespace

CampaignResult run_campaign(const CampaignConfig& cfg) {
    if (cfg.trials == 0) throw std::invalid_argument("run_campaign: need at least one trial");
    const BenchmarkFunction benchmark = obj::benchmark_by_id(cfg.benchmark_id);
    const sol::SolverConfig scfg = solver_config_for(benchmark, cfg);
    const auto check = sol::validate_step_size(scfg, benchmark.objective);
    if (!check.valid)
        throw std::invalid_argument("run_campaign: alpha violates the step-size bound " +
                                    std::to_string(check.bound));

    CampaignResult result;
    result.config = cfg;
    result.records.resize(cfg.trials);

    const std::size_t n = benchmark.objective.dimension;
    auto run_trial = [&](std::size_t i) {
        TrialRecord rec;
        rec.index = i;
        rec.seed = rng::derive_seed(cfg.master_seed, i);
        rng::Engine engine(rec.seed);
        rec.x0.resize(n);
        for (std::size_t d = 0; d < n; ++d)
            rec.x0[d] = engine.uniform(benchmark.sampling_box.lo[d],
                                       benchmark.sampling_box.hi[d]);

        try {
            const auto trace = sol::run(benchmark.objective, benchmark.partition, scfg, rec.x0);
            rec.iterations = trace.iterations();
            rec.terminal = trace.terminal();
            rec.terminal_grad_norm = trace.gradient_norms.back();
            if (trace.reason == sol::StopReason::EscapedDomain)
                rec.classification = Classification::EscapedDomain;
            else
                rec.classification =
                    classify_limit(benchmark.objective, rec.terminal, cfg.grad_tolerance);
        } catch (const std::exception& e) {
            rec.error = e.what();
            rec.terminal = rec.x0;
            rec.classification = Classification::NonConverged;
        }
        if (rec.classification != Classification::EscapedDomain)
            rec.matched_point =
                match_critical_point(benchmark, rec.terminal, cfg.match_tolerance);
        result.records[i] = std::move(rec);
    };

    const std::size_t threads = std::max<std::size_t>(1, cfg.threads);
    if (threads == 1 || cfg.trials < 2 * threads) {
        for (std::size_t i = 0; i < cfg.trials; ++i) run_trial(i);
    } else {
        std::vector<std::thread> pool;
        std::atomic<std::size_t> cursor{0};
        for (std::size_t t = 0; t < threads; ++t)
            pool.emplace_back([&]() {
                for (std::size_t i = cursor.fetch_add(1); i < cfg.trials;
                     i = cursor.fetch_add(1))
                    run_trial(i);
            });
        for (auto& th : pool) th.join();
    }

    // Order-independent reduction over the (index-ordered) records.
    for (const auto& rec : result.records) {
        ++result.counts[rec.classification];
        if (rec.matched_point) ++result.matched_counts[*rec.matched_point];
        if (!rec.error.empty()) ++result.errors;
    }
    return result;
}

namespace {

std::string csv_escape(const std::string& field) {
    if (field.find_first_of(",\"\n") == std::string::npos) return field;
    std::string quoted = "\"";
    for (char c : field) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    quoted += '"';
    return quoted;
}

std::string fmt(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

}  // namespace

std::string campaign_to_csv(const CampaignResult& result) {
    const std::size_t n = result.records.empty() ? 0 : result.records.front().x0.size();
    std::ostringstream os;
    os << "trial,seed,classification,iterations,terminal_grad_norm";
    for (std::size_t d = 0; d < n; ++d) os << ",x0_" << d;
    for (std::size_t d = 0; d < n; ++d) os << ",terminal_" << d;
    os << ",matched_point,error\n";
    for (const auto& rec : result.records) {
        os << rec.index << ',' << rec.seed << ',' << to_string(rec.classification) << ','
           << rec.iterations << ',' << fmt(rec.terminal_grad_norm);
        for (double v : rec.x0) os << ',' << fmt(v);
        for (double v : rec.terminal) os << ',' << fmt(v);
        os << ',';
        if (rec.matched_point) os << *rec.matched_point;
        os << ',' << csv_escape(rec.error) << '\n';
    }
    return os.str();
}

std::string campaign_summary_json(const CampaignResult& result) {
    nlohmann::json j;
    j["benchmark"] = result.config.benchmark_id;
    j["method"] = sol::to_string(result.config.method);
    j["alpha"] = result.config.alpha;
    j["trials"] = result.config.trials;
    j["masterSeed"] = result.config.master_seed;
    j["maxIterations"] = result.config.max_iterations;
    j["gradTolerance"] = result.config.grad_tolerance;
    nlohmann::json counts = nlohmann::json::object();
    for (const auto& [cls, count] : result.counts) counts[to_string(cls)] = count;
    j["counts"] = counts;
    nlohmann::json matched = nlohmann::json::object();
    const auto benchmark = obj::benchmark_by_id(result.config.benchmark_id);
    for (const auto& [idx, count] : result.matched_counts) {
        nlohmann::json entry;
        entry["location"] = benchmark.critical_points[idx].location;
        entry["kind"] = obj::to_string(benchmark.critical_points[idx].kind);
        entry["trials"] = count;
        matched[std::to_string(idx)] = entry;
    }
    j["matchedCriticalPoints"] = matched;
    j["errors"] = result.errors;
    return j.dump(2);
}

ProbeRecord stable_set_probe(const BenchmarkFunction& benchmark, sol::Method method,
                             double alpha) {
    if (benchmark.id != "quartic-sep")
        throw std::invalid_argument(
            "stable_set_probe: no analytically invariant set is known for " + benchmark.id);

    sol::SolverConfig scfg;
    scfg.method = method;
    scfg.alpha = alpha;
    scfg.max_iterations = 200000;
    scfg.grad_tolerance = 1e-9;
    if (method == sol::Method::Bmd)
        for (std::size_t s = 0; s < benchmark.partition.block_count(); ++s)
            scfg.generators.push_back(
                obj::squared_norm_generator(benchmark.partition.size(s), 1.0));

    ProbeRecord rec;
    rec.method = method;
    rec.alpha = alpha;
    // Separability makes the x1 = 0 axis invariant for all three sweeps.
    rec.on_axis_start = {0.0, 0.7};
    rec.perturbed_start = {1e-9, 0.7};

    const auto on_axis = sol::run(benchmark.objective, benchmark.partition, scfg,
                                  rec.on_axis_start);
    rec.on_axis_terminal = on_axis.terminal();
    rec.on_axis_class = classify_limit(benchmark.objective, rec.on_axis_terminal,
                                       scfg.grad_tolerance);

    const auto perturbed = sol::run(benchmark.objective, benchmark.partition, scfg,
                                    rec.perturbed_start);
    rec.perturbed_terminal = perturbed.terminal();
    rec.perturbed_class = classify_limit(benchmark.objective, rec.perturbed_terminal,
                                         scfg.grad_tolerance);

    const bool saddle_hit = rec.on_axis_class == Classification::StrictSaddle &&
                            lin::norm2(rec.on_axis_terminal) < 1e-3;
    const double dist_min =
        std::min(lin::norm2(lin::sub(rec.perturbed_terminal, Vector{1.0, 0.0})),
                 lin::norm2(lin::sub(rec.perturbed_terminal, Vector{-1.0, 0.0})));
    const bool escaped_to_min =
        rec.perturbed_class == Classification::LocalMin && dist_min < 1e-3;
    rec.passed = saddle_hit && escaped_to_min;
    return rec;
}

std::string probe_to_json(const ProbeRecord& rec) {
    nlohmann::json j;
    j["method"] = sol::to_string(rec.method);
    j["alpha"] = rec.alpha;
    j["onAxis"] = {{"start", rec.on_axis_start},
                   {"terminal", rec.on_axis_terminal},
                   {"classification", to_string(rec.on_axis_class)}};
    j["perturbed"] = {{"start", rec.perturbed_start},
                      {"terminal", rec.perturbed_terminal},
                      {"classification", to_string(rec.perturbed_class)}};
    j["passed"] = rec.passed;
    return j.dump(2);
}

}  // namespace blockdyn::mc
