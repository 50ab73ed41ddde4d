#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "blockdyn/objective.hpp"
#include "blockdyn/solvers.hpp"

namespace blockdyn::mc {

enum class Classification {
    LocalMin,
    StrictSaddle,
    Degenerate,
    NonConverged,
    EscapedDomain,
};

std::string to_string(Classification c);

/// Thresholded limit classification: non-converged when the gradient norm
/// exceeds grad_tol; otherwise by the sign of lambda_min(hessian) with a
/// 1e-6 dead zone mapped to degenerate.
Classification classify_limit(const obj::Objective& objective, const lin::Vector& x,
                              double grad_tol = 1e-9);

struct TrialRecord {
    std::size_t index = 0;
    std::uint64_t seed = 0;
    lin::Vector x0;
    std::size_t iterations = 0;
    lin::Vector terminal;
    double terminal_grad_norm = 0.0;
    Classification classification = Classification::NonConverged;
    std::optional<std::size_t> matched_point;  // index into the benchmark's critical list
    std::string error;                         // per-trial solver error, if any
};

struct CampaignConfig {
    std::string benchmark_id;
    sol::Method method = sol::Method::Bcgd;
    double alpha = 0.0;
    std::size_t trials = 0;
    std::uint64_t master_seed = 0;
    std::size_t max_iterations = 200000;
    double grad_tolerance = 1e-9;
    double match_tolerance = 1e-3;
    std::size_t threads = 1;  // trials are independent; sharding changes nothing
};

struct CampaignResult {
    CampaignConfig config;
    std::vector<TrialRecord> records;
    std::map<Classification, std::size_t> counts;
    std::map<std::size_t, std::size_t> matched_counts;  // critical-point index -> trials
    std::size_t errors = 0;

    std::size_t count(Classification c) const;
};

/// Runs `trials` independent runs from uniform draws over the benchmark's
/// sampling box. Per-trial seeds derive from the master seed through the
/// splitmix64 mix, so shards and replays agree bit for bit. Per-trial solver
/// errors are recorded on the trial and never abort the campaign.
CampaignResult run_campaign(const CampaignConfig& cfg);

std::string campaign_to_csv(const CampaignResult& result);
std::string campaign_summary_json(const CampaignResult& result);

struct ProbeRecord {
    sol::Method method = sol::Method::Bcgd;
    double alpha = 0.0;
    lin::Vector on_axis_start;
    lin::Vector on_axis_terminal;
    Classification on_axis_class = Classification::NonConverged;
    lin::Vector perturbed_start;
    lin::Vector perturbed_terminal;
    Classification perturbed_class = Classification::NonConverged;
    bool passed = false;
};

/// Demonstrates that the stable set of a strict saddle is nonempty but thin:
/// from a start on the analytically invariant axis the run must land on the
/// saddle, while a 1e-9 off-axis perturbation must land on a minimizer. Only
/// benchmarks with a known invariant set support this (quartic-sep).
ProbeRecord stable_set_probe(const obj::BenchmarkFunction& benchmark, sol::Method method,
                             double alpha);

std::string probe_to_json(const ProbeRecord& record);

}  // namespace blockdyn::mc
