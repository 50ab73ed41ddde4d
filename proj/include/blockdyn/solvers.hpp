#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "blockdyn/objective.hpp"

namespace blockdyn::sol {

enum class Method { Bcgd, Bmd, Pbcd };

Method method_from_string(const std::string& s);
std::string to_string(Method m);

struct SolverError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct SolverConfig {
    Method method = Method::Bcgd;
    double alpha = 0.0;
    std::size_t max_iterations = 100000;
    double grad_tolerance = 1e-10;
    std::vector<obj::BregmanGenerator> generators;  // BMD only, one per block
    double inner_tolerance = 1e-12;                 // PBCD subproblem residual
    std::size_t max_inner_iterations = 50;
    bool record_inner = false;
};

/// Step-size admissibility: alpha < 1/L for BCGD and PBCD, alpha < mu/L for
/// BMD with mu = min_t mu_t. The bound itself is excluded.
struct StepSizeCheck {
    bool valid = false;
    double bound = 0.0;
};

StepSizeCheck validate_step_size(const SolverConfig& cfg, const obj::Objective& obj);

enum class StopReason { Tolerance, MaxIterations, EscapedDomain, StepSizeInvalid };

std::string to_string(StopReason r);

struct IterateTrace {
    std::vector<lin::Vector> iterates;  // outer iterates x_0..x_K
    std::vector<double> values;         // f at each outer iterate
    std::vector<double> gradient_norms;
    // inner[k][s] = x_k^{s+1}; filled only when record_inner is set.
    std::vector<std::vector<lin::Vector>> inner;
    StopReason reason = StopReason::MaxIterations;

    const lin::Vector& terminal() const { return iterates.back(); }
    std::size_t iterations() const { return iterates.size() - 1; }
};

/// One full sweep; inner_points holds x_k^1..x_k^p. If a point leaves the
/// objective's domain box, `escaped` is set and `next` is the offending
/// point (no further blocks are updated). Blocks other than the active one
/// are copied bit-identically.
struct SweepResult {
    lin::Vector next;
    std::vector<lin::Vector> inner_points;
    bool escaped = false;
};

SweepResult bcgd_sweep(const obj::Objective& obj, const obj::BlockPartition& part,
                       double alpha, const lin::Vector& x);

SweepResult bmd_sweep(const obj::Objective& obj, const obj::BlockPartition& part,
                      const std::vector<obj::BregmanGenerator>& generators, double alpha,
                      const lin::Vector& x);

struct InnerSolveConfig {
    double tolerance = 1e-12;
    std::size_t max_iterations = 50;
};

/// Block s of `next` minimizes f(..., xi, ...) + ||xi - x(s)||^2 / (2 alpha).
/// Quadratic objectives use the closed-form normal equations; otherwise a
/// Newton iteration with step halving runs on the strongly convex
/// subproblem. Throws SolverError on inner non-convergence.
SweepResult pbcd_sweep(const obj::Objective& obj, const obj::BlockPartition& part,
                       double alpha, const lin::Vector& x, const InnerSolveConfig& inner);

/// Outer loop: sweeps until the gradient tolerance is met, the iteration cap
/// is hit, or the domain box is left. An inadmissible alpha yields a trace
/// with reason StepSizeInvalid rather than an exception.
IterateTrace run(const obj::Objective& obj, const obj::BlockPartition& part,
                 const SolverConfig& cfg, const lin::Vector& x0);

}  // namespace blockdyn::sol
