#include "blockdyn/solvers.hpp"

#include <cmath>
#include <limits>

namespace blockdyn::sol {

using lin::Matrix;
using lin::Vector;
using obj::BlockPartition;
using obj::BregmanGenerator;
using obj::Objective;

Method method_from_string(const std::string& s) {
    if (s == "bcgd") return Method::Bcgd;
    if (s == "bmd") return Method::Bmd;
    if (s == "pbcd") return Method::Pbcd;
    throw std::invalid_argument("unknown method: " + s);
}

std::string to_string(Method m) {
    switch (m) {
        case Method::Bcgd: return "bcgd";
        case Method::Bmd: return "bmd";
        case Method::Pbcd: return "pbcd";
    }
    return "?";
}

std::string to_string(StopReason r) {
    switch (r) {
        case StopReason::Tolerance: return "tolerance";
        case StopReason::MaxIterations: return "max-iters";
        case StopReason::EscapedDomain: return "escaped-domain";
        case StopReason::StepSizeInvalid: return "step-size-invalid";
    }
    return "?";
}

StepSizeCheck validate_step_size(const SolverConfig& cfg, const Objective& obj) {
    double bound = 1.0 / obj.lipschitz;
    if (cfg.method == Method::Bmd) {
        double mu = std::numeric_limits<double>::infinity();
        for (const auto& g : cfg.generators) mu = std::min(mu, g.strong_convexity);
        if (cfg.generators.empty()) mu = 1.0;
        bound = mu / obj.lipschitz;
    }
    // The bound itself is excluded: alpha must satisfy the strict inequality.
    return {cfg.alpha > 0.0 && cfg.alpha < bound, bound};
}

SweepResult bcgd_sweep(const Objective& obj, const BlockPartition& part, double alpha,
                       const Vector& x) {
    SweepResult out;
    out.next = x;
    out.inner_points.reserve(part.block_count());
    for (std::size_t s = 0; s < part.block_count(); ++s) {
        const Vector g = obj::block_gradient(obj, part, out.next, s);
        Vector blk = part.extract(out.next, s);
        for (std::size_t i = 0; i < blk.size(); ++i) blk[i] -= alpha * g[i];
        part.place(out.next, s, blk);
        out.inner_points.push_back(out.next);
        if (!obj.in_domain(out.next)) {
            out.escaped = true;
            return out;
        }
    }
    return out;
}

SweepResult bmd_sweep(const Objective& obj, const BlockPartition& part,
                      const std::vector<BregmanGenerator>& generators, double alpha,
                      const Vector& x) {
    if (generators.size() != part.block_count())
        throw std::invalid_argument("bmd_sweep: one generator per block required");
    for (std::size_t s = 0; s < part.block_count(); ++s)
        if (generators[s].block_size != part.size(s))
            throw std::invalid_argument("bmd_sweep: generator block size mismatch");

    SweepResult out;
    out.next = x;
    out.inner_points.reserve(part.block_count());
    for (std::size_t s = 0; s < part.block_count(); ++s) {
        const Vector g = obj::block_gradient(obj, part, out.next, s);
        const Vector blk = part.extract(out.next, s);
        Vector dual = generators[s].mirror(blk);
        for (std::size_t i = 0; i < dual.size(); ++i) dual[i] -= alpha * g[i];
        part.place(out.next, s, generators[s].inverse_mirror(dual));
        out.inner_points.push_back(out.next);
        if (!obj.in_domain(out.next)) {
            out.escaped = true;
            return out;
        }
    }
    return out;
}

namespace {

// argmin over xi of f(x with block s = xi) + ||xi - x(s)||^2 / (2 alpha).
Vector proximal_block_solve(const Objective& obj, const BlockPartition& part, double alpha,
                            const Vector& x, std::size_t s, const InnerSolveConfig& inner) {
    const Vector center = part.extract(x, s);
    const std::size_t ns = center.size();

    if (obj.quadratic) {
        // grad_s f is affine in the block, so the stationarity condition is
        // (A_ss + I/alpha)(xi - c) = -grad_s f(x).
        Matrix m = obj::hessian_block(obj, part, x, s, s);
        for (std::size_t i = 0; i < ns; ++i) m(i, i) += 1.0 / alpha;
        const Vector g = obj::block_gradient(obj, part, x, s);
        const Vector delta = lin::solve(m, lin::scaled(-1.0, g));
        return lin::add(center, delta);
    }

    Vector y = x;
    Vector xi = center;
    auto subproblem_gradient = [&](const Vector& cand) {
        part.place(y, s, cand);
        Vector g = obj::block_gradient(obj, part, y, s);
        for (std::size_t i = 0; i < ns; ++i) g[i] += (cand[i] - center[i]) / alpha;
        return g;
    };

    // Damped Newton with backtracking on the residual norm; the subproblem
    // Hessian A_ss + I/alpha is positive definite for admissible alpha.
    Vector grad = subproblem_gradient(xi);
    double grad_norm = lin::norm2(grad);
    for (std::size_t it = 0; it < inner.max_iterations; ++it) {
        if (grad_norm <= inner.tolerance) return xi;

        part.place(y, s, xi);
        Matrix h = obj::hessian_block(obj, part, y, s, s);
        for (std::size_t i = 0; i < ns; ++i) h(i, i) += 1.0 / alpha;
        const Vector step = lin::solve(h, grad);

        double damping = 1.0;
        Vector cand = lin::sub(xi, step);
        Vector cand_grad = subproblem_gradient(cand);
        double cand_norm = lin::norm2(cand_grad);
        for (int half = 0; half < 60 && cand_norm > (1.0 - 0.25 * damping) * grad_norm;
             ++half) {
            damping *= 0.5;
            cand = lin::sub(xi, lin::scaled(damping, step));
            cand_grad = subproblem_gradient(cand);
            cand_norm = lin::norm2(cand_grad);
        }
        xi = std::move(cand);
        grad = std::move(cand_grad);
        grad_norm = cand_norm;
    }
    if (grad_norm <= inner.tolerance) return xi;
    throw SolverError("pbcd_sweep: inner Newton solve did not converge");
}

}  // namespace

SweepResult pbcd_sweep(const Objective& obj, const BlockPartition& part, double alpha,
                       const Vector& x, const InnerSolveConfig& inner) {
    SweepResult out;
    out.next = x;
    out.inner_points.reserve(part.block_count());
    for (std::size_t s = 0; s < part.block_count(); ++s) {
        const Vector xi = proximal_block_solve(obj, part, alpha, out.next, s, inner);
        part.place(out.next, s, xi);
        out.inner_points.push_back(out.next);
        if (!obj.in_domain(out.next)) {
            out.escaped = true;
            return out;
        }
    }
    return out;
}

IterateTrace run(const Objective& obj, const BlockPartition& part, const SolverConfig& cfg,
                 const Vector& x0) {
    if (x0.size() != obj.dimension || part.dimension() != obj.dimension)
        throw std::invalid_argument("run: dimension mismatch");
    if (cfg.max_iterations < 1 || cfg.grad_tolerance <= 0.0 || cfg.inner_tolerance <= 0.0)
        throw std::invalid_argument("run: need max_iterations >= 1 and positive tolerances");

    IterateTrace trace;
    auto record = [&](const Vector& x) {
        trace.iterates.push_back(x);
        trace.values.push_back(obj.value(x));
        trace.gradient_norms.push_back(lin::norm2(obj.gradient(x)));
    };
    record(x0);

    if (!validate_step_size(cfg, obj).valid) {
        trace.reason = StopReason::StepSizeInvalid;
        return trace;
    }
    if (!obj.in_domain(x0)) {
        trace.reason = StopReason::EscapedDomain;
        return trace;
    }

    const InnerSolveConfig inner{cfg.inner_tolerance, cfg.max_inner_iterations};
    for (std::size_t k = 0; k < cfg.max_iterations; ++k) {
        if (trace.gradient_norms.back() <= cfg.grad_tolerance) {
            trace.reason = StopReason::Tolerance;
            return trace;
        }
        SweepResult sweep;
        switch (cfg.method) {
            case Method::Bcgd:
                sweep = bcgd_sweep(obj, part, cfg.alpha, trace.iterates.back());
                break;
            case Method::Bmd:
                sweep = bmd_sweep(obj, part, cfg.generators, cfg.alpha, trace.iterates.back());
                break;
            case Method::Pbcd:
                sweep = pbcd_sweep(obj, part, cfg.alpha, trace.iterates.back(), inner);
                break;
        }
        record(sweep.next);
        if (cfg.record_inner) trace.inner.push_back(std::move(sweep.inner_points));
        if (sweep.escaped) {
            trace.reason = StopReason::EscapedDomain;
            return trace;
        }
    }
    trace.reason = trace.gradient_norms.back() <= cfg.grad_tolerance
                       ? StopReason::Tolerance
                       : StopReason::MaxIterations;
    return trace;
}

}  // namespace blockdyn::sol
