#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>

#include "blockdyn/objective.hpp"
#include "blockdyn/rng.hpp"
#include "blockdyn/solvers.hpp"

using namespace blockdyn;
using lin::Matrix;
using lin::Vector;

namespace {

obj::Objective saddle_quadratic() {
    // f = (x1^2 - x2^2) / 2, L = 1.
    return obj::quadratic_objective(Matrix{{1.0, 0.0}, {0.0, -1.0}});
}

obj::Objective offdiag_quadratic() {
    // f = x1 x2, L = 1.
    return obj::quadratic_objective(Matrix{{0.0, 1.0}, {1.0, 0.0}});
}

std::vector<obj::BregmanGenerator> sqnorm_generators(const obj::BlockPartition& part,
                                                     double mu) {
    std::vector<obj::BregmanGenerator> gens;
    for (std::size_t s = 0; s < part.block_count(); ++s)
        gens.push_back(obj::squared_norm_generator(part.size(s), mu));
    return gens;
}

}  // namespace

TEST_CASE("step-size validation enforces the strict bounds") {
    auto o = offdiag_quadratic();
    o.lipschitz = 1.0;  // pin the declared constant exactly

    sol::SolverConfig cfg;
    cfg.method = sol::Method::Bcgd;
    cfg.alpha = 0.5;
    CHECK(sol::validate_step_size(cfg, o).valid);

    cfg.alpha = 1.0;  // exactly at the bound: rejected
    const auto at_bound = sol::validate_step_size(cfg, o);
    CHECK(!at_bound.valid);
    CHECK(at_bound.bound == doctest::Approx(1.0));

    cfg.method = sol::Method::Bmd;
    cfg.generators = sqnorm_generators(obj::BlockPartition({1, 1}), 2.0);
    cfg.alpha = 1.5;
    const auto bmd_check = sol::validate_step_size(cfg, o);
    CHECK(bmd_check.valid);
    CHECK(bmd_check.bound == doctest::Approx(2.0));

    cfg.method = sol::Method::Pbcd;
    cfg.generators.clear();
    cfg.alpha = 0.99;
    CHECK(sol::validate_step_size(cfg, o).valid);
}

TEST_CASE("bcgd sweep hand examples") {
    const obj::BlockPartition part({1, 1});

    // f = (x1^2 - x2^2)/2 from (1,1): block 1 gives (0.5, 1), block 2 ascends
    // the concave coordinate to 1.5.
    const auto sweep = sol::bcgd_sweep(saddle_quadratic(), part, 0.5, {1.0, 1.0});
    CHECK(sweep.inner_points[0] == Vector{0.5, 1.0});
    CHECK(sweep.next == Vector{0.5, 1.5});

    // f = x1 x2: block 2 sees the already-updated x1.
    const auto chained = sol::bcgd_sweep(offdiag_quadratic(), part, 0.5, {1.0, 1.0});
    CHECK(chained.inner_points[0] == Vector{0.5, 1.0});
    CHECK(chained.next == Vector{0.5, 0.75});

    // A critical point is a fixed point of the full sweep.
    const auto fixed = sol::bcgd_sweep(offdiag_quadratic(), part, 0.5, {0.0, 0.0});
    CHECK(fixed.next == Vector{0.0, 0.0});
}

TEST_CASE("bmd sweep reduces to bcgd for squared-norm generators") {
    const obj::BlockPartition part({1, 1});
    const auto o = saddle_quadratic();

    // mu = 1 generators reproduce the plain gradient sweep exactly.
    const auto bmd = sol::bmd_sweep(o, part, sqnorm_generators(part, 1.0), 0.5, {1.0, 1.0});
    CHECK(bmd.next == Vector{0.5, 1.5});

    // mu = 2: BMD at alpha equals BCGD at alpha/2 for arbitrary points.
    rng::Engine rng(4);
    for (int trial = 0; trial < 25; ++trial) {
        const Vector x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto two = sol::bmd_sweep(o, part, sqnorm_generators(part, 2.0), 0.5, x);
        const auto half = sol::bcgd_sweep(o, part, 0.25, x);
        CHECK(lin::norm_inf(lin::sub(two.next, half.next)) == 0.0);
    }

    // Critical points stay fixed through the mirror round trip.
    const auto fixed = sol::bmd_sweep(o, part, sqnorm_generators(part, 1.0), 0.5, {0.0, 0.0});
    CHECK(fixed.next == Vector{0.0, 0.0});

    const std::vector<obj::BregmanGenerator> none;
    const Vector ones{1.0, 1.0};
    CHECK_THROWS_AS(sol::bmd_sweep(o, part, none, 0.5, ones), std::invalid_argument);
}

TEST_CASE("pbcd sweep hand examples") {
    const obj::BlockPartition part({1, 1});
    const sol::InnerSolveConfig inner;

    // f = x1 x2 from (1,1): x1 solves x2 + 2(x1 - 1) = 0, then x2 sees the
    // fresh x1.
    const auto sweep = sol::pbcd_sweep(offdiag_quadratic(), part, 0.5, {1.0, 1.0}, inner);
    CHECK(sweep.inner_points[0][0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sweep.next[0] == doctest::Approx(0.5).epsilon(1e-12));
    CHECK(sweep.next[1] == doctest::Approx(0.75).epsilon(1e-12));

    // f = (x1^2 - x2^2)/2: scalar normal equations (A_ss + 1/alpha) xi = c/alpha.
    const auto diag = sol::pbcd_sweep(saddle_quadratic(), part, 0.5, {1.0, 1.0}, inner);
    CHECK(diag.next[0] == doctest::Approx(2.0 / 3.0).epsilon(1e-12));
    CHECK(diag.next[1] == doctest::Approx(2.0).epsilon(1e-12));

    const auto fixed = sol::pbcd_sweep(offdiag_quadratic(), part, 0.5, {0.0, 0.0}, inner);
    CHECK(fixed.next == Vector{0.0, 0.0});
}

TEST_CASE("pbcd newton path agrees with the closed form on quadratics") {
    // Same objective once with and once without the quadratic declaration.
    auto closed = offdiag_quadratic();
    auto newton = closed;
    newton.quadratic = false;

    const obj::BlockPartition part({1, 1});
    rng::Engine rng(8);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto a = sol::pbcd_sweep(closed, part, 0.4, x, {});
        const auto b = sol::pbcd_sweep(newton, part, 0.4, x, {});
        CHECK(lin::norm_inf(lin::sub(a.next, b.next)) < 1e-10);
    }
}

TEST_CASE("pbcd inner points satisfy the reverse-map identity") {
    const auto b = obj::benchmark_by_id("hyperbola-noniso");
    const sol::InnerSolveConfig inner{1e-12, 50};
    rng::Engine rng(15);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x{rng.uniform(-1.5, 1.5), rng.uniform(-1.5, 1.5)};
        const double alpha = 0.02;
        const auto sweep = sol::pbcd_sweep(b.objective, b.partition, alpha, x, inner);
        if (sweep.escaped) continue;
        // Each predecessor is recovered by one ascent step from its successor.
        Vector prev = x;
        for (std::size_t s = 0; s < b.partition.block_count(); ++s) {
            const Vector& cur = sweep.inner_points[s];
            const Vector g = obj::block_gradient(b.objective, b.partition, cur, s);
            Vector rebuilt = cur;
            for (std::size_t i = 0; i < g.size(); ++i)
                rebuilt[b.partition.offset(s) + i] += alpha * g[i];
            CHECK(lin::norm_inf(lin::sub(rebuilt, prev)) <= 10 * inner.tolerance);
            prev = cur;
        }
    }
}

TEST_CASE("sweep locality: inactive blocks are bit-identical") {
    const auto q3 = obj::benchmark_by_id("quad-3block");
    const double alpha = 0.3 / q3.objective.lipschitz;
    rng::Engine rng(21);
    Vector x(6);
    for (auto& v : x) v = rng.uniform(-1, 1);

    const auto gens = sqnorm_generators(q3.partition, 1.0);
    auto check_locality = [&](const sol::SweepResult& sweep) {
        Vector prev = x;
        for (std::size_t s = 0; s < 3; ++s) {
            const Vector& cur = sweep.inner_points[s];
            for (std::size_t t = 0; t < 3; ++t) {
                if (t == s) continue;
                for (std::size_t i = 0; i < q3.partition.size(t); ++i) {
                    const std::size_t idx = q3.partition.offset(t) + i;
                    CHECK(cur[idx] == prev[idx]);
                }
            }
            prev = cur;
        }
    };
    check_locality(sol::bcgd_sweep(q3.objective, q3.partition, alpha, x));
    check_locality(sol::bmd_sweep(q3.objective, q3.partition, gens, alpha, x));
    check_locality(sol::pbcd_sweep(q3.objective, q3.partition, alpha, x, {}));
}

TEST_CASE("fixed points of one sweep coincide with critical points") {
    const auto corpus = obj::benchmark_corpus();
    rng::Engine rng(33);
    for (const auto& b : corpus) {
        const double alpha = 0.5 / b.objective.lipschitz;
        const auto gens = sqnorm_generators(b.partition, 1.0);

        for (const auto& cp : b.critical_points) {
            for (int m = 0; m < 3; ++m) {
                sol::SweepResult sweep;
                if (m == 0)
                    sweep = sol::bcgd_sweep(b.objective, b.partition, alpha, cp.location);
                if (m == 1)
                    sweep = sol::bmd_sweep(b.objective, b.partition, gens, alpha, cp.location);
                if (m == 2)
                    sweep = sol::pbcd_sweep(b.objective, b.partition, alpha, cp.location, {});
                CHECK(lin::norm_inf(lin::sub(sweep.next, cp.location)) <= 1e-10);
            }
        }

        // Away from critical points the sweep must move.
        for (int trial = 0; trial < 10; ++trial) {
            Vector x(b.objective.dimension);
            for (std::size_t i = 0; i < x.size(); ++i)
                x[i] = rng.uniform(b.sampling_box.lo[i], b.sampling_box.hi[i]);
            if (lin::norm2(b.objective.gradient(x)) <= 1e-6) continue;
            const auto sweep = sol::bcgd_sweep(b.objective, b.partition, alpha, x);
            CHECK(lin::norm_inf(lin::sub(sweep.next, x)) > 1e-10);
        }
    }
}

TEST_CASE("bcgd descends monotonically on the corpus quadratics") {
    for (const auto* id : {"quad-offdiag", "quad-3block"}) {
        const auto b = obj::benchmark_by_id(id);
        sol::SolverConfig cfg;
        cfg.method = sol::Method::Bcgd;
        cfg.alpha = 0.9 / b.objective.lipschitz;
        cfg.max_iterations = 200;
        cfg.grad_tolerance = 1e-14;

        rng::Engine rng(55);
        Vector x0(b.objective.dimension);
        for (auto& v : x0) v = rng.uniform(-1.0, 1.0);
        const auto trace = sol::run(b.objective, b.partition, cfg, x0);
        for (std::size_t k = 0; k + 1 < trace.values.size(); ++k) {
            if (trace.gradient_norms[k] > 1e-14) CHECK(trace.values[k + 1] <= trace.values[k]);
        }
    }
}

TEST_CASE("run on the separable quartic reaches the expected limits") {
    const auto b = obj::benchmark_by_id("quartic-sep");
    sol::SolverConfig cfg;
    cfg.method = sol::Method::Bcgd;
    cfg.alpha = 0.05;
    cfg.max_iterations = 100000;
    cfg.grad_tolerance = 1e-10;

    const auto basin = sol::run(b.objective, b.partition, cfg, {1.5, 0.5});
    CHECK(basin.reason == sol::StopReason::Tolerance);
    CHECK(lin::norm2(lin::sub(basin.terminal(), Vector{1.0, 0.0})) < 1e-4);

    // The x1 = 0 axis is invariant, so this run lands on the saddle.
    const auto axis = sol::run(b.objective, b.partition, cfg, {0.0, 0.5});
    CHECK(axis.reason == sol::StopReason::Tolerance);
    CHECK(lin::norm2(axis.terminal()) < 1e-9);
    CHECK(axis.terminal()[0] == 0.0);

    // Starting at a critical point terminates immediately.
    const auto at_crit = sol::run(b.objective, b.partition, cfg, {1.0, 0.0});
    CHECK(at_crit.iterations() == 0);
    CHECK(at_crit.reason == sol::StopReason::Tolerance);
}

TEST_CASE("run reports invalid step sizes and escaped domains") {
    auto o = saddle_quadratic();
    const obj::BlockPartition part({1, 1});

    sol::SolverConfig cfg;
    cfg.method = sol::Method::Bcgd;
    cfg.alpha = 1.0;  // == 1/L, rejected
    const auto invalid = sol::run(o, part, cfg, {0.5, 0.5});
    CHECK(invalid.reason == sol::StopReason::StepSizeInvalid);
    CHECK(invalid.iterations() == 0);

    // The ascent direction x2 blows up and leaves a tight box.
    o.domain = obj::Box{{-1.0, -1.0}, {1.0, 1.0}};
    cfg.alpha = 0.5;
    cfg.max_iterations = 50;
    const auto escaped = sol::run(o, part, cfg, {0.5, 0.9});
    CHECK(escaped.reason == sol::StopReason::EscapedDomain);
    CHECK(!o.in_domain(escaped.terminal()));

    cfg.max_iterations = 3;
    o.domain.reset();
    const auto capped = sol::run(o, part, cfg, {0.5, 0.9});
    CHECK(capped.reason == sol::StopReason::MaxIterations);
    CHECK(capped.iterations() == 3);

    cfg.max_iterations = 0;
    const Vector start{0.5, 0.9};
    CHECK_THROWS_AS(sol::run(o, part, cfg, start), std::invalid_argument);
    cfg.max_iterations = 10;
    cfg.grad_tolerance = 0.0;
    CHECK_THROWS_AS(sol::run(o, part, cfg, start), std::invalid_argument);
}

TEST_CASE("single-block bcgd is plain gradient descent") {
    const auto o = offdiag_quadratic();
    const obj::BlockPartition whole({2});
    rng::Engine rng(77);
    for (int trial = 0; trial < 20; ++trial) {
        const Vector x{rng.uniform(-2, 2), rng.uniform(-2, 2)};
        const auto sweep = sol::bcgd_sweep(o, whole, 0.3, x);
        const Vector plain = lin::sub(x, lin::scaled(0.3, o.gradient(x)));
        CHECK(sweep.next == plain);
    }
}

TEST_CASE("traces replay exactly: consecutive iterates are one sweep apart") {
    const auto q3 = obj::benchmark_by_id("quad-3block");
    const auto gens = sqnorm_generators(q3.partition, 1.0);

    for (auto method : {sol::Method::Bcgd, sol::Method::Bmd, sol::Method::Pbcd}) {
        sol::SolverConfig cfg;
        cfg.method = method;
        cfg.alpha = 0.6 / q3.objective.lipschitz;
        cfg.max_iterations = 25;
        cfg.grad_tolerance = 1e-15;
        if (method == sol::Method::Bmd) cfg.generators = gens;

        const auto trace = sol::run(q3.objective, q3.partition, cfg, Vector{1, -1, 0.5, 0.2, -0.3, 0.8});
        for (std::size_t k = 0; k + 1 < trace.iterates.size(); ++k) {
            sol::SweepResult sweep;
            switch (method) {
                case sol::Method::Bcgd:
                    sweep = sol::bcgd_sweep(q3.objective, q3.partition, cfg.alpha,
                                            trace.iterates[k]);
                    break;
                case sol::Method::Bmd:
                    sweep = sol::bmd_sweep(q3.objective, q3.partition, gens, cfg.alpha,
                                           trace.iterates[k]);
                    break;
                case sol::Method::Pbcd:
                    sweep = sol::pbcd_sweep(q3.objective, q3.partition, cfg.alpha,
                                            trace.iterates[k], {});
                    break;
            }
            CHECK(sweep.next == trace.iterates[k + 1]);
        }
    }
}

TEST_CASE("bmd with mu = 2 squared-norm generators replays bcgd at alpha/2") {
    for (const auto* id : {"quad-offdiag", "quartic-sep"}) {
        const auto b = obj::benchmark_by_id(id);
        const double alpha = 0.9 / b.objective.lipschitz;

        sol::SolverConfig bmd;
        bmd.method = sol::Method::Bmd;
        bmd.alpha = alpha;
        bmd.generators = sqnorm_generators(b.partition, 2.0);
        bmd.max_iterations = 500;
        bmd.grad_tolerance = 1e-12;

        sol::SolverConfig bcgd;
        bcgd.method = sol::Method::Bcgd;
        bcgd.alpha = alpha / 2.0;
        bcgd.max_iterations = 500;
        bcgd.grad_tolerance = 1e-12;

        const Vector x0{1.3, -0.4};
        const auto t_bmd = sol::run(b.objective, b.partition, bmd, x0);
        const auto t_bcgd = sol::run(b.objective, b.partition, bcgd, x0);
        REQUIRE(t_bmd.iterates.size() == t_bcgd.iterates.size());
        for (std::size_t k = 0; k < t_bmd.iterates.size(); ++k)
            CHECK(lin::norm_inf(lin::sub(t_bmd.iterates[k], t_bcgd.iterates[k])) <= 1e-12);
    }
}
