#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "blockdyn/linalg.hpp"

namespace blockdyn::obj {

/// Contiguous split of an n-vector into p blocks of sizes n_1..n_p.
class BlockPartition {
public:
    explicit BlockPartition(std::vector<std::size_t> sizes);

    std::size_t block_count() const { return sizes_.size(); }
    std::size_t dimension() const { return total_; }
    std::size_t size(std::size_t s) const { return sizes_.at(s); }
    std::size_t offset(std::size_t s) const { return offsets_.at(s); }
    const std::vector<std::size_t>& sizes() const { return sizes_; }

    lin::Vector extract(const lin::Vector& x, std::size_t s) const;
    void place(lin::Vector& x, std::size_t s, const lin::Vector& block) const;

private:
    std::vector<std::size_t> sizes_;
    std::vector<std::size_t> offsets_;
    std::size_t total_ = 0;
};

struct Box {
    lin::Vector lo;
    lin::Vector hi;

    bool contains(const lin::Vector& x) const;
};

/// A twice continuously differentiable objective with analytic gradient and
/// Hessian and a declared gradient Lipschitz constant. When `domain` is set,
/// the constant is only claimed inside that box and solvers treat leaving it
/// as a run-terminating event. Immutable after construction; the callables
/// must be pure, which also makes concurrent evaluation safe.
struct Objective {
    std::size_t dimension = 0;
    std::function<double(const lin::Vector&)> value;
    std::function<lin::Vector(const lin::Vector&)> gradient;
    std::function<lin::Matrix(const lin::Vector&)> hessian;
    double lipschitz = 0.0;
    std::optional<Box> domain;
    bool quadratic = false;  // enables the closed-form proximal block solve

    bool in_domain(const lin::Vector& x) const { return !domain || domain->contains(x); }
};

/// Per-block strongly convex generator with its mirror map, inverse mirror
/// map and second derivative. Immutable and safe to share across threads.
struct BregmanGenerator {
    std::size_t block_size = 0;
    double strong_convexity = 0.0;  // mu_t
    std::string name;
    std::function<double(const lin::Vector&)> value;
    std::function<lin::Vector(const lin::Vector&)> mirror;          // grad phi
    std::function<lin::Vector(const lin::Vector&)> inverse_mirror;  // (grad phi)^-1
    std::function<lin::Matrix(const lin::Vector&)> second_derivative;
};

/// phi(u) = (mu/2)||u||^2; mirror map mu*u with the closed-form inverse v/mu.
BregmanGenerator squared_norm_generator(std::size_t block_size, double mu);

/// phi(u) = (1/2)||u||^2 + sum_i log cosh(u_i); strongly convex with mu = 1.
/// The inverse mirror map solves u + tanh(u) = v per component by a guarded
/// Newton iteration to residual 1e-12 (well posed since phi'' >= 1).
BregmanGenerator log_cosh_generator(std::size_t block_size);

enum class CriticalKind { StrictSaddle, LocalMin, Degenerate };

std::string to_string(CriticalKind k);

struct CriticalPoint {
    lin::Vector location;
    CriticalKind kind;
};

/// An Objective bundled with its default partition, a sampling box for
/// random initialization, and exact critical-point metadata.
struct BenchmarkFunction {
    std::string id;
    Objective objective;
    BlockPartition partition;
    Box sampling_box;
    std::vector<CriticalPoint> critical_points;
    bool isolated_critical_set = true;
};

/// The built-in corpus: "quad-offdiag", "quartic-sep", "hyperbola-noniso",
/// "quad-3block". Throws std::invalid_argument for unknown ids.
std::vector<BenchmarkFunction> benchmark_corpus();
BenchmarkFunction benchmark_by_id(const std::string& id);
std::vector<std::string> benchmark_ids();

/// Quadratic objective (1/2) x^T A x for a symmetric A; L = rho(A).
Objective quadratic_objective(const lin::Matrix& a);

/// One monomial coeff * prod_i x_i^exponents[i].
struct PolynomialTerm {
    double coeff = 0.0;
    std::vector<unsigned> exponents;
};

/// Analytic polynomial objective used by external function-spec files.
/// Gradient and Hessian come from exponent manipulation, so the function
/// stays twice differentiable without any numeric differentiation. The
/// declared Lipschitz constant is the caller's responsibility (it is only
/// meaningful together with `box` unless the polynomial is quadratic).
Objective polynomial_objective(std::size_t dimension, std::vector<PolynomialTerm> terms,
                               double lipschitz, std::optional<Box> box = std::nullopt);

/// Rows of grad f(x) belonging to block s (0-based block index).
lin::Vector block_gradient(const Objective& obj, const BlockPartition& part,
                           const lin::Vector& x, std::size_t s);

/// The (s, t) sub-block of the Hessian at x.
lin::Matrix hessian_block(const Objective& obj, const BlockPartition& part,
                          const lin::Vector& x, std::size_t s, std::size_t t);

/// Max-abs asymmetry of the Hessian at x; the Objective contract keeps this
/// below 1e-10.
double hessian_asymmetry(const Objective& obj, const lin::Vector& x);

}  // namespace blockdyn::obj
