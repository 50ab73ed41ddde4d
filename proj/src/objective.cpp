#include "blockdyn/objective.hpp"

#include <cmath>
#include <memory>
#include <stdexcept>

#include "blockdyn/eigen.hpp"

namespace blockdyn::obj {

using lin::Matrix;
using lin::Vector;

BlockPartition::BlockPartition(std::vector<std::size_t> sizes) : sizes_(std::move(sizes)) {
    if (sizes_.empty()) throw std::invalid_argument("BlockPartition: no blocks");
    offsets_.reserve(sizes_.size());
    for (std::size_t s : sizes_) {
        if (s == 0) throw std::invalid_argument("BlockPartition: zero-sized block");
        offsets_.push_back(total_);
        total_ += s;
    }
}

Vector BlockPartition::extract(const Vector& x, std::size_t s) const {
    if (s >= sizes_.size()) throw std::out_of_range("BlockPartition: block index out of range");
    if (x.size() != total_) throw std::invalid_argument("BlockPartition: dimension mismatch");
    return Vector(x.begin() + static_cast<std::ptrdiff_t>(offsets_[s]),
                  x.begin() + static_cast<std::ptrdiff_t>(offsets_[s] + sizes_[s]));
}

void BlockPartition::place(Vector& x, std::size_t s, const Vector& block) const {
    if (s >= sizes_.size()) throw std::out_of_range("BlockPartition: block index out of range");
    if (x.size() != total_ || block.size() != sizes_[s])
        throw std::invalid_argument("BlockPartition: dimension mismatch");
    std::copy(block.begin(), block.end(),
              x.begin() + static_cast<std::ptrdiff_t>(offsets_[s]));
}

bool Box::contains(const Vector& x) const {
    if (x.size() != lo.size() || x.size() != hi.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
        if (!(x[i] >= lo[i] && x[i] <= hi[i])) return false;  // NaN counts as outside
    return true;
}

BregmanGenerator squared_norm_generator(std::size_t block_size, double mu) {
    if (mu <= 0.0) throw std::invalid_argument("squared_norm_generator: mu must be positive");
    BregmanGenerator g;
    g.block_size = block_size;
    g.strong_convexity = mu;
    g.name = "sqnorm";
    g.value = [mu](const Vector& u) { return 0.5 * mu * lin::dot(u, u); };
    g.mirror = [mu](const Vector& u) { return lin::scaled(mu, u); };
    g.inverse_mirror = [mu](const Vector& v) { return lin::scaled(1.0 / mu, v); };
    g.second_derivative = [mu, block_size](const Vector&) {
        return mu * Matrix::identity(block_size);
    };
    return g;
}

namespace {

// Solve u + tanh(u) = v by Newton with step halving. phi'' in [1, 2] makes
// the equation well posed for every v.
double invert_logcosh_mirror(double v) {
    double u = 0.5 * v;
    double res = u + std::tanh(u) - v;
    for (int it = 0; it < 100; ++it) {
        if (std::abs(res) <= 1e-12) return u;
        const double th = std::tanh(u);
        const double deriv = 2.0 - th * th;  // 1 + sech^2
        double step = res / deriv;
        double u_next = u - step;
        double res_next = u_next + std::tanh(u_next) - v;
        int halvings = 0;
        while (std::abs(res_next) > std::abs(res) && halvings++ < 60) {
            step *= 0.5;
            u_next = u - step;
            res_next = u_next + std::tanh(u_next) - v;
        }
        u = u_next;
        res = res_next;
    }
    if (std::abs(res) > 1e-12)
        throw std::runtime_error("log_cosh_generator: inverse mirror Newton did not converge");
    return u;
}

}  // namespace

BregmanGenerator log_cosh_generator(std::size_t block_size) {
    BregmanGenerator g;
    g.block_size = block_size;
    g.strong_convexity = 1.0;
    g.name = "logcosh";
    g.value = [](const Vector& u) {
        double s = 0.5 * lin::dot(u, u);
        for (double x : u) s += std::log(std::cosh(x));
        return s;
    };
    g.mirror = [](const Vector& u) {
        Vector v(u.size());
        for (std::size_t i = 0; i < u.size(); ++i) v[i] = u[i] + std::tanh(u[i]);
        return v;
    };
    g.inverse_mirror = [](const Vector& v) {
        Vector u(v.size());
        for (std::size_t i = 0; i < v.size(); ++i) u[i] = invert_logcosh_mirror(v[i]);
        return u;
    };
    g.second_derivative = [](const Vector& u) {
        Matrix h(u.size(), u.size());
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double th = std::tanh(u[i]);
            h(i, i) = 2.0 - th * th;
        }
        return h;
    };
    return g;
}

std::string to_string(CriticalKind k) {
    switch (k) {
        case CriticalKind::StrictSaddle: return "strict-saddle";
        case CriticalKind::LocalMin: return "local-min";
        case CriticalKind::Degenerate: return "degenerate";
    }
    return "?";
}

Objective quadratic_objective(const Matrix& a) {
    if (!a.square()) throw std::invalid_argument("quadratic_objective: matrix must be square");
    Objective o;
    o.dimension = a.rows();
    o.value = [a](const Vector& x) { return 0.5 * lin::dot(x, a * x); };
    o.gradient = [a](const Vector& x) { return a * x; };
    o.hessian = [a](const Vector&) { return a; };
    o.lipschitz = eig::spectral_radius_symmetric(a);
    o.quadratic = true;
    return o;
}

namespace {

double monomial(const Vector& x, const std::vector<unsigned>& exps) {
    double v = 1.0;
    for (std::size_t i = 0; i < exps.size(); ++i)
        for (unsigned k = 0; k < exps[i]; ++k) v *= x[i];
    return v;
}

}  // namespace

Objective polynomial_objective(std::size_t dimension, std::vector<PolynomialTerm> terms,
                               double lipschitz, std::optional<Box> box) {
    for (const auto& t : terms)
        if (t.exponents.size() != dimension)
            throw std::invalid_argument("polynomial_objective: exponent arity mismatch");
    if (lipschitz <= 0.0)
        throw std::invalid_argument("polynomial_objective: lipschitz must be positive");

    bool quadratic = true;
    for (const auto& t : terms) {
        unsigned degree = 0;
        for (unsigned e : t.exponents) degree += e;
        if (degree > 2) quadratic = false;
    }

    auto shared = std::make_shared<std::vector<PolynomialTerm>>(std::move(terms));
    Objective o;
    o.dimension = dimension;
    o.lipschitz = lipschitz;
    o.domain = std::move(box);
    o.quadratic = quadratic;
    o.value = [shared](const Vector& x) {
        double v = 0.0;
        for (const auto& t : *shared) v += t.coeff * monomial(x, t.exponents);
        return v;
    };
    o.gradient = [shared, dimension](const Vector& x) {
        Vector g(dimension, 0.0);
        for (const auto& t : *shared) {
            for (std::size_t i = 0; i < dimension; ++i) {
                if (t.exponents[i] == 0) continue;
                auto exps = t.exponents;
                --exps[i];
                g[i] += t.coeff * t.exponents[i] * monomial(x, exps);
            }
        }
        return g;
    };
    o.hessian = [shared, dimension](const Vector& x) {
        Matrix h(dimension, dimension);
        for (const auto& t : *shared) {
            for (std::size_t i = 0; i < dimension; ++i) {
                if (t.exponents[i] == 0) continue;
                for (std::size_t j = 0; j < dimension; ++j) {
                    auto exps = t.exponents;
                    --exps[i];
                    const double c1 = t.coeff * t.exponents[i];
                    if (exps[j] == 0) continue;
                    const double c2 = c1 * exps[j];
                    --exps[j];
                    h(i, j) += c2 * monomial(x, exps);
                }
            }
        }
        return h;
    };
    return o;
}

namespace {

Box square_box(std::size_t n, double half_width) {
    return {Vector(n, -half_width), Vector(n, half_width)};
}

BenchmarkFunction make_quad_offdiag() {
    const Matrix a{{0.0, 1.0}, {1.0, 0.0}};
    BenchmarkFunction b{"quad-offdiag", quadratic_objective(a),
                        BlockPartition({1, 1}), square_box(2, 2.0), {}, true};
    b.critical_points.push_back({{0.0, 0.0}, CriticalKind::StrictSaddle});
    return b;
}

BenchmarkFunction make_quartic_sep() {
    Objective o;
    o.dimension = 2;
    o.value = [](const Vector& x) {
        return 0.25 * x[0] * x[0] * x[0] * x[0] - 0.5 * x[0] * x[0] + 0.5 * x[1] * x[1];
    };
    o.gradient = [](const Vector& x) { return Vector{x[0] * x[0] * x[0] - x[0], x[1]}; };
    o.hessian = [](const Vector& x) {
        return Matrix{{3.0 * x[0] * x[0] - 1.0, 0.0}, {0.0, 1.0}};
    };
    // sup of rho(hessian) over the box is 11 (at |x1| = 2); 10% margin on top.
    o.lipschitz = 12.1;
    o.domain = square_box(2, 2.0);

    BenchmarkFunction b{"quartic-sep", std::move(o), BlockPartition({1, 1}),
                        square_box(2, 2.0), {}, true};
    b.critical_points.push_back({{0.0, 0.0}, CriticalKind::StrictSaddle});
    b.critical_points.push_back({{1.0, 0.0}, CriticalKind::LocalMin});
    b.critical_points.push_back({{-1.0, 0.0}, CriticalKind::LocalMin});
    return b;
}

BenchmarkFunction make_hyperbola_noniso() {
    Objective o;
    o.dimension = 2;
    o.value = [](const Vector& x) {
        const double r = x[0] * x[1] - 1.0;
        return r * r;
    };
    o.gradient = [](const Vector& x) {
        const double r = x[0] * x[1] - 1.0;
        return Vector{2.0 * r * x[1], 2.0 * r * x[0]};
    };
    o.hessian = [](const Vector& x) {
        const double c = 4.0 * x[0] * x[1] - 2.0;
        return Matrix{{2.0 * x[1] * x[1], c}, {c, 2.0 * x[0] * x[0]}};
    };
    // sup of rho(hessian) over the box is 26 (at (2, -2) and (-2, 2)).
    o.lipschitz = 28.6;
    o.domain = square_box(2, 2.0);

    BenchmarkFunction b{"hyperbola-noniso", std::move(o), BlockPartition({1, 1}),
                        square_box(2, 2.0), {}, false};
    b.critical_points.push_back({{0.0, 0.0}, CriticalKind::StrictSaddle});
    // Representatives of the minimizer curve x1*x2 = 1; the Hessian there is
    // singular along the curve, so they are labeled degenerate.
    b.critical_points.push_back({{1.0, 1.0}, CriticalKind::Degenerate});
    b.critical_points.push_back({{-1.0, -1.0}, CriticalKind::Degenerate});
    return b;
}

BenchmarkFunction make_quad_3block() {
    const Matrix a{
        {2, 1, 0, 0, 0, 1},
        {1, 2, 1, 0, 0, 0},
        {0, 1, -1, 1, 0, 0},
        {0, 0, 1, 2, 1, 0},
        {0, 0, 0, 1, -3, 1},
        {1, 0, 0, 0, 1, 1},
    };
    BenchmarkFunction b{"quad-3block", quadratic_objective(a),
                        BlockPartition({2, 2, 2}), square_box(6, 2.0), {}, true};
    b.critical_points.push_back({Vector(6, 0.0), CriticalKind::StrictSaddle});
    return b;
}

}  // namespace

std::vector<BenchmarkFunction> benchmark_corpus() {
    std::vector<BenchmarkFunction> all;
    all.push_back(make_quad_offdiag());
    all.push_back(make_quartic_sep());
    all.push_back(make_hyperbola_noniso());
    all.push_back(make_quad_3block());
    return all;
}

BenchmarkFunction benchmark_by_id(const std::string& id) {
    for (auto& b : benchmark_corpus())
        if (b.id == id) return b;
    throw std::invalid_argument("unknown benchmark id: " + id);
}

std::vector<std::string> benchmark_ids() {
    std::vector<std::string> ids;
    for (const auto& b : benchmark_corpus()) ids.push_back(b.id);
    return ids;
}

Vector block_gradient(const Objective& obj, const BlockPartition& part, const Vector& x,
                      std::size_t s) {
    if (part.dimension() != obj.dimension || x.size() != obj.dimension)
        throw std::invalid_argument("block_gradient: dimension mismatch");
    return part.extract(obj.gradient(x), s);
}

Matrix hessian_block(const Objective& obj, const BlockPartition& part, const Vector& x,
                     std::size_t s, std::size_t t) {
    if (s >= part.block_count() || t >= part.block_count())
        throw std::out_of_range("hessian_block: block index out of range");
    if (part.dimension() != obj.dimension || x.size() != obj.dimension)
        throw std::invalid_argument("hessian_block: dimension mismatch");
    const Matrix h = obj.hessian(x);
    Matrix block(part.size(s), part.size(t));
    for (std::size_t i = 0; i < part.size(s); ++i)
        for (std::size_t j = 0; j < part.size(t); ++j)
            block(i, j) = h(part.offset(s) + i, part.offset(t) + j);
    return block;
}

double hessian_asymmetry(const Objective& obj, const Vector& x) {
    const Matrix h = obj.hessian(x);
    double worst = 0.0;
    for (std::size_t i = 0; i < h.rows(); ++i)
        for (std::size_t j = i + 1; j < h.cols(); ++j)
            worst = std::max(worst, std::abs(h(i, j) - h(j, i)));
    return worst;
}

}  // namespace blockdyn::obj
