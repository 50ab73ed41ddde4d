#include "blockdyn/lemma_lab.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include <json.hpp>

#include "blockdyn/spectral.hpp"

namespace blockdyn::lemma_lab {

using lin::Matrix;
using lin::Vector;
using obj::BlockPartition;

Matrix random_orthogonal(std::size_t n, rng::Engine& rng) {
    Matrix g(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) g(i, j) = rng.normal();
    return lin::orthogonal_factor(g);
}

BlockPartition random_partition(std::size_t n, std::size_t p, rng::Engine& rng) {
    if (p == 0 || p > n) throw std::invalid_argument("random_partition: need 1 <= p <= n");
    // p-1 distinct cuts in 1..n-1, uniform over compositions of n into p parts.
    std::vector<std::size_t> cuts;
    while (cuts.size() + 1 < p) {
        const std::size_t c = 1 + static_cast<std::size_t>(rng.below(n - 1));
        if (std::find(cuts.begin(), cuts.end(), c) == cuts.end()) cuts.push_back(c);
    }
    cuts.push_back(0);
    cuts.push_back(n);
    std::sort(cuts.begin(), cuts.end());
    std::vector<std::size_t> sizes;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) sizes.push_back(cuts[i + 1] - cuts[i]);
    return BlockPartition(sizes);
}

Matrix random_symmetric(std::size_t n, rng::Engine& rng, SpectrumKind kind,
                        std::size_t nullity) {
    Vector d(n);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        for (auto& v : d) v = rng.uniform(-1.0, 1.0);
        bool ok = true;
        switch (kind) {
            case SpectrumKind::Any:
                break;
            case SpectrumKind::MinNegative:
                ok = *std::min_element(d.begin(), d.end()) <= -1e-3;
                break;
            case SpectrumKind::MaxPositive:
                ok = *std::max_element(d.begin(), d.end()) >= 1e-3;
                break;
            case SpectrumKind::Invertible:
                for (double v : d) ok = ok && std::abs(v) >= 0.05;
                break;
            case SpectrumKind::InvertibleWithNegative:
                for (double v : d) ok = ok && std::abs(v) >= 0.05;
                ok = ok && *std::min_element(d.begin(), d.end()) <= -0.05;
                break;
            case SpectrumKind::KnownNullity: {
                if (nullity >= n)
                    throw std::invalid_argument("random_symmetric: nullity must be < n");
                for (std::size_t i = 0; i + nullity < n; ++i)
                    ok = ok && std::abs(d[i]) >= 0.05;
                break;
            }
        }
        if (ok) break;
        if (attempt == 9999)
            throw std::runtime_error("random_symmetric: could not satisfy spectrum condition");
    }
    if (kind == SpectrumKind::KnownNullity)
        for (std::size_t i = n - nullity; i < n; ++i) d[i] = 0.0;

    const Matrix q = random_orthogonal(n, rng);
    const Matrix b = q * Matrix::diagonal(d) * q.transposed();
    return 0.5 * (b + b.transposed());
}

BoundVerdict rayleigh_part_bound(const Matrix& b, const BlockPartition& part,
                                 std::size_t trials, rng::Engine& rng) {
    const auto parts = spectral::split_block_triangular(b, part);
    const double rho = eig::spectral_radius_symmetric(b);
    const std::size_t n = b.rows();

    auto real_quadratic_form = [&](const Matrix& m, const Vector& re, const Vector& im) {
        // Re(eta^H M eta) for eta = re + i*im and real M.
        double acc = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                acc += m(i, j) * (re[i] * re[j] + im[i] * im[j]);
        return acc;
    };

    BoundVerdict verdict;
    verdict.trials = trials;
    verdict.worst_margin = -std::numeric_limits<double>::infinity();
    for (std::size_t trial = 0; trial < trials; ++trial) {
        Vector re(n), im(n);
        double norm_sq = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            re[i] = rng.normal();
            im[i] = rng.normal();
            norm_sq += re[i] * re[i] + im[i] * im[i];
        }
        const double inv = 1.0 / std::sqrt(norm_sq);
        for (std::size_t i = 0; i < n; ++i) {
            re[i] *= inv;
            im[i] *= inv;
        }
        const double lower = real_quadratic_form(parts.strict_lower, re, im);
        const double upper = real_quadratic_form(parts.strict_upper, re, im);
        const double margin =
            std::max(std::abs(lower), std::abs(upper)) - (rho + 1e-10);
        verdict.worst_margin = std::max(verdict.worst_margin, margin);
        if (margin > 0.0) ++verdict.violations;
    }
    return verdict;
}

std::vector<OmegaVerdict> omega_membership_sweep(const Matrix& b, const BlockPartition& part,
                                                 const std::vector<double>& betas) {
    const auto se = eig::symmetric_eigen(b);
    if (se.values.front() >= 0.0)
        throw std::invalid_argument("omega_membership_sweep: lambda_min(B) must be negative");
    const double rho = std::max(std::abs(se.values.front()), std::abs(se.values.back()));
    const auto parts = spectral::split_block_triangular(b, part);
    const regions::RegionOmega omega{1e-10, 1e-10 * rho};

    std::vector<OmegaVerdict> out;
    out.reserve(betas.size());
    for (double beta : betas) {
        const Matrix g =
            lin::solve(Matrix::identity(b.rows()) + beta * parts.strict_lower, b);
        const auto spectrum = eig::eigenvalues(g);

        OmegaVerdict verdict;
        verdict.beta = beta;
        verdict.margin = std::numeric_limits<double>::infinity();
        for (const auto& lambda : spectrum.values) {
            const double m = std::max(lambda.real() - omega.re_tol,
                                      omega.zero_tol - std::abs(lambda));
            if (m < verdict.margin) {
                verdict.margin = m;
                verdict.witness = lambda;
            }
        }
        verdict.found = verdict.margin <= 0.0;
        out.push_back(verdict);
    }
    return out;
}

std::vector<XiVerdict> xi_membership_sweep(const Matrix& b, const BlockPartition& part,
                                           const std::vector<double>& betas) {
    const auto se = eig::symmetric_eigen(b);
    if (se.values.back() <= 0.0)
        throw std::invalid_argument("xi_membership_sweep: lambda_max(B) must be positive");
    const double rho = std::max(std::abs(se.values.front()), std::abs(se.values.back()));
    const auto parts = spectral::split_block_triangular(b, part);
    const double zero_tol = 1e-10 * rho;

    std::vector<XiVerdict> out;
    out.reserve(betas.size());
    for (double beta : betas) {
        const Matrix m = beta * lin::solve(Matrix::identity(b.rows()) +
                                               beta * parts.strict_upper,
                                           b);
        const auto spectrum = eig::eigenvalues(m);
        const regions::RegionXi xi{beta, rho, 1e-8};

        XiVerdict verdict;
        verdict.beta = beta;
        verdict.threshold = xi.threshold();
        verdict.margin = std::numeric_limits<double>::infinity();
        for (const auto& lambda : spectrum.values) {
            if (std::abs(lambda) <= zero_tol) continue;
            const auto inv = 1.0 / lambda;
            const double margin = xi.threshold() - xi.slack - inv.real();
            if (margin < verdict.margin) {
                verdict.margin = margin;
                verdict.witness = inv;
            }
        }
        verdict.found = verdict.margin <= 0.0;

        const Matrix k = Matrix::identity(b.rows()) - m;
        try {
            const Matrix k_inv = lin::inverse(k);
            const double cond = eig::spectral_norm(k) * eig::spectral_norm(k_inv);
            if (!(cond < 1e12)) {
                verdict.inverse_singular = true;
            } else {
                verdict.unstable_inverse = eig::eigenvalues(k_inv).max_magnitude() > 1.0;
            }
        } catch (const std::runtime_error&) {
            verdict.inverse_singular = true;
        }
        out.push_back(verdict);
    }
    return out;
}

std::vector<RealPartVerdict> re_lower_bound_check(const Matrix& b, const BlockPartition& part,
                                                  double beta, const std::vector<double>& ts) {
    const auto se = eig::symmetric_eigen(b);
    double min_abs_eig = std::numeric_limits<double>::infinity();
    double rho = 0.0;
    for (double v : se.values) {
        min_abs_eig = std::min(min_abs_eig, std::abs(v));
        rho = std::max(rho, std::abs(v));
    }
    if (min_abs_eig <= 1e-6)
        throw std::invalid_argument("re_lower_bound_check: near-singular B rejected");
    if (beta <= 0.0 || beta >= 1.0 / rho)
        throw std::invalid_argument("re_lower_bound_check: beta outside (0, 1/rho(B))");

    const auto parts = spectral::split_block_triangular(b, part);
    const double threshold = 0.5 + (1.0 - beta * rho) / (beta * rho);
    const Matrix eye = Matrix::identity(b.rows());

    std::vector<RealPartVerdict> out;
    out.reserve(ts.size());
    for (double t : ts) {
        RealPartVerdict verdict;
        verdict.t = t;

        const Matrix check_pencil = lin::solve(b, eye + (t * beta) * parts.strict_lower);
        verdict.min_abs_re = std::numeric_limits<double>::infinity();
        for (const auto& lambda : eig::eigenvalues(check_pencil).values)
            verdict.min_abs_re = std::min(verdict.min_abs_re, std::abs(lambda.real()));

        const Matrix hat_pencil =
            (1.0 / beta) * lin::solve(b, eye + (t * beta) * parts.strict_upper);
        verdict.worst_xi_margin = -std::numeric_limits<double>::infinity();
        for (const auto& lambda : eig::eigenvalues(hat_pencil).values) {
            if (lambda.real() <= 0.0) continue;
            verdict.worst_xi_margin =
                std::max(verdict.worst_xi_margin, (threshold - 1e-10) - lambda.real());
        }

        verdict.passed = verdict.min_abs_re > 1e-10 && verdict.worst_xi_margin <= 0.0;
        out.push_back(verdict);
    }
    return out;
}

bool Rectangle::contains(std::complex<double> z) const {
    return z.real() >= re_lo && z.real() <= re_hi && z.imag() >= im_lo && z.imag() <= im_hi;
}

double Rectangle::boundary_distance(std::complex<double> z) const {
    if (contains(z)) {
        return std::min(std::min(z.real() - re_lo, re_hi - z.real()),
                        std::min(z.imag() - im_lo, im_hi - z.imag()));
    }
    const double dx = std::max({re_lo - z.real(), 0.0, z.real() - re_hi});
    const double dy = std::max({im_lo - z.imag(), 0.0, z.imag() - im_hi});
    return std::hypot(dx, dy);
}

Rectangle omega_rectangle(const Matrix& b, const BlockPartition& part) {
    const auto parts = spectral::split_block_triangular(b, part);
    const Matrix b_inv = lin::inverse(b);
    const double rho = eig::spectral_radius_symmetric(b);
    const double nu =
        eig::spectral_norm(b_inv) + eig::spectral_norm(b_inv * parts.strict_lower) / rho;
    return {-2.0 * nu, 0.0, -2.0 * nu, 2.0 * nu};
}

bool HomotopyScan::constant_count() const {
    if (counts.empty()) return true;
    for (std::size_t c : counts)
        if (c != counts.front()) return false;
    return true;
}

HomotopyScan homotopy_zero_count(const Matrix& m, const Matrix& n, Rectangle rect,
                                 const std::vector<double>& ts, double boundary_tol) {
    HomotopyScan scan;
    scan.rect = rect;
    scan.ts = ts;
    scan.min_boundary_distance = std::numeric_limits<double>::infinity();
    for (double t : ts) {
        const Matrix pencil = (1.0 - t) * m + t * n;
        std::size_t count = 0;
        for (const auto& lambda : eig::eigenvalues(pencil).values) {
            scan.min_boundary_distance =
                std::min(scan.min_boundary_distance, rect.boundary_distance(lambda));
            if (rect.contains(lambda)) ++count;
        }
        scan.counts.push_back(count);
    }
    scan.valid = scan.min_boundary_distance > boundary_tol;
    return scan;
}

MultiplicityVerdict zero_multiplicity_check(const Matrix& b, const BlockPartition& part,
                                            double beta, std::size_t expected_nullity) {
    const double rho = eig::spectral_radius_symmetric(b);
    const auto parts = spectral::split_block_triangular(b, part);
    const Matrix product =
        lin::solve(Matrix::identity(b.rows()) + beta * parts.strict_upper, b);

    std::vector<double> moduli;
    for (const auto& lambda : eig::eigenvalues(product).values)
        moduli.push_back(std::abs(lambda));
    std::sort(moduli.begin(), moduli.end());

    MultiplicityVerdict verdict;
    verdict.expected = expected_nullity;
    verdict.tau_z = 1e-8 * rho;
    verdict.observed = static_cast<std::size_t>(
        std::count_if(moduli.begin(), moduli.end(),
                      [&](double v) { return v < verdict.tau_z; }));
    verdict.conclusive = verdict.observed == moduli.size() ||
                         moduli[verdict.observed] >= 10.0 * verdict.tau_z;
    return verdict;
}

namespace {

struct MarginAccumulator {
    LemmaSummary summary;

    explicit MarginAccumulator(std::string id) {
        summary.id = std::move(id);
        summary.worst_margin = -std::numeric_limits<double>::infinity();
    }

    void record(double margin, bool violated) {
        ++summary.trials;
        summary.worst_margin = std::max(summary.worst_margin, margin);
        if (violated) ++summary.violations;
    }
};

std::vector<double> beta_grid(double rho) {
    std::vector<double> grid;
    for (int i = 1; i <= 9; ++i) grid.push_back(0.1 * i / rho);
    return grid;
}

}  // namespace

bool SuiteResult::all_passed() const {
    for (const auto& l : lemmas)
        if (l.violations != 0) return false;
    return true;
}

SuiteResult run_suite(const SuiteConfig& cfg) {
    SuiteResult result;
    result.seed = cfg.seed;

    {
        rng::Engine rng(rng::derive_seed(cfg.seed, 1));
        MarginAccumulator acc("rayleigh-bound");
        for (std::size_t i = 0; i < cfg.rayleigh_samples; ++i) {
            const std::size_t n = 2 + rng.below(9);  // 2..10
            const std::size_t p = 2 + rng.below(std::min<std::size_t>(3, n - 1));
            const auto part = random_partition(n, p, rng);
            const Matrix b = random_symmetric(n, rng, SpectrumKind::Any);
            const auto verdict = rayleigh_part_bound(b, part, 1, rng);
            acc.record(verdict.worst_margin, verdict.violations != 0);
        }
        result.lemmas.push_back(acc.summary);
    }

    {
        rng::Engine rng(rng::derive_seed(cfg.seed, 2));
        MarginAccumulator acc("inverse-pencil-real-parts");
        const std::vector<double> ts{0.0, 0.25, 0.5, 0.75, 1.0};
        for (std::size_t i = 0; i < cfg.real_part_instances; ++i) {
            const std::size_t n = 2 + rng.below(11);  // 2..12
            const std::size_t p = 2 + rng.below(std::min<std::size_t>(3, n - 1));
            const auto part = random_partition(n, p, rng);
            const Matrix b = random_symmetric(n, rng, SpectrumKind::Invertible);
            const double beta = rng.uniform(0.1, 0.9) / eig::spectral_radius_symmetric(b);
            for (const auto& verdict : re_lower_bound_check(b, part, beta, ts)) {
                const double margin =
                    std::max(1e-10 - verdict.min_abs_re, verdict.worst_xi_margin);
                acc.record(margin, !verdict.passed);
            }
        }
        result.lemmas.push_back(acc.summary);
    }

    {
        rng::Engine rng(rng::derive_seed(cfg.seed, 3));
        MarginAccumulator acc("omega-membership");
        for (std::size_t i = 0; i < cfg.omega_instances; ++i) {
            const std::size_t n = 2 + rng.below(11);
            const std::size_t p = 2 + rng.below(std::min<std::size_t>(3, n - 1));
            const auto part = random_partition(n, p, rng);
            const Matrix b = random_symmetric(n, rng, SpectrumKind::MinNegative);
            const auto grid = beta_grid(eig::spectral_radius_symmetric(b));
            for (const auto& verdict : omega_membership_sweep(b, part, grid))
                acc.record(verdict.margin, !verdict.found);
        }
        result.lemmas.push_back(acc.summary);
    }

    {
        rng::Engine rng(rng::derive_seed(cfg.seed, 4));
        MarginAccumulator acc("xi-membership");
        for (std::size_t i = 0; i < cfg.xi_instances; ++i) {
            const std::size_t n = 2 + rng.below(11);
            const std::size_t p = 2 + rng.below(std::min<std::size_t>(3, n - 1));
            const auto part = random_partition(n, p, rng);
            const Matrix b = random_symmetric(n, rng, SpectrumKind::MaxPositive);
            const auto grid = beta_grid(eig::spectral_radius_symmetric(b));
            for (const auto& verdict : xi_membership_sweep(b, part, grid)) {
                if (verdict.inverse_singular) {
                    ++acc.summary.inconclusive;
                    continue;
                }
                acc.record(verdict.margin, !(verdict.found && verdict.unstable_inverse));
            }
        }
        result.lemmas.push_back(acc.summary);
    }

    {
        rng::Engine rng(rng::derive_seed(cfg.seed, 5));
        MarginAccumulator acc("zero-multiplicity");
        for (std::size_t i = 0; i < cfg.multiplicity_instances; ++i) {
            const std::size_t n = 4 + rng.below(9);  // 4..12
            const std::size_t p = 2 + rng.below(std::min<std::size_t>(3, n - 1));
            const std::size_t nullity = 1 + rng.below(3);
            const auto part = random_partition(n, p, rng);
            const Matrix b =
                random_symmetric(n, rng, SpectrumKind::KnownNullity, nullity);
            const double beta = rng.uniform(0.1, 0.9) / eig::spectral_radius_symmetric(b);
            const auto verdict = zero_multiplicity_check(b, part, beta, nullity);
            if (!verdict.conclusive) {
                ++acc.summary.inconclusive;
                continue;
            }
            const double deviation = verdict.observed > verdict.expected
                                         ? double(verdict.observed - verdict.expected)
                                         : double(verdict.expected - verdict.observed);
            acc.record(deviation, !verdict.passed());
        }
        result.lemmas.push_back(acc.summary);
    }

    {
        rng::Engine rng(rng::derive_seed(cfg.seed, 6));
        MarginAccumulator acc("homotopy-zero-count");
        std::vector<double> ts;
        for (int i = 0; i <= 10; ++i) ts.push_back(0.1 * i);
        std::size_t attempts = 0;
        while (acc.summary.trials < cfg.homotopy_scans &&
               attempts < 10 * cfg.homotopy_scans) {
            ++attempts;
            const std::size_t n = 2 + rng.below(11);
            const std::size_t p = 2 + rng.below(std::min<std::size_t>(3, n - 1));
            const auto part = random_partition(n, p, rng);
            const Matrix b =
                random_symmetric(n, rng, SpectrumKind::InvertibleWithNegative);
            const double beta = rng.uniform(0.1, 0.9) / eig::spectral_radius_symmetric(b);

            const auto parts = spectral::split_block_triangular(b, part);
            const Matrix b_inv = lin::inverse(b);
            const Matrix n_mat =
                b_inv * (Matrix::identity(n) + beta * parts.strict_lower);
            const auto scan =
                homotopy_zero_count(b_inv, n_mat, omega_rectangle(b, part), ts);
            if (!scan.valid) {
                ++acc.summary.inconclusive;
                continue;
            }
            std::size_t max_dev = 0;
            for (std::size_t c : scan.counts) {
                const std::size_t dev = c > scan.counts.front() ? c - scan.counts.front()
                                                                : scan.counts.front() - c;
                max_dev = std::max(max_dev, dev);
            }
            acc.record(static_cast<double>(max_dev), !scan.constant_count());
        }
        result.lemmas.push_back(acc.summary);
    }

    return result;
}

std::string suite_to_json(const SuiteResult& result) {
    nlohmann::json j;
    j["seed"] = result.seed;
    j["allPassed"] = result.all_passed();
    auto arr = nlohmann::json::array();
    for (const auto& l : result.lemmas) {
        arr.push_back({{"id", l.id},
                       {"trials", l.trials},
                       {"violations", l.violations},
                       {"inconclusive", l.inconclusive},
                       {"worstMargin", l.worst_margin}});
    }
    j["lemmas"] = arr;
    return j.dump(2);
}

}  // namespace blockdyn::lemma_lab
