#include "blockdyn/spectral.hpp"

#include <cmath>
#include <stdexcept>

#include <json.hpp>

#include "blockdyn/regions.hpp"

namespace blockdyn::spectral {

using lin::Matrix;
using lin::Vector;
using obj::BlockPartition;

BlockTriangularParts split_block_triangular(const Matrix& a, const BlockPartition& part) {
    if (!a.square() || a.rows() != part.dimension())
        throw std::invalid_argument("split_block_triangular: shape mismatch");
    const std::size_t n = a.rows();
    BlockTriangularParts out{Matrix(n, n), Matrix(n, n), Matrix(n, n)};
    for (std::size_t s = 0; s < part.block_count(); ++s) {
        for (std::size_t t = 0; t < part.block_count(); ++t) {
            Matrix* dst = s > t   ? &out.strict_lower
                          : s < t ? &out.strict_upper
                                  : &out.block_diagonal;
            for (std::size_t i = 0; i < part.size(s); ++i)
                for (std::size_t j = 0; j < part.size(t); ++j)
                    (*dst)(part.offset(s) + i, part.offset(t) + j) =
                        a(part.offset(s) + i, part.offset(t) + j);
        }
    }
    return out;
}

namespace {

// In place: rows of block s of p become rows(p) + coeff * (m_rows * p) where
// m_rows are the block-s rows of m. Multiplying by (I + coeff U_s U_s^T m)
// from the left touches only that block-row.
void apply_block_row_factor(Matrix& p, const Matrix& m, const BlockPartition& part,
                            std::size_t s, double coeff) {
    const std::size_t n = p.rows();
    const std::size_t off = part.offset(s);
    const std::size_t ns = part.size(s);
    Matrix update(ns, n);
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < n; ++k) {
            double acc = 0.0;
            for (std::size_t j = 0; j < n; ++j) acc += m(off + i, j) * p(j, k);
            update(i, k) = acc;
        }
    for (std::size_t i = 0; i < ns; ++i)
        for (std::size_t k = 0; k < n; ++k) p(off + i, k) += coeff * update(i, k);
}

void check_shapes(const Matrix& a, const BlockPartition& part, const char* who) {
    if (!a.square() || a.rows() != part.dimension())
        throw std::invalid_argument(std::string(who) + ": shape mismatch");
}

}  // namespace

Matrix bcgd_sweep_jacobian(const Matrix& a, const BlockPartition& part, double alpha) {
    check_shapes(a, part, "bcgd_sweep_jacobian");
    Matrix p = Matrix::identity(a.rows());
    // Left-multiplying by (I - alpha U_s A_s) for s = 1..p puts the factor of
    // the last-updated block leftmost, matching the sweep order.
    for (std::size_t s = 0; s < part.block_count(); ++s)
        apply_block_row_factor(p, a, part, s, -alpha);
    return p;
}

Matrix build_g(const Matrix& a, const BlockPartition& part, double alpha) {
    check_shapes(a, part, "build_g");
    const auto parts = split_block_triangular(a, part);
    // I + alpha A-check is unit block lower triangular, hence invertible.
    const Matrix m = Matrix::identity(a.rows()) + alpha * parts.strict_lower;
    return lin::solve(m, a);
}

BmdMatrices bmd_matrices(const Matrix& a, const BlockPartition& part,
                         const std::vector<Matrix>& psi_blocks, double alpha) {
    check_shapes(a, part, "bmd_matrices");
    if (psi_blocks.size() != part.block_count())
        throw std::invalid_argument("bmd_matrices: one psi block per partition block");

    const std::size_t n = a.rows();
    // T = Psi^-1 A, assembled block-row by block-row.
    Matrix t(n, n);
    Matrix psi_inv_sqrt(n, n);
    for (std::size_t s = 0; s < part.block_count(); ++s) {
        const std::size_t off = part.offset(s);
        const std::size_t ns = part.size(s);
        const Matrix& psi = psi_blocks[s];
        if (!psi.square() || psi.rows() != ns)
            throw std::invalid_argument("bmd_matrices: psi block size mismatch");

        Matrix rows(ns, n);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < n; ++j) rows(i, j) = a(off + i, j);
        const Matrix solved = lin::solve(psi, rows);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < n; ++j) t(off + i, j) = solved(i, j);

        const Matrix inv_sqrt = inverse_sqrt_spd(psi);
        for (std::size_t i = 0; i < ns; ++i)
            for (std::size_t j = 0; j < ns; ++j) psi_inv_sqrt(off + i, off + j) = inv_sqrt(i, j);
    }

    BmdMatrices out;
    out.sweep_jacobian = Matrix::identity(n);
    for (std::size_t s = 0; s < part.block_count(); ++s)
        apply_block_row_factor(out.sweep_jacobian, t, part, s, -alpha);

    const auto t_parts = split_block_triangular(t, part);
    out.g_tilde = lin::solve(Matrix::identity(n) + alpha * t_parts.strict_lower, t);

    const auto a_parts = split_block_triangular(a, part);
    const Matrix scaled_lower = psi_inv_sqrt * a_parts.strict_lower * psi_inv_sqrt;
    const Matrix scaled_a = psi_inv_sqrt * a * psi_inv_sqrt;
    out.g_bar = lin::solve(Matrix::identity(n) + alpha * scaled_lower, scaled_a);

    const double mismatch = eig::multiset_distance(eig::eigenvalues(out.g_tilde).values,
                                                   eig::eigenvalues(out.g_bar).values);
    if (mismatch > 1e-8)
        throw std::runtime_error("bmd_matrices: eig(G-tilde) differs from eig(G-bar)");
    return out;
}

Matrix pbcd_ascent_jacobian(const Matrix& a, const BlockPartition& part, double alpha) {
    check_shapes(a, part, "pbcd_ascent_jacobian");
    Matrix p = Matrix::identity(a.rows());
    // s = 1 factor leftmost: multiply from the left in decreasing s.
    for (std::size_t s = part.block_count(); s-- > 0;)
        apply_block_row_factor(p, a, part, s, alpha);
    return p;
}

Matrix build_h(const Matrix& a, const BlockPartition& part, double alpha) {
    check_shapes(a, part, "build_h");
    const auto parts = split_block_triangular(a, part);
    const Matrix m = Matrix::identity(a.rows()) - alpha * parts.strict_upper;
    return -1.0 * lin::solve(m, a);
}

Matrix pbcd_inverse_jacobian(const Matrix& a, const BlockPartition& part, double alpha) {
    const Matrix fwd = pbcd_ascent_jacobian(a, part, alpha);
    const Matrix inv = lin::inverse(fwd);
    const double cond = eig::spectral_norm(fwd) * eig::spectral_norm(inv);
    if (!(cond < 1e12))
        throw std::runtime_error("pbcd_inverse_jacobian: ascent sweep nearly singular");
    return inv;
}

Matrix inverse_sqrt_spd(const Matrix& m) {
    const auto se = eig::symmetric_eigen(m);
    if (se.values.front() <= 0.0)
        throw std::runtime_error("inverse_sqrt_spd: matrix is not positive definite");
    const std::size_t n = m.rows();
    Matrix out(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
            double acc = 0.0;
            for (std::size_t k = 0; k < n; ++k)
                acc += se.vectors(i, k) * se.vectors(j, k) / std::sqrt(se.values[k]);
            out(i, j) = acc;
        }
    return out;
}

Matrix jacobian_bcgd(const obj::Objective& objective, const BlockPartition& part, double alpha,
                     const Vector& x_star) {
    return bcgd_sweep_jacobian(objective.hessian(x_star), part, alpha);
}

BmdMatrices jacobian_bmd(const obj::Objective& objective, const BlockPartition& part,
                         const std::vector<obj::BregmanGenerator>& generators, double alpha,
                         const Vector& x_star) {
    if (generators.size() != part.block_count())
        throw std::invalid_argument("jacobian_bmd: one generator per block required");
    std::vector<Matrix> psi;
    psi.reserve(generators.size());
    for (std::size_t s = 0; s < generators.size(); ++s) {
        Matrix block = generators[s].second_derivative(part.extract(x_star, s));
        const auto se = eig::symmetric_eigen(block);
        if (se.values.front() <= 0.0)
            throw std::runtime_error("jacobian_bmd: generator second derivative not SPD");
        psi.push_back(std::move(block));
    }
    return bmd_matrices(objective.hessian(x_star), part, psi, alpha);
}

Matrix jacobian_pbcd_inverse_map(const obj::Objective& objective, const BlockPartition& part,
                                 double alpha, const Vector& x_star) {
    return pbcd_inverse_jacobian(objective.hessian(x_star), part, alpha);
}

SpectralReport certify_instability(sol::Method method, const obj::Objective& objective,
                                   const BlockPartition& part,
                                   const std::vector<obj::BregmanGenerator>& generators,
                                   double alpha, const Vector& x_star) {
    SpectralReport rep;
    rep.method = method;
    rep.alpha = alpha;
    rep.point = x_star;
    rep.grad_norm = lin::norm2(objective.gradient(x_star));

    const Matrix a = objective.hessian(x_star);
    const auto hess = eig::symmetric_eigen(a);
    rep.hessian_spectrum = hess.values;
    const double lambda_min = hess.values.front();
    rep.strict_saddle = lambda_min < -rep.saddle_threshold;
    rep.inconclusive = std::abs(lambda_min) <= rep.saddle_threshold;

    double rho_a = 0.0;
    for (double v : hess.values) rho_a = std::max(rho_a, std::abs(v));
    const regions::RegionOmega omega{1e-10, 1e-10 * std::max(1.0, rho_a)};

    Matrix jac;
    switch (method) {
        case sol::Method::Bcgd: {
            jac = bcgd_sweep_jacobian(a, part, alpha);
            rep.auxiliary_name = "G";
            const Matrix g = build_g(a, part, alpha);
            rep.auxiliary_spectrum = eig::eigenvalues(g).values;
            break;
        }
        case sol::Method::Bmd: {
            const auto bmd = jacobian_bmd(objective, part, generators, alpha, x_star);
            jac = bmd.sweep_jacobian;
            rep.auxiliary_name = "G-tilde";
            rep.auxiliary_spectrum = eig::eigenvalues(bmd.g_tilde).values;
            break;
        }
        case sol::Method::Pbcd: {
            jac = pbcd_inverse_jacobian(a, part, alpha);
            rep.auxiliary_name = "H";
            const Matrix h = build_h(a, part, alpha);
            rep.auxiliary_spectrum = eig::eigenvalues(h).values;
            break;
        }
    }

    const auto jac_eig = eig::eigenvalues(jac);
    rep.jacobian_spectrum = jac_eig.values;
    rep.max_magnitude = jac_eig.max_magnitude();
    rep.unstable = rep.max_magnitude > 1.0;
    rep.instability_margin = rep.max_magnitude - 1.0;

    if (method == sol::Method::Pbcd) {
        // Lemma certificate: some nonzero eigenvalue kappa of alpha*H has
        // 1/kappa in Xi(alpha, rho(A)).
        regions::RegionXi xi{alpha, rho_a, 1e-8};
        for (const auto& lambda : rep.auxiliary_spectrum) {
            const auto kappa = alpha * lambda;
            if (std::abs(kappa) <= omega.zero_tol) continue;
            if (xi.contains(1.0 / kappa)) {
                rep.xi_certificate = true;
                break;
            }
        }
    } else {
        for (const auto& lambda : rep.auxiliary_spectrum) {
            if (omega.contains(lambda)) {
                rep.omega_certificate = true;
                break;
            }
        }
    }
    return rep;
}

std::string report_to_json(const SpectralReport& rep) {
    nlohmann::json j;
    j["method"] = sol::to_string(rep.method);
    j["alpha"] = rep.alpha;
    j["point"] = rep.point;
    j["gradNorm"] = rep.grad_norm;
    j["hessianSpectrum"] = rep.hessian_spectrum;
    auto pairs = nlohmann::json::array();
    for (const auto& z : rep.jacobian_spectrum) pairs.push_back({z.real(), z.imag()});
    j["jacobianSpectrum"] = pairs;
    j["maxMagnitude"] = rep.max_magnitude;
    j["verdicts"] = {{"isStrictSaddle", rep.strict_saddle},
                     {"hasUnstableEigenvalue", rep.unstable},
                     {"inconclusive", rep.inconclusive}};
    auto aux = nlohmann::json::array();
    for (const auto& z : rep.auxiliary_spectrum) aux.push_back({z.real(), z.imag()});
    j["auxiliary"] = {{"name", rep.auxiliary_name},
                      {"spectrum", aux},
                      {"omegaCertificate", rep.omega_certificate},
                      {"xiCertificate", rep.xi_certificate}};
    j["thresholds"] = {{"saddleLambdaMin", rep.saddle_threshold},
                       {"criticalGradNorm", rep.critical_threshold}};
    j["instabilityMargin"] = rep.instability_margin;
    return j.dump(2);
}

}  // namespace blockdyn::spectral
