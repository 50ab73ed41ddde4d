#pragma once

#include <complex>
#include <optional>
#include <string>
#include <vector>

#include "blockdyn/eigen.hpp"
#include "blockdyn/objective.hpp"
#include "blockdyn/solvers.hpp"

namespace blockdyn::spectral {

/// Strictly-block-triangular split of a symmetric block matrix:
/// a = strict_lower + block_diagonal + strict_lower^T, and for symmetric
/// input strict_upper == strict_lower^T. Pure copying, no arithmetic.
struct BlockTriangularParts {
    lin::Matrix strict_lower;    // blocks s > t
    lin::Matrix strict_upper;    // blocks s < t
    lin::Matrix block_diagonal;  // blocks s == t
};

BlockTriangularParts split_block_triangular(const lin::Matrix& a,
                                            const obj::BlockPartition& part);

// --- Matrix-level constructions (A stands in for the Hessian at a critical
// --- point; the lemma machinery reuses them with arbitrary symmetric B).

/// Jacobian of one full block-gradient sweep at a critical point, assembled
/// as (I - alpha U_p A_p)(I - alpha U_{p-1} A_{p-1})...(I - alpha U_1 A_1);
/// block 1 updates first, so its factor sits rightmost.
lin::Matrix bcgd_sweep_jacobian(const lin::Matrix& a, const obj::BlockPartition& part,
                                    double alpha);

/// G = (I + alpha A-check)^-1 A; satisfies I - alpha G = the product above.
lin::Matrix build_g(const lin::Matrix& a, const obj::BlockPartition& part, double alpha);

struct BmdMatrices {
    lin::Matrix sweep_jacobian;  // one mirror sweep: (I - alpha U_s Psi_s^-1 A_s), s = p..1
    lin::Matrix g_tilde;             // (I + alpha T-check)^-1 T with T = Psi^-1 A
    lin::Matrix g_bar;               // symmetrized-similarity form with eig == eig(g_tilde)
};

/// psi_blocks[s] is the SPD second derivative of the s-th generator at the
/// fixed point. Verifies eig(g_tilde) == eig(g_bar) to 1e-8 (multiset).
BmdMatrices bmd_matrices(const lin::Matrix& a, const obj::BlockPartition& part,
                         const std::vector<lin::Matrix>& psi_blocks, double alpha);

/// Jacobian of the reversed ascent sweep the proximal method inverts:
/// (I + alpha U_1 U_1^T A)(I + alpha U_2 U_2^T A)...(I + alpha U_p U_p^T A).
lin::Matrix pbcd_ascent_jacobian(const lin::Matrix& a, const obj::BlockPartition& part,
                                   double alpha);

/// H = -(I - alpha A-hat)^-1 A; satisfies I - alpha H = the forward product.
lin::Matrix build_h(const lin::Matrix& a, const obj::BlockPartition& part, double alpha);

/// Jacobian of the proximal iteration map itself: the inverse of the ascent
/// sweep's Jacobian. Throws if that factor's condition exceeds 1e12.
lin::Matrix pbcd_inverse_jacobian(const lin::Matrix& a, const obj::BlockPartition& part,
                                  double alpha);

/// Symmetric inverse square root of an SPD matrix (throws if not SPD).
lin::Matrix inverse_sqrt_spd(const lin::Matrix& m);

// --- Objective-level wrappers evaluated at a critical point x*.

lin::Matrix jacobian_bcgd(const obj::Objective& obj, const obj::BlockPartition& part,
                          double alpha, const lin::Vector& x_star);

BmdMatrices jacobian_bmd(const obj::Objective& obj, const obj::BlockPartition& part,
                         const std::vector<obj::BregmanGenerator>& generators, double alpha,
                         const lin::Vector& x_star);

lin::Matrix jacobian_pbcd_inverse_map(const obj::Objective& obj,
                                      const obj::BlockPartition& part, double alpha,
                                      const lin::Vector& x_star);

/// Stability verdicts for one method at one critical point, plus the
/// auxiliary-matrix diagnostics (G for the gradient sweep, G-tilde for the
/// mirror sweep, H for the proximal sweep). Thresholds are recorded so every
/// report is self-describing.
struct SpectralReport {
    sol::Method method = sol::Method::Bcgd;
    double alpha = 0.0;
    lin::Vector point;
    double grad_norm = 0.0;
    lin::Vector hessian_spectrum;  // ascending
    std::vector<std::complex<double>> jacobian_spectrum;
    double max_magnitude = 0.0;
    bool strict_saddle = false;
    bool inconclusive = false;  // |lambda_min| within the saddle threshold
    bool unstable = false;      // max_magnitude > 1
    double instability_margin = 0.0;
    std::string auxiliary_name;
    std::vector<std::complex<double>> auxiliary_spectrum;
    bool omega_certificate = false;  // BCGD/BMD: some eig of G in Omega
    bool xi_certificate = false;     // PBCD: some 1/eig(alpha H) in Xi
    double saddle_threshold = 1e-8;
    double critical_threshold = 1e-8;
};

SpectralReport certify_instability(sol::Method method, const obj::Objective& obj,
                                   const obj::BlockPartition& part,
                                   const std::vector<obj::BregmanGenerator>& generators,
                                   double alpha, const lin::Vector& x_star);

std::string report_to_json(const SpectralReport& report);

}  // namespace blockdyn::spectral
