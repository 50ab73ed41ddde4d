#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "blockdyn/eigen.hpp"
#include "blockdyn/objective.hpp"
#include "blockdyn/regions.hpp"
#include "blockdyn/rng.hpp"

namespace blockdyn::lemma_lab {

// --- Random instance synthesis. Symmetric matrices are Q diag(d) Q^T with Q
// --- the orthogonal factor of a standard normal matrix and d uniform in
// --- [-1, 1], redrawn until the requested spectrum condition holds with a
// --- sane numerical margin. Partitions are uniform over compositions.

enum class SpectrumKind {
    Any,
    MinNegative,             // lambda_min <= -1e-3
    MaxPositive,             // lambda_max >= +1e-3
    Invertible,              // every |eigenvalue| >= 0.05
    InvertibleWithNegative,  // invertible and lambda_min <= -0.05
    KnownNullity,            // `nullity` zero eigenvalues, the rest with |d| >= 0.05
};

lin::Matrix random_orthogonal(std::size_t n, rng::Engine& rng);
obj::BlockPartition random_partition(std::size_t n, std::size_t p, rng::Engine& rng);
lin::Matrix random_symmetric(std::size_t n, rng::Engine& rng, SpectrumKind kind,
                             std::size_t nullity = 0);

// --- Single-instance lemma checks. Margins are normalized so that <= 0
// --- means the lemma's inequality held (with the stated tolerance).

struct BoundVerdict {
    std::size_t trials = 0;
    std::size_t violations = 0;
    double worst_margin = -1.0;
};

/// Rayleigh bound on the triangular parts: |Re(eta^H B-check eta)| and
/// |Re(eta^H B-hat eta)| both <= rho(B) + 1e-10 over random unit complex eta.
BoundVerdict rayleigh_part_bound(const lin::Matrix& b, const obj::BlockPartition& part,
                                 std::size_t trials, rng::Engine& rng);

struct OmegaVerdict {
    double beta = 0.0;
    bool found = false;
    std::complex<double> witness;
    double margin = 0.0;  // <= 0 iff some eigenvalue lies in Omega
};

/// For each beta: at least one eigenvalue of (I + beta B-check)^-1 B lies in
/// the closed left half plane minus the origin. Requires lambda_min(B) < 0.
std::vector<OmegaVerdict> omega_membership_sweep(const lin::Matrix& b,
                                                 const obj::BlockPartition& part,
                                                 const std::vector<double>& betas);

struct XiVerdict {
    double beta = 0.0;
    bool found = false;                 // some 1/lambda in Xi(beta, B)
    bool unstable_inverse = false;      // some |eig([I - M]^-1)| > 1
    bool inverse_singular = false;      // condition guard tripped
    std::complex<double> witness;
    double threshold = 0.0;
    double margin = 0.0;
};

/// For each beta: some nonzero eigenvalue lambda of beta (I + beta B-hat)^-1 B
/// has 1/lambda in Xi(beta, B), and consequently [I - M]^-1 has an eigenvalue
/// of magnitude > 1. Requires lambda_max(B) > 0.
std::vector<XiVerdict> xi_membership_sweep(const lin::Matrix& b,
                                           const obj::BlockPartition& part,
                                           const std::vector<double>& betas);

struct RealPartVerdict {
    double t = 0.0;
    double min_abs_re = 0.0;       // over eig(B^-1 (I + t beta B-check)); must be > 1e-10
    double worst_xi_margin = 0.0;  // over positive-Re eig((beta B)^-1 (I + t beta B-hat))
    bool passed = false;
};

/// Lemma pair on the inverse pencils: nonzero real parts for the check-form,
/// and the 1/2 + (1 - beta rho)/(beta rho) lower bound for the hat-form.
/// Rejects B with min |eigenvalue| <= 1e-6.
std::vector<RealPartVerdict> re_lower_bound_check(const lin::Matrix& b,
                                                  const obj::BlockPartition& part, double beta,
                                                  const std::vector<double>& ts);

struct Rectangle {
    double re_lo = 0.0, re_hi = 0.0, im_lo = 0.0, im_hi = 0.0;

    bool contains(std::complex<double> z) const;
    double boundary_distance(std::complex<double> z) const;
};

/// The rectangle used for the homotopy argument on the check-form pencil:
/// {-2 nu <= Re <= 0, |Im| <= 2 nu} with nu = ||B^-1|| + ||B^-1 B-check|| / rho(B)
/// (spectral norms), which dominates every pencil member's spectral radius.
Rectangle omega_rectangle(const lin::Matrix& b, const obj::BlockPartition& part);

struct HomotopyScan {
    Rectangle rect;
    std::vector<double> ts;
    std::vector<std::size_t> counts;  // eigenvalues of (1-t) M + t N inside rect
    bool valid = false;               // no eigenvalue within tau_b of the boundary
    double min_boundary_distance = 0.0;

    bool constant_count() const;
};

/// Eigenvalue counting replaces the contour-integral form of the argument:
/// a valid scan (boundary clear at every t) must show a constant count.
HomotopyScan homotopy_zero_count(const lin::Matrix& m, const lin::Matrix& n, Rectangle rect,
                                 const std::vector<double>& ts, double boundary_tol = 1e-6);

struct MultiplicityVerdict {
    std::size_t expected = 0;
    std::size_t observed = 0;
    bool conclusive = false;
    double tau_z = 0.0;

    bool passed() const { return conclusive && expected == observed; }
};

/// The zero eigenvalue of (I + beta B-hat)^-1 B has the same multiplicity as
/// that of B. `expected_nullity` comes from the spectral synthesis of B.
MultiplicityVerdict zero_multiplicity_check(const lin::Matrix& b,
                                            const obj::BlockPartition& part, double beta,
                                            std::size_t expected_nullity);

// --- Randomized suite over all lemmas, seed-deterministic.

struct SuiteConfig {
    std::uint64_t seed = 0;
    std::size_t rayleigh_samples = 1000;
    std::size_t real_part_instances = 300;
    std::size_t omega_instances = 500;
    std::size_t xi_instances = 500;
    std::size_t multiplicity_instances = 200;
    std::size_t homotopy_scans = 100;
};

struct LemmaSummary {
    std::string id;
    std::size_t trials = 0;
    std::size_t violations = 0;
    std::size_t inconclusive = 0;
    double worst_margin = 0.0;
};

struct SuiteResult {
    std::vector<LemmaSummary> lemmas;
    std::uint64_t seed = 0;

    bool all_passed() const;
};

SuiteResult run_suite(const SuiteConfig& cfg);
std::string suite_to_json(const SuiteResult& result);

}  // namespace blockdyn::lemma_lab
