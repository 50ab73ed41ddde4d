#pragma once

#include <complex>
#include <vector>

#include "blockdyn/linalg.hpp"

namespace blockdyn::eig {

/// Full spectrum of a real square matrix. Complex eigenvalues come in
/// conjugate pairs stored adjacently (positive imaginary part first).
/// `residual` is max over computed pairs of ||Mv - lambda v|| / ||v||;
/// well-conditioned inputs satisfy residual <= 1e-8 * ||M||.
struct ComplexSpectrum {
    std::vector<std::complex<double>> values;
    std::vector<std::vector<std::complex<double>>> vectors;  // unit eigenvectors, one per value
    double residual = 0.0;
    double matrix_norm = 0.0;  // spectral norm of the input

    double spectral_radius() const;
    double max_magnitude() const { return spectral_radius(); }
};

/// Thrown when the QR iteration fails to converge within the iteration cap.
struct EigenError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Dense nonsymmetric eigensolver: balancing, Householder reduction to
/// Hessenberg form, Francis double-shift QR to real Schur form, eigenvector
/// back-substitution, and the balancing back-transform.
ComplexSpectrum eigenvalues(const lin::Matrix& m);

struct SymmetricEigen {
    lin::Vector values;   // ascending
    lin::Matrix vectors;  // orthonormal columns, vectors.col(i) <-> values[i]
};

/// Cyclic Jacobi for real symmetric matrices. The input must be symmetric to
/// `sym_tol` on the max-abs asymmetry; the symmetrized matrix is used.
SymmetricEigen symmetric_eigen(const lin::Matrix& m, double sym_tol = 1e-8);

double spectral_norm(const lin::Matrix& m);
double spectral_radius_symmetric(const lin::Matrix& m);

/// Greedy nearest-pair multiset distance between two eigenvalue sets of equal
/// size: repeatedly match the globally closest remaining pair and return the
/// largest matched distance. Adequate at 1e-8 scales for n <= 64.
double multiset_distance(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b);

}  // namespace blockdyn::eig
