#pragma once

#include <complex>

namespace blockdyn::regions {

/// Closed left half plane minus the origin. `re_tol` absorbs solver noise on
/// the real-part sign; `zero_tol` is the origin-exclusion radius.
struct RegionOmega {
    double re_tol = 1e-10;
    double zero_tol = 1e-10;

    bool contains(std::complex<double> z) const {
        return z.real() <= re_tol && std::abs(z) > zero_tol;
    }
};

/// Half plane Re(z) >= 1/2 + (1 - beta rho)/(beta rho), the region that must
/// capture 1/lambda for some eigenvalue of beta (I + beta B-hat)^-1 B.
struct RegionXi {
    double beta = 0.0;
    double rho = 0.0;  // spectral radius of B
    double slack = 1e-10;

    double threshold() const { return 0.5 + (1.0 - beta * rho) / (beta * rho); }
    bool contains(std::complex<double> z) const { return z.real() >= threshold() - slack; }
};

}  // namespace blockdyn::regions
