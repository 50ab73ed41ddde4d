#pragma once

// Test-only oracles, kept independent of the library's eigensolver path.

#include <algorithm>
#include <complex>
#include <vector>

#include "blockdyn/linalg.hpp"

namespace blockdyn::oracles {

// Characteristic polynomial by Faddeev-LeVerrier, roots by Durand-Kerner.
inline std::vector<std::complex<double>> char_poly_roots(const lin::Matrix& a) {
    using cplx = std::complex<double>;
    const std::size_t n = a.rows();
    // p(z) = z^n + c[0] z^{n-1} + ... + c[n-1]
    std::vector<double> c(n);
    lin::Matrix m = a;
    for (std::size_t k = 1; k <= n; ++k) {
        if (k > 1) {
            lin::Matrix shifted = m;
            for (std::size_t i = 0; i < n; ++i) shifted(i, i) += c[k - 2];
            m = a * shifted;
        }
        double tr = 0.0;
        for (std::size_t i = 0; i < n; ++i) tr += m(i, i);
        c[k - 1] = -tr / static_cast<double>(k);
    }

    auto eval = [&](cplx z) {
        cplx acc = 1.0;
        for (std::size_t k = 0; k < n; ++k) acc = acc * z + c[k];
        return acc;
    };

    std::vector<cplx> roots(n);
    const cplx base(0.4, 0.9);
    cplx power = 1.0;
    for (std::size_t i = 0; i < n; ++i) {
        power *= base;
        roots[i] = power;
    }
    for (int iter = 0; iter < 500; ++iter) {
        double moved = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            cplx denom = 1.0;
            for (std::size_t j = 0; j < n; ++j)
                if (j != i) denom *= roots[i] - roots[j];
            const cplx delta = eval(roots[i]) / denom;
            roots[i] -= delta;
            moved = std::max(moved, std::abs(delta));
        }
        if (moved < 1e-14) break;
    }
    return roots;
}

}  // namespace blockdyn::oracles
