#include "blockdyn/eigen.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>

namespace blockdyn::eig {

using lin::Matrix;
using lin::Vector;

double ComplexSpectrum::spectral_radius() const {
    double r = 0.0;
    for (const auto& v : values) r = std::max(r, std::abs(v));
    return r;
}

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

// Radix-2 norm balancing (no permutation step): A <- D^-1 A D with the
// row/column norms of each index equalized. Returns the diagonal of D.
Vector balance(Matrix& a) {
    const std::size_t n = a.rows();
    Vector scale(n, 1.0);
    const double radix = 2.0;
    const double radix2 = radix * radix;

    bool done = false;
    while (!done) {
        done = true;
        for (std::size_t i = 0; i < n; ++i) {
            double c = 0.0, r = 0.0;
            for (std::size_t j = 0; j < n; ++j) {
                if (j == i) continue;
                c += std::abs(a(j, i));
                r += std::abs(a(i, j));
            }
            if (c == 0.0 || r == 0.0) continue;

            double f = 1.0;
            const double s = c + r;
            double g = r / radix;
            while (c < g) {
                f *= radix;
                c *= radix2;
            }
            g = r * radix;
            while (c >= g) {
                f /= radix;
                c /= radix2;
            }
            if ((c + r) / f < 0.95 * s) {
                done = false;
                scale[i] *= f;
                for (std::size_t j = 0; j < n; ++j) a(i, j) /= f;
                for (std::size_t j = 0; j < n; ++j) a(j, i) *= f;
            }
        }
    }
    return scale;
}

// Householder reduction to upper Hessenberg form, accumulating the orthogonal
// similarity into v. The Householder tails are left below the subdiagonal of
// h (the QR stage overwrites them as it runs).
void hessenberg(Matrix& h, Matrix& v) {
    const int n = static_cast<int>(h.rows());
    v = Matrix::identity(n);
    if (n < 3) return;
    Vector ort(n, 0.0);

    const int low = 0;
    const int high = n - 1;
    for (int m = low + 1; m <= high - 1; ++m) {
        double scale = 0.0;
        for (int i = m; i <= high; ++i) scale += std::abs(h(i, m - 1));
        if (scale == 0.0) continue;

        double hh = 0.0;
        for (int i = high; i >= m; --i) {
            ort[i] = h(i, m - 1) / scale;
            hh += ort[i] * ort[i];
        }
        double g = std::sqrt(hh);
        if (ort[m] > 0) g = -g;
        hh -= ort[m] * g;
        ort[m] -= g;

        for (int j = m; j < n; ++j) {
            double f = 0.0;
            for (int i = high; i >= m; --i) f += ort[i] * h(i, j);
            f /= hh;
            for (int i = m; i <= high; ++i) h(i, j) -= f * ort[i];
        }
        for (int i = 0; i <= high; ++i) {
            double f = 0.0;
            for (int j = high; j >= m; --j) f += ort[j] * h(i, j);
            f /= hh;
            for (int j = m; j <= high; ++j) h(i, j) -= f * ort[j];
        }
        ort[m] *= scale;
        h(m, m - 1) = scale * g;
    }

    for (int m = high - 1; m >= low + 1; --m) {
        if (h(m, m - 1) == 0.0) continue;
        for (int i = m + 1; i <= high; ++i) ort[i] = h(i, m - 1);
        for (int j = m; j <= high; ++j) {
            double g = 0.0;
            for (int i = m; i <= high; ++i) g += ort[i] * v(i, j);
            g = (g / ort[m]) / h(m, m - 1);
            for (int i = m; i <= high; ++i) v(i, j) += g * ort[i];
        }
    }
}

struct ComplexParts {
    double re = 0.0;
    double im = 0.0;
};

// Complex division (a + bi) / (c + di) without intermediate overflow.
ComplexParts cdiv(double a, double b, double c, double d) {
    if (std::abs(c) > std::abs(d)) {
        const double r = d / c;
        const double den = c + d * r;
        return {(a + b * r) / den, (b - a * r) / den};
    }
    const double r = c / d;
    const double den = c * r + d;
    return {(a * r + b) / den, (b * r - a) / den};
}

// Francis double-shift QR on a Hessenberg matrix, accumulating into v and
// back-substituting eigenvectors into the columns of h / v. On return d/e
// hold the real/imaginary eigenvalue parts; for a conjugate pair the entry
// with positive imaginary part comes first and columns (j, j+1) of v carry
// the real and imaginary eigenvector parts.
void schur_qr(Matrix& h, Matrix& v, Vector& d, Vector& e) {
    const int nn = static_cast<int>(h.rows());
    d.assign(nn, 0.0);
    e.assign(nn, 0.0);

    const int low = 0;
    const int high = nn - 1;
    double exshift = 0.0;
    double p = 0, q = 0, r = 0, s = 0, z = 0, t, w, x, y;

    double norm = 0.0;
    for (int i = 0; i < nn; ++i)
        for (int j = std::max(i - 1, 0); j < nn; ++j) norm += std::abs(h(i, j));

    int n = nn - 1;
    int iter = 0;
    long total_iter = 0;
    const long iter_cap = 100L * std::max(nn, 1);

    while (n >= low) {
        int l = n;
        while (l > low) {
            s = std::abs(h(l - 1, l - 1)) + std::abs(h(l, l));
            if (s == 0.0) s = norm;
            if (std::abs(h(l, l - 1)) < kEps * s) break;
            --l;
        }

        if (l == n) {
            // One real root.
            h(n, n) += exshift;
            d[n] = h(n, n);
            e[n] = 0.0;
            --n;
            iter = 0;
        } else if (l == n - 1) {
            // A 2x2 block: real pair or complex conjugate pair.
            w = h(n, n - 1) * h(n - 1, n);
            p = (h(n - 1, n - 1) - h(n, n)) / 2.0;
            q = p * p + w;
            z = std::sqrt(std::abs(q));
            h(n, n) += exshift;
            h(n - 1, n - 1) += exshift;
            x = h(n, n);

            if (q >= 0) {
                z = (p >= 0) ? p + z : p - z;
                d[n - 1] = x + z;
                d[n] = d[n - 1];
                if (z != 0.0) d[n] = x - w / z;
                e[n - 1] = 0.0;
                e[n] = 0.0;
                x = h(n, n - 1);
                s = std::abs(x) + std::abs(z);
                p = x / s;
                q = z / s;
                r = std::sqrt(p * p + q * q);
                p /= r;
                q /= r;
                for (int j = n - 1; j < nn; ++j) {
                    z = h(n - 1, j);
                    h(n - 1, j) = q * z + p * h(n, j);
                    h(n, j) = q * h(n, j) - p * z;
                }
                for (int i = 0; i <= n; ++i) {
                    z = h(i, n - 1);
                    h(i, n - 1) = q * z + p * h(i, n);
                    h(i, n) = q * h(i, n) - p * z;
                }
                for (int i = low; i <= high; ++i) {
                    z = v(i, n - 1);
                    v(i, n - 1) = q * z + p * v(i, n);
                    v(i, n) = q * v(i, n) - p * z;
                }
            } else {
                d[n - 1] = x + p;
                d[n] = x + p;
                e[n - 1] = z;
                e[n] = -z;
            }
            n -= 2;
            iter = 0;
        } else {
            // Shift selection.
            x = h(n, n);
            y = 0.0;
            w = 0.0;
            if (l < n) {
                y = h(n - 1, n - 1);
                w = h(n, n - 1) * h(n - 1, n);
            }

            if (iter == 10) {
                // Exceptional shift.
                exshift += x;
                for (int i = low; i <= n; ++i) h(i, i) -= x;
                s = std::abs(h(n, n - 1)) + std::abs(h(n - 1, n - 2));
                x = y = 0.75 * s;
                w = -0.4375 * s * s;
            }
            if (iter == 30) {
                s = (y - x) / 2.0;
                s = s * s + w;
                if (s > 0) {
                    s = std::sqrt(s);
                    if (y < x) s = -s;
                    s = x - w / ((y - x) / 2.0 + s);
                    for (int i = low; i <= n; ++i) h(i, i) -= s;
                    exshift += s;
                    x = y = w = 0.964;
                }
            }

            ++iter;
            if (++total_iter > iter_cap)
                throw EigenError("eigenvalues: QR iteration did not converge");

            // Two consecutive small subdiagonals let the sweep start late.
            int m = n - 2;
            while (m >= l) {
                z = h(m, m);
                r = x - z;
                s = y - z;
                p = (r * s - w) / h(m + 1, m) + h(m, m + 1);
                q = h(m + 1, m + 1) - z - r - s;
                r = h(m + 2, m + 1);
                s = std::abs(p) + std::abs(q) + std::abs(r);
                p /= s;
                q /= s;
                r /= s;
                if (m == l) break;
                if (std::abs(h(m, m - 1)) * (std::abs(q) + std::abs(r)) <
                    kEps * (std::abs(p) *
                            (std::abs(h(m - 1, m - 1)) + std::abs(z) + std::abs(h(m + 1, m + 1)))))
                    break;
                --m;
            }
            for (int i = m + 2; i <= n; ++i) {
                h(i, i - 2) = 0.0;
                if (i > m + 2) h(i, i - 3) = 0.0;
            }

            // Bulge chase over rows l..n, columns m..n.
            for (int k = m; k <= n - 1; ++k) {
                const bool notlast = (k != n - 1);
                if (k != m) {
                    p = h(k, k - 1);
                    q = h(k + 1, k - 1);
                    r = notlast ? h(k + 2, k - 1) : 0.0;
                    x = std::abs(p) + std::abs(q) + std::abs(r);
                    if (x == 0.0) continue;
                    p /= x;
                    q /= x;
                    r /= x;
                }
                s = std::sqrt(p * p + q * q + r * r);
                if (p < 0) s = -s;
                if (s == 0.0) continue;
                if (k != m)
                    h(k, k - 1) = -s * x;
                else if (l != m)
                    h(k, k - 1) = -h(k, k - 1);
                p += s;
                x = p / s;
                y = q / s;
                z = r / s;
                q /= p;
                r /= p;

                for (int j = k; j < nn; ++j) {
                    p = h(k, j) + q * h(k + 1, j);
                    if (notlast) {
                        p += r * h(k + 2, j);
                        h(k + 2, j) -= p * z;
                    }
                    h(k, j) -= p * x;
                    h(k + 1, j) -= p * y;
                }
                for (int i = 0; i <= std::min(n, k + 3); ++i) {
                    p = x * h(i, k) + y * h(i, k + 1);
                    if (notlast) {
                        p += z * h(i, k + 2);
                        h(i, k + 2) -= p * r;
                    }
                    h(i, k) -= p;
                    h(i, k + 1) -= p * q;
                }
                for (int i = low; i <= high; ++i) {
                    p = x * v(i, k) + y * v(i, k + 1);
                    if (notlast) {
                        p += z * v(i, k + 2);
                        v(i, k + 2) -= p * r;
                    }
                    v(i, k) -= p;
                    v(i, k + 1) -= p * q;
                }
            }
        }
    }

    if (norm == 0.0) return;

    // Back-substitute eigenvectors of the quasi-triangular form into the
    // columns of h, then transform by the accumulated v.
    for (n = nn - 1; n >= 0; --n) {
        p = d[n];
        q = e[n];

        if (q == 0) {
            int l = n;
            h(n, n) = 1.0;
            for (int i = n - 1; i >= 0; --i) {
                w = h(i, i) - p;
                r = 0.0;
                for (int j = l; j <= n; ++j) r += h(i, j) * h(j, n);
                if (e[i] < 0.0) {
                    z = w;
                    s = r;
                } else {
                    l = i;
                    if (e[i] == 0.0) {
                        h(i, n) = (w != 0.0) ? -r / w : -r / (kEps * norm);
                    } else {
                        x = h(i, i + 1);
                        y = h(i + 1, i);
                        q = (d[i] - p) * (d[i] - p) + e[i] * e[i];
                        t = (x * s - z * r) / q;
                        h(i, n) = t;
                        if (std::abs(x) > std::abs(z))
                            h(i + 1, n) = (-r - w * t) / x;
                        else
                            h(i + 1, n) = (-s - y * t) / z;
                    }
                    t = std::abs(h(i, n));
                    if ((kEps * t) * t > 1)
                        for (int j = i; j <= n; ++j) h(j, n) /= t;
                }
            }
        } else if (q < 0) {
            int l = n - 1;

            if (std::abs(h(n, n - 1)) > std::abs(h(n - 1, n))) {
                h(n - 1, n - 1) = q / h(n, n - 1);
                h(n - 1, n) = -(h(n, n) - p) / h(n, n - 1);
            } else {
                const auto c = cdiv(0.0, -h(n - 1, n), h(n - 1, n - 1) - p, q);
                h(n - 1, n - 1) = c.re;
                h(n - 1, n) = c.im;
            }
            h(n, n - 1) = 0.0;
            h(n, n) = 1.0;
            for (int i = n - 2; i >= 0; --i) {
                double ra = 0.0, sa = 0.0;
                for (int j = l; j <= n; ++j) {
                    ra += h(i, j) * h(j, n - 1);
                    sa += h(i, j) * h(j, n);
                }
                w = h(i, i) - p;

                if (e[i] < 0.0) {
                    z = w;
                    r = ra;
                    s = sa;
                } else {
                    l = i;
                    if (e[i] == 0) {
                        const auto c = cdiv(-ra, -sa, w, q);
                        h(i, n - 1) = c.re;
                        h(i, n) = c.im;
                    } else {
                        x = h(i, i + 1);
                        y = h(i + 1, i);
                        double vr = (d[i] - p) * (d[i] - p) + e[i] * e[i] - q * q;
                        double vi = (d[i] - p) * 2.0 * q;
                        if (vr == 0.0 && vi == 0.0)
                            vr = kEps * norm *
                                 (std::abs(w) + std::abs(q) + std::abs(x) + std::abs(y) +
                                  std::abs(z));
                        const auto c =
                            cdiv(x * r - z * ra + q * sa, x * s - z * sa - q * ra, vr, vi);
                        h(i, n - 1) = c.re;
                        h(i, n) = c.im;
                        if (std::abs(x) > std::abs(z) + std::abs(q)) {
                            h(i + 1, n - 1) = (-ra - w * h(i, n - 1) + q * h(i, n)) / x;
                            h(i + 1, n) = (-sa - w * h(i, n) - q * h(i, n - 1)) / x;
                        } else {
                            const auto c2 =
                                cdiv(-r - y * h(i, n - 1), -s - y * h(i, n), z, q);
                            h(i + 1, n - 1) = c2.re;
                            h(i + 1, n) = c2.im;
                        }
                    }
                    t = std::max(std::abs(h(i, n - 1)), std::abs(h(i, n)));
                    if ((kEps * t) * t > 1) {
                        for (int j = i; j <= n; ++j) {
                            h(j, n - 1) /= t;
                            h(j, n) /= t;
                        }
                    }
                }
            }
        }
    }

    for (int j = nn - 1; j >= low; --j) {
        for (int i = low; i <= high; ++i) {
            double zz = 0.0;
            for (int k = low; k <= std::min(j, high); ++k) zz += v(i, k) * h(k, j);
            v(i, j) = zz;
        }
    }
}

}  // namespace

ComplexSpectrum eigenvalues(const Matrix& m) {
    if (!m.square()) throw std::invalid_argument("eigenvalues: matrix must be square");
    const std::size_t n = m.rows();
    if (n > 128) throw std::invalid_argument("eigenvalues: supported up to n = 128");
    for (double x : m.data())
        if (!std::isfinite(x)) throw std::invalid_argument("eigenvalues: non-finite entry");

    ComplexSpectrum out;
    out.matrix_norm = spectral_norm(m);
    if (n == 0) return out;

    Matrix h = m;
    Vector scale = balance(h);
    Matrix v;
    hessenberg(h, v);
    Vector d, e;
    schur_qr(h, v, d, e);

    // Undo the balancing on the eigenvectors: if (D^-1 A D) w = lambda w
    // then A (D w) = lambda (D w).
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) v(i, j) *= scale[i];

    out.values.resize(n);
    out.vectors.assign(n, std::vector<std::complex<double>>(n));
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = {d[j], e[j]};
        if (e[j] == 0.0) {
            for (std::size_t i = 0; i < n; ++i) out.vectors[j][i] = v(i, j);
        } else if (e[j] > 0.0) {
            for (std::size_t i = 0; i < n; ++i) out.vectors[j][i] = {v(i, j), v(i, j + 1)};
        } else {
            for (std::size_t i = 0; i < n; ++i)
                out.vectors[j][i] = {v(i, j - 1), -v(i, j)};
        }
    }

    double worst = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
        auto& vec = out.vectors[j];
        double vn = 0.0;
        for (const auto& c : vec) vn += std::norm(c);
        vn = std::sqrt(vn);
        if (vn == 0.0) {
            worst = std::numeric_limits<double>::infinity();
            continue;
        }
        for (auto& c : vec) c /= vn;
        double rn = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            std::complex<double> acc = -out.values[j] * vec[i];
            for (std::size_t k = 0; k < n; ++k) acc += m(i, k) * vec[k];
            rn += std::norm(acc);
        }
        worst = std::max(worst, std::sqrt(rn));
    }
    out.residual = worst;
    return out;
}

SymmetricEigen symmetric_eigen(const Matrix& m, double sym_tol) {
    if (!m.square()) throw std::invalid_argument("symmetric_eigen: matrix must be square");
    const std::size_t n = m.rows();
    double asym = 0.0;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = i + 1; j < n; ++j)
            asym = std::max(asym, std::abs(m(i, j) - m(j, i)));
    if (asym > sym_tol * std::max(1.0, lin::max_abs(m)))
        throw std::invalid_argument("symmetric_eigen: matrix is not symmetric");

    Matrix a = 0.5 * (m + m.transposed());
    Matrix v = Matrix::identity(n);

    auto offdiag = [&]() {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) s += a(i, j) * a(i, j);
        return std::sqrt(2.0 * s);
    };

    const double tol = 1e-14 * std::max(1.0, lin::frobenius_norm(a));
    for (int sweep = 0; sweep < 100 && offdiag() > tol; ++sweep) {
        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                const double theta = (a(q, q) - a(p, p)) / (2.0 * apq);
                double t = (theta >= 0 ? 1.0 : -1.0) /
                           (std::abs(theta) + std::sqrt(theta * theta + 1.0));
                const double c = 1.0 / std::sqrt(t * t + 1.0);
                const double s = t * c;

                for (std::size_t k = 0; k < n; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                for (std::size_t k = 0; k < n; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return a(i, i) < a(j, j); });

    SymmetricEigen out;
    out.values.resize(n);
    out.vectors = Matrix(n, n);
    for (std::size_t k = 0; k < n; ++k) {
        out.values[k] = a(order[k], order[k]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

double spectral_norm(const Matrix& m) {
    if (m.rows() == 0) return 0.0;
    const Matrix mt = m.transposed();
    Matrix g = mt * m;
    g = 0.5 * (g + g.transposed());
    const auto se = symmetric_eigen(g);
    const double lmax = se.values.empty() ? 0.0 : se.values.back();
    return std::sqrt(std::max(0.0, lmax));
}

double spectral_radius_symmetric(const Matrix& m) {
    const auto se = symmetric_eigen(m);
    double r = 0.0;
    for (double v : se.values) r = std::max(r, std::abs(v));
    return r;
}

double multiset_distance(std::vector<std::complex<double>> a,
                         std::vector<std::complex<double>> b) {
    if (a.size() != b.size())
        throw std::invalid_argument("multiset_distance: size mismatch");
    double worst = 0.0;
    while (!a.empty()) {
        std::size_t bi = 0, bj = 0;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < a.size(); ++i) {
            for (std::size_t j = 0; j < b.size(); ++j) {
                const double dij = std::abs(a[i] - b[j]);
                if (dij < best) {
                    best = dij;
                    bi = i;
                    bj = j;
                }
            }
        }
        worst = std::max(worst, best);
        a.erase(a.begin() + static_cast<std::ptrdiff_t>(bi));
        b.erase(b.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    return worst;
}

}  // namespace blockdyn::eig
