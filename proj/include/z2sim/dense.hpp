#ifndef Z2SIM_DENSE_HPP
#define Z2SIM_DENSE_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <vector>

#include "z2sim/common.hpp"
#include "z2sim/pauli.hpp"

namespace z2sim {

// Small dense complex matrix, row-major.  Only used at oracle scale.
struct CMatrix {
    std::size_t n = 0;
    std::vector<cplx> a;

    CMatrix() = default;
    explicit CMatrix(std::size_t dim) : n(dim), a(dim * dim, cplx{0, 0}) {}

    static CMatrix identity(std::size_t dim) {
        CMatrix m(dim);
        for (std::size_t i = 0; i < dim; ++i) m(i, i) = 1.0;
        return m;
    }

    cplx& operator()(std::size_t r, std::size_t c) { return a[r * n + c]; }
    const cplx& operator()(std::size_t r, std::size_t c) const { return a[r * n + c]; }

    CMatrix operator*(const CMatrix& rhs) const {
        if (n != rhs.n) throw std::invalid_argument("matrix size mismatch");
        CMatrix out(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t k = 0; k < n; ++k) {
                const cplx aik = (*this)(i, k);
                if (aik == cplx{0, 0}) continue;
                for (std::size_t j = 0; j < n; ++j) out(i, j) += aik * rhs(k, j);
            }
        return out;
    }

    CMatrix adjoint() const {
        CMatrix out(n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out(i, j) = std::conj((*this)(j, i));
        return out;
    }

    std::vector<cplx> apply(const std::vector<cplx>& v) const {
        std::vector<cplx> out(n, cplx{0, 0});
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j) out[i] += (*this)(i, j) * v[j];
        return out;
    }
};

inline CMatrix kron(const CMatrix& a, const CMatrix& b) {
    CMatrix out(a.n * b.n);
    for (std::size_t i = 0; i < a.n; ++i)
        for (std::size_t j = 0; j < a.n; ++j)
            for (std::size_t k = 0; k < b.n; ++k)
                for (std::size_t l = 0; l < b.n; ++l)
                    out(i * b.n + k, j * b.n + l) = a(i, j) * b(k, l);
    return out;
}

inline double max_abs_diff(const CMatrix& a, const CMatrix& b) {
    if (a.n != b.n) throw std::invalid_argument("matrix size mismatch");
    double m = 0.0;
    for (std::size_t i = 0; i < a.a.size(); ++i) m = std::max(m, std::abs(a.a[i] - b.a[i]));
    return m;
}

// max |a - e^{i phi} b| with the phase fixed from the largest entry of a.
inline double max_abs_diff_up_to_phase(const CMatrix& a, const CMatrix& b) {
    if (a.n != b.n) throw std::invalid_argument("matrix size mismatch");
    std::size_t ref = 0;
    for (std::size_t i = 0; i < a.a.size(); ++i)
        if (std::abs(a.a[i]) > std::abs(a.a[ref])) ref = i;
    if (std::abs(b.a[ref]) < 1e-300) return max_abs_diff(a, b);
    const cplx phase = (a.a[ref] / b.a[ref]) / std::abs(a.a[ref] / b.a[ref]);
    double m = 0.0;
    for (std::size_t i = 0; i < a.a.size(); ++i)
        m = std::max(m, std::abs(a.a[i] - phase * b.a[i]));
    return m;
}

// Dense matrix of a Pauli string on an n-qubit register, in the register's
// bit convention (qubit q = bit q of the basis index; bit 0 = |up>).
inline CMatrix pauli_dense(const PauliString& p, int n_qubits) {
    const std::size_t dim = std::size_t{1} << n_qubits;
    CMatrix out(dim);
    for (std::size_t b = 0; b < dim; ++b) out(b ^ p.x_mask(), b) = p.basis_coefficient(b);
    return out;
}

// exp(-i phi P) for involutory Hermitian P: cos(phi) 1 - i sin(phi) P.
inline CMatrix rotation_dense(const PauliString& p, double phi, int n_qubits) {
    CMatrix out = pauli_dense(p, n_qubits);
    const cplx f{0.0, -std::sin(phi)};
    for (auto& v : out.a) v *= f;
    const double c = std::cos(phi);
    for (std::size_t i = 0; i < out.n; ++i) out(i, i) += c;
    return out;
}

// ---------------------------------------------------------------------------
// Real-symmetric eigensolver: Householder tridiagonalization followed by
// implicit-shift QL.  Returns all eigenpairs, ascending.

struct SymmetricEigen {
    int n = 0;
    std::vector<double> values;   // ascending
    std::vector<double> vectors;  // row-major; column j = eigenvector j
    double vec(int i, int j) const { return vectors[static_cast<std::size_t>(i) * n + j]; }
};

namespace detail {

inline void tred2(std::vector<double>& a, int n, std::vector<double>& d, std::vector<double>& e) {
    for (int i = n - 1; i >= 1; --i) {
        const int l = i - 1;
        double h = 0.0, scale = 0.0;
        if (l > 0) {
            for (int k = 0; k <= l; ++k) scale += std::abs(a[i * n + k]);
            if (scale == 0.0) {
                e[i] = a[i * n + l];
            } else {
                for (int k = 0; k <= l; ++k) {
                    a[i * n + k] /= scale;
                    h += a[i * n + k] * a[i * n + k];
                }
                double f = a[i * n + l];
                double g = (f >= 0.0) ? -std::sqrt(h) : std::sqrt(h);
                e[i] = scale * g;
                h -= f * g;
                a[i * n + l] = f - g;
                f = 0.0;
                for (int j = 0; j <= l; ++j) {
                    a[j * n + i] = a[i * n + j] / h;
                    g = 0.0;
                    for (int k = 0; k <= j; ++k) g += a[j * n + k] * a[i * n + k];
                    for (int k = j + 1; k <= l; ++k) g += a[k * n + j] * a[i * n + k];
                    e[j] = g / h;
                    f += e[j] * a[i * n + j];
                }
                const double hh = f / (h + h);
                for (int j = 0; j <= l; ++j) {
                    f = a[i * n + j];
                    e[j] = g = e[j] - hh * f;
                    for (int k = 0; k <= j; ++k)
                        a[j * n + k] -= f * e[k] + g * a[i * n + k];
                }
            }
        } else {
            e[i] = a[i * n + l];
        }
        d[i] = h;
    }
    d[0] = 0.0;
    e[0] = 0.0;
    for (int i = 0; i < n; ++i) {
        const int l = i - 1;
        if (d[i] != 0.0) {
            for (int j = 0; j <= l; ++j) {
                double g = 0.0;
                for (int k = 0; k <= l; ++k) g += a[i * n + k] * a[k * n + j];
                for (int k = 0; k <= l; ++k) a[k * n + j] -= g * a[k * n + i];
            }
        }
        d[i] = a[i * n + i];
        a[i * n + i] = 1.0;
        for (int j = 0; j <= l; ++j) a[j * n + i] = a[i * n + j] = 0.0;
    }
}

// d = diagonal, e = subdiagonal in e[1..n-1]; z accumulates eigenvectors
// (pass identity to diagonalize a raw tridiagonal matrix).
inline void tql2(std::vector<double>& d, std::vector<double>& e, std::vector<double>& z, int n) {
    if (n == 1) return;
    for (int i = 1; i < n; ++i) e[i - 1] = e[i];
    e[n - 1] = 0.0;
    for (int l = 0; l < n; ++l) {
        int iter = 0;
        int m;
        do {
            for (m = l; m < n - 1; ++m) {
                const double dd = std::abs(d[m]) + std::abs(d[m + 1]);
                if (std::abs(e[m]) <= std::numeric_limits<double>::epsilon() * dd) break;
            }
            if (m != l) {
                if (iter++ == 60)
                    throw ConvergenceError("tridiagonal QL failed to converge");
                double g = (d[l + 1] - d[l]) / (2.0 * e[l]);
                double r = std::hypot(g, 1.0);
                g = d[m] - d[l] + e[l] / (g + (g >= 0.0 ? std::abs(r) : -std::abs(r)));
                double s = 1.0, c = 1.0, p = 0.0;
                int i = m - 1;
                for (; i >= l; --i) {
                    double f = s * e[i];
                    const double b = c * e[i];
                    r = std::hypot(f, g);
                    e[i + 1] = r;
                    if (r == 0.0) {
                        d[i + 1] -= p;
                        e[m] = 0.0;
                        break;
                    }
                    s = f / r;
                    c = g / r;
                    g = d[i + 1] - p;
                    r = (d[i] - g) * s + 2.0 * c * b;
                    p = s * r;
                    d[i + 1] = g + p;
                    g = c * r - b;
                    for (int k = 0; k < n; ++k) {
                        f = z[static_cast<std::size_t>(k) * n + i + 1];
                        z[static_cast<std::size_t>(k) * n + i + 1] =
                            s * z[static_cast<std::size_t>(k) * n + i] + c * f;
                        z[static_cast<std::size_t>(k) * n + i] =
                            c * z[static_cast<std::size_t>(k) * n + i] - s * f;
                    }
                }
                if (r == 0.0 && i >= l) continue;
                d[l] -= p;
                e[l] = g;
                e[m] = 0.0;
            }
        } while (m != l);
    }
}

}  // namespace detail

// Diagonalizes a real symmetric matrix (row-major, size n*n).
inline SymmetricEigen symmetric_eigensolve(std::vector<double> a, int n) {
    if (static_cast<std::size_t>(n) * n != a.size())
        throw std::invalid_argument("matrix size mismatch");
    SymmetricEigen out;
    out.n = n;
    out.values.assign(n, 0.0);
    std::vector<double> e(n, 0.0);
    detail::tred2(a, n, out.values, e);
    detail::tql2(out.values, e, a, n);
    // sort ascending, permuting columns
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(),
              [&](int i, int j) { return out.values[i] < out.values[j]; });
    std::vector<double> vals(n);
    std::vector<double> vecs(static_cast<std::size_t>(n) * n);
    for (int j = 0; j < n; ++j) {
        vals[j] = out.values[idx[j]];
        for (int i = 0; i < n; ++i)
            vecs[static_cast<std::size_t>(i) * n + j] = a[static_cast<std::size_t>(i) * n + idx[j]];
    }
    out.values = std::move(vals);
    out.vectors = std::move(vecs);
    return out;
}

// Diagonalizes a symmetric tridiagonal matrix given by diag/subdiag.
inline SymmetricEigen tridiagonal_eigensolve(std::vector<double> diag,
                                             std::vector<double> subdiag) {
    const int n = static_cast<int>(diag.size());
    SymmetricEigen out;
    out.n = n;
    std::vector<double> e(n, 0.0);
    for (int i = 1; i < n; ++i) e[i] = subdiag[i - 1];
    std::vector<double> z(static_cast<std::size_t>(n) * n, 0.0);
    for (int i = 0; i < n; ++i) z[static_cast<std::size_t>(i) * n + i] = 1.0;
    detail::tql2(diag, e, z, n);
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int i, int j) { return diag[i] < diag[j]; });
    out.values.resize(n);
    out.vectors.assign(static_cast<std::size_t>(n) * n, 0.0);
    for (int j = 0; j < n; ++j) {
        out.values[j] = diag[idx[j]];
        for (int i = 0; i < n; ++i)
            out.vectors[static_cast<std::size_t>(i) * n + j] =
                z[static_cast<std::size_t>(i) * n + idx[j]];
    }
    return out;
}

// exp(-i H t) v from a full eigendecomposition of real-symmetric H.
inline std::vector<cplx> propagate_dense(const SymmetricEigen& eig, double t,
                                         const std::vector<cplx>& v) {
    const int n = eig.n;
    std::vector<cplx> coef(n, cplx{0, 0});
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < n; ++i) coef[j] += eig.vec(i, j) * v[i];
    for (int j = 0; j < n; ++j) coef[j] *= std::polar(1.0, -eig.values[j] * t);
    std::vector<cplx> out(n, cplx{0, 0});
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[i] += eig.vec(i, j) * coef[j];
    return out;
}

}  // namespace z2sim

#endif
