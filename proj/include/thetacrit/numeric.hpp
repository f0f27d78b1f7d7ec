#pragma once

// Small dense numeric kernels used across the library: complex matrices of
// modest size (genus <= ~12), real symmetric eigenvalues, polynomial root
// finding, and branch-tracked square roots.  Everything is templated on the
// floating-point type so the same code serves the default (double) and the
// extended (long double) precision modes.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

namespace thetacrit {

template <typename T>
using cplx = std::complex<T>;

using ld = long double;

// ---------------------------------------------------------------------------
// complex square matrices, row-major
// ---------------------------------------------------------------------------

template <typename T>
struct CMat {
    int n = 0;
    std::vector<cplx<T>> a;

    CMat() = default;
    explicit CMat(int n_) : n(n_), a(static_cast<size_t>(n_) * n_) {}

    cplx<T>& operator()(int i, int j) { return a[static_cast<size_t>(i) * n + j]; }
    const cplx<T>& operator()(int i, int j) const { return a[static_cast<size_t>(i) * n + j]; }

    static CMat identity(int n_) {
        CMat m(n_);
        for (int i = 0; i < n_; ++i) m(i, i) = cplx<T>(1);
        return m;
    }
};

template <typename T>
CMat<T> cmul(const CMat<T>& x, const CMat<T>& y) {
    if (x.n != y.n) throw std::invalid_argument("cmul: size mismatch");
    CMat<T> r(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int k = 0; k < x.n; ++k) {
            const cplx<T> v = x(i, k);
            if (v == cplx<T>(0)) continue;
            for (int j = 0; j < x.n; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

template <typename T>
CMat<T> cadd(const CMat<T>& x, const CMat<T>& y) {
    CMat<T> r(x.n);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

template <typename T>
CMat<T> csub(const CMat<T>& x, const CMat<T>& y) {
    CMat<T> r(x.n);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

template <typename T>
CMat<T> cscale(const CMat<T>& x, cplx<T> s) {
    CMat<T> r(x.n);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] * s;
    return r;
}

template <typename T>
CMat<T> ctranspose(const CMat<T>& x) {
    CMat<T> r(x.n);
    for (int i = 0; i < x.n; ++i)
        for (int j = 0; j < x.n; ++j) r(j, i) = x(i, j);
    return r;
}

template <typename T>
T cmat_max_abs(const CMat<T>& x) {
    T m = 0;
    for (const auto& v : x.a) m = std::max(m, std::abs(v));
    return m;
}

// LU decomposition with partial pivoting; returns det and leaves the solver
// usable for several right-hand sides.
template <typename T>
struct CLU {
    int n = 0;
    std::vector<cplx<T>> lu;
    std::vector<int> piv;
    cplx<T> det{1};
    T min_pivot = 0, max_pivot = 0;

    explicit CLU(const CMat<T>& m) : n(m.n), lu(m.a), piv(m.n) {
        min_pivot = std::numeric_limits<T>::max();
        max_pivot = 0;
        for (int i = 0; i < n; ++i) piv[i] = i;
        for (int c = 0; c < n; ++c) {
            int best = c;
            T bv = std::abs(at(c, c));
            for (int r = c + 1; r < n; ++r) {
                T v = std::abs(at(r, c));
                if (v > bv) { bv = v; best = r; }
            }
            if (best != c) {
                for (int j = 0; j < n; ++j) std::swap(at(c, j), at(best, j));
                std::swap(piv[c], piv[best]);
                det = -det;
            }
            const cplx<T> p = at(c, c);
            const T ap = std::abs(p);
            min_pivot = std::min(min_pivot, ap);
            max_pivot = std::max(max_pivot, ap);
            det *= p;
            if (ap == T(0)) continue;  // singular; det becomes 0
            for (int r = c + 1; r < n; ++r) {
                const cplx<T> f = at(r, c) / p;
                at(r, c) = f;
                for (int j = c + 1; j < n; ++j) at(r, j) -= f * at(c, j);
            }
        }
    }

    cplx<T>& at(int i, int j) { return lu[static_cast<size_t>(i) * n + j]; }
    const cplx<T>& at(int i, int j) const { return lu[static_cast<size_t>(i) * n + j]; }

    bool singular(T rel = std::numeric_limits<T>::epsilon() * 1000) const {
        return min_pivot <= rel * std::max(max_pivot, T(1) * 0);
    }

    // Solve A x = b.
    std::vector<cplx<T>> solve(const std::vector<cplx<T>>& b) const {
        std::vector<cplx<T>> x(n);
        for (int i = 0; i < n; ++i) x[i] = b[piv[i]];
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < i; ++j) x[i] -= at(i, j) * x[j];
        for (int i = n - 1; i >= 0; --i) {
            for (int j = i + 1; j < n; ++j) x[i] -= at(i, j) * x[j];
            x[i] /= at(i, i);
        }
        return x;
    }
};

template <typename T>
cplx<T> cdet(const CMat<T>& m) {
    return CLU<T>(m).det;
}

template <typename T>
CMat<T> cinverse(const CMat<T>& m) {
    CLU<T> lu(m);
    if (lu.min_pivot == T(0)) throw std::runtime_error("cinverse: singular matrix");
    CMat<T> r(m.n);
    std::vector<cplx<T>> b(m.n);
    for (int j = 0; j < m.n; ++j) {
        std::fill(b.begin(), b.end(), cplx<T>(0));
        b[j] = cplx<T>(1);
        auto x = lu.solve(b);
        for (int i = 0; i < m.n; ++i) r(i, j) = x[i];
    }
    return r;
}

// Solve A X = B for matrices.
template <typename T>
CMat<T> csolve(const CMat<T>& a, const CMat<T>& b) {
    CLU<T> lu(a);
    if (lu.min_pivot == T(0)) throw std::runtime_error("csolve: singular matrix");
    CMat<T> x(a.n);
    std::vector<cplx<T>> col(a.n);
    for (int j = 0; j < a.n; ++j) {
        for (int i = 0; i < a.n; ++i) col[i] = b(i, j);
        auto s = lu.solve(col);
        for (int i = 0; i < a.n; ++i) x(i, j) = s[i];
    }
    return x;
}

// ---------------------------------------------------------------------------
// real symmetric eigenvalues (cyclic Jacobi) -- used for Im(tau) spectra and
// signatures of small real symmetric matrices
// ---------------------------------------------------------------------------

template <typename T>
std::vector<T> symmetric_eigenvalues(std::vector<T> a, int n) {
    if (n == 0) return {};
    auto at = [&](int i, int j) -> T& { return a[static_cast<size_t>(i) * n + j]; };
    for (int sweep = 0; sweep < 100; ++sweep) {
        T off = 0;
        for (int i = 0; i < n; ++i)
            for (int j = i + 1; j < n; ++j) off += at(i, j) * at(i, j);
        if (!(off > std::numeric_limits<T>::min())) break;
        T scale = 0;
        for (int i = 0; i < n; ++i) scale = std::max(scale, std::abs(at(i, i)));
        if (std::sqrt(off) <= std::numeric_limits<T>::epsilon() * std::max(scale, T(1)) * n * n) break;
        for (int p = 0; p < n; ++p)
            for (int q = p + 1; q < n; ++q) {
                if (at(p, q) == T(0)) continue;
                const T theta = (at(q, q) - at(p, p)) / (2 * at(p, q));
                const T t = (theta >= 0 ? T(1) : T(-1)) /
                            (std::abs(theta) + std::sqrt(theta * theta + 1));
                const T c = 1 / std::sqrt(t * t + 1);
                const T s = t * c;
                for (int k = 0; k < n; ++k) {
                    const T akp = at(k, p), akq = at(k, q);
                    at(k, p) = c * akp - s * akq;
                    at(k, q) = s * akp + c * akq;
                }
                for (int k = 0; k < n; ++k) {
                    const T apk = at(p, k), aqk = at(q, k);
                    at(p, k) = c * apk - s * aqk;
                    at(q, k) = s * apk + c * aqk;
                }
            }
    }
    std::vector<T> ev(n);
    for (int i = 0; i < n; ++i) ev[i] = at(i, i);
    std::sort(ev.begin(), ev.end());
    return ev;
}

// ---------------------------------------------------------------------------
// polynomial roots (Durand-Kerner with Newton polish)
// coeffs: c[0] + c[1] x + ... + c[deg] x^deg, c[deg] != 0
// ---------------------------------------------------------------------------

template <typename T>
cplx<T> poly_eval(const std::vector<cplx<T>>& c, cplx<T> x) {
    cplx<T> v(0);
    for (size_t i = c.size(); i-- > 0;) v = v * x + c[i];
    return v;
}

template <typename T>
cplx<T> poly_eval_deriv(const std::vector<cplx<T>>& c, cplx<T> x) {
    cplx<T> v(0);
    for (size_t i = c.size(); i-- > 1;) v = v * x + c[i] * T(i);
    return v;
}

template <typename T>
std::vector<cplx<T>> poly_roots(std::vector<cplx<T>> c) {
    // strip leading (high-order) zeros and trailing zero roots
    while (c.size() > 1 && std::abs(c.back()) == T(0)) c.pop_back();
    const int deg = static_cast<int>(c.size()) - 1;
    if (deg <= 0) return {};
    std::vector<cplx<T>> roots;
    int zero_roots = 0;
    while (zero_roots < deg && std::abs(c[zero_roots]) == T(0)) ++zero_roots;
    for (int i = 0; i < zero_roots; ++i) roots.push_back(cplx<T>(0));
    std::vector<cplx<T>> p(c.begin() + zero_roots, c.end());
    const int m = static_cast<int>(p.size()) - 1;
    if (m == 0) return roots;
    for (auto& v : p) v /= p.back();
    // Cauchy-style radius bound
    T radius = 0;
    for (int i = 0; i < m; ++i) radius = std::max(radius, std::pow(std::abs(p[i]), T(1) / T(m - i)));
    radius = 2 * radius + 1;
    std::vector<cplx<T>> z(m);
    const cplx<T> seed(T(0.4), T(0.9));
    cplx<T> w = seed;
    for (int i = 0; i < m; ++i) {
        z[i] = radius * w / std::abs(w);
        z[i] *= T(0.3) + T(0.7) * T(i + 1) / T(m);
        w *= seed;
    }
    for (int iter = 0; iter < 500; ++iter) {
        T moved = 0;
        for (int i = 0; i < m; ++i) {
            cplx<T> num = poly_eval(p, z[i]);
            cplx<T> den(1);
            for (int j = 0; j < m; ++j)
                if (j != i) den *= (z[i] - z[j]);
            if (std::abs(den) == T(0)) { z[i] += cplx<T>(T(1e-4), T(1e-4)); continue; }
            const cplx<T> step = num / den;
            z[i] -= step;
            moved = std::max(moved, std::abs(step));
        }
        if (moved < std::numeric_limits<T>::epsilon() * radius * 16) break;
    }
    // Newton polish
    for (int i = 0; i < m; ++i)
        for (int k = 0; k < 6; ++k) {
            const cplx<T> d = poly_eval_deriv(p, z[i]);
            if (std::abs(d) == T(0)) break;
            const cplx<T> step = poly_eval(p, z[i]) / d;
            z[i] -= step;
            if (std::abs(step) < std::numeric_limits<T>::epsilon() * (1 + std::abs(z[i]))) break;
        }
    roots.insert(roots.end(), z.begin(), z.end());
    return roots;
}

// characteristic polynomial of a complex matrix via the trace-recursion
// (Faddeev-LeVerrier); returns coeffs low->high of det(xI - A), monic.
template <typename T>
std::vector<cplx<T>> char_poly(const CMat<T>& a) {
    const int n = a.n;
    std::vector<cplx<T>> c(n + 1);
    c[n] = cplx<T>(1);
    CMat<T> m = CMat<T>::identity(n);
    for (int k = 1; k <= n; ++k) {
        m = cmul(a, m);
        cplx<T> tr(0);
        for (int i = 0; i < n; ++i) tr += m(i, i);
        const cplx<T> ck = -tr / T(k);
        c[n - k] = ck;
        for (int i = 0; i < n; ++i) m(i, i) += ck;
    }
    return c;
}

// eigenvalues of a general complex matrix (small n) through its
// characteristic polynomial
template <typename T>
std::vector<cplx<T>> complex_eigenvalues(const CMat<T>& a) {
    if (a.n == 1) return {a(0, 0)};
    if (a.n == 2) {
        const cplx<T> tr = a(0, 0) + a(1, 1);
        const cplx<T> det = a(0, 0) * a(1, 1) - a(0, 1) * a(1, 0);
        const cplx<T> disc = std::sqrt(tr * tr - T(4) * det);
        return {(tr + disc) / T(2), (tr - disc) / T(2)};
    }
    return poly_roots(char_poly(a));
}

// ---------------------------------------------------------------------------
// deterministic RNG helpers (fixed-seed reproducibility across platforms)
// ---------------------------------------------------------------------------

// splitmix64: tiny, stable generator independent of libstdc++ internals
struct Rng {
    std::uint64_t state;
    explicit Rng(std::uint64_t seed) : state(seed + 0x9e3779b97f4a7c15ULL) {}
    std::uint64_t next() {
        std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    // uniform in [0,1)
    double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
    // uniform integer in [lo, hi] inclusive
    long integer(long lo, long hi) {
        return lo + static_cast<long>(next() % static_cast<std::uint64_t>(hi - lo + 1));
    }
};

}  // namespace thetacrit
