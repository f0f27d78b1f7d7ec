#pragma once

// Exact integer / rational linear algebra on top of GMP: Smith and Hermite
// normal forms with transform tracking, integer kernels, lattice
// intersection, a symplectic Gram-Schmidt for unimodular alternating forms,
// 2-adic congruence helpers and continued-fraction rationalization.

#include <gmpxx.h>

#include <algorithm>
#include <cstdlib>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "numeric.hpp"

namespace thetacrit {

using Int = mpz_class;
using Rat = mpq_class;

inline Rat make_rat(const Int& num, const Int& den) {
    if (den == 0) throw std::invalid_argument("make_rat: zero denominator");
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline Rat make_rat(long num, long den) { return make_rat(Int(num), Int(den)); }

// ---------------------------------------------------------------------------
// matrices
// ---------------------------------------------------------------------------

struct IntMat {
    int rows = 0, cols = 0;
    std::vector<Int> a;

    IntMat() = default;
    IntMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}
    IntMat(int r, int c, std::vector<long> vals) : rows(r), cols(c) {
        if (static_cast<int>(vals.size()) != r * c)
            throw std::invalid_argument("IntMat: initializer size mismatch");
        a.reserve(vals.size());
        for (long v : vals) a.emplace_back(v);
    }

    Int& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Int& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static IntMat identity(int n) {
        IntMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    bool operator==(const IntMat& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

struct RatMat {
    int rows = 0, cols = 0;
    std::vector<Rat> a;

    RatMat() = default;
    RatMat(int r, int c) : rows(r), cols(c), a(static_cast<size_t>(r) * c) {}

    Rat& operator()(int i, int j) { return a[static_cast<size_t>(i) * cols + j]; }
    const Rat& operator()(int i, int j) const { return a[static_cast<size_t>(i) * cols + j]; }

    static RatMat identity(int n) {
        RatMat m(n, n);
        for (int i = 0; i < n; ++i) m(i, i) = 1;
        return m;
    }

    bool operator==(const RatMat& o) const {
        return rows == o.rows && cols == o.cols && a == o.a;
    }
};

inline RatMat to_rat(const IntMat& m) {
    RatMat r(m.rows, m.cols);
    for (size_t i = 0; i < m.a.size(); ++i) r.a[i] = Rat(m.a[i]);
    return r;
}

inline bool is_integral(const RatMat& m) {
    for (const auto& v : m.a)
        if (v.get_den() != 1) return false;
    return true;
}

inline IntMat to_int(const RatMat& m) {
    if (!is_integral(m)) throw std::runtime_error("to_int: matrix has non-integer entries");
    IntMat r(m.rows, m.cols);
    for (size_t i = 0; i < m.a.size(); ++i) r.a[i] = m.a[i].get_num();
    return r;
}

inline IntMat imul(const IntMat& x, const IntMat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("imul: size mismatch");
    IntMat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const Int& v = x(i, k);
            if (v == 0) continue;
            for (int j = 0; j < y.cols; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

inline IntMat iadd(const IntMat& x, const IntMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("iadd: size mismatch");
    IntMat r(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

inline IntMat isub(const IntMat& x, const IntMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("isub: size mismatch");
    IntMat r(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

inline IntMat iscale(const IntMat& x, const Int& s) {
    IntMat r(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] * s;
    return r;
}

inline IntMat itranspose(const IntMat& x) {
    IntMat r(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
    return r;
}

inline RatMat rmul(const RatMat& x, const RatMat& y) {
    if (x.cols != y.rows) throw std::invalid_argument("rmul: size mismatch");
    RatMat r(x.rows, y.cols);
    for (int i = 0; i < x.rows; ++i)
        for (int k = 0; k < x.cols; ++k) {
            const Rat& v = x(i, k);
            if (v == 0) continue;
            for (int j = 0; j < y.cols; ++j) r(i, j) += v * y(k, j);
        }
    return r;
}

inline RatMat radd(const RatMat& x, const RatMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("radd: size mismatch");
    RatMat r(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] + y.a[i];
    return r;
}

inline RatMat rsub(const RatMat& x, const RatMat& y) {
    if (x.rows != y.rows || x.cols != y.cols) throw std::invalid_argument("rsub: size mismatch");
    RatMat r(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] - y.a[i];
    return r;
}

inline RatMat rscale(const RatMat& x, const Rat& s) {
    RatMat r(x.rows, x.cols);
    for (size_t i = 0; i < x.a.size(); ++i) r.a[i] = x.a[i] * s;
    return r;
}

inline RatMat rtranspose(const RatMat& x) {
    RatMat r(x.cols, x.rows);
    for (int i = 0; i < x.rows; ++i)
        for (int j = 0; j < x.cols; ++j) r(j, i) = x(i, j);
    return r;
}

// exact Gauss-Jordan inverse; throws on singular input
inline RatMat rinverse(const RatMat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("rinverse: not square");
    const int n = m.rows;
    RatMat w = m, inv = RatMat::identity(n);
    for (int c = 0; c < n; ++c) {
        int p = -1;
        for (int r = c; r < n; ++r)
            if (w(r, c) != 0) { p = r; break; }
        if (p < 0) throw std::runtime_error("rinverse: singular matrix");
        if (p != c)
            for (int j = 0; j < n; ++j) {
                std::swap(w(c, j), w(p, j));
                std::swap(inv(c, j), inv(p, j));
            }
        const Rat piv = w(c, c);
        for (int j = 0; j < n; ++j) { w(c, j) /= piv; inv(c, j) /= piv; }
        for (int r = 0; r < n; ++r) {
            if (r == c || w(r, c) == 0) continue;
            const Rat f = w(r, c);
            for (int j = 0; j < n; ++j) {
                w(r, j) -= f * w(c, j);
                inv(r, j) -= f * inv(c, j);
            }
        }
    }
    return inv;
}

inline Rat rdet(const RatMat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("rdet: not square");
    const int n = m.rows;
    RatMat w = m;
    Rat det(1);
    for (int c = 0; c < n; ++c) {
        int p = -1;
        for (int r = c; r < n; ++r)
            if (w(r, c) != 0) { p = r; break; }
        if (p < 0) return Rat(0);
        if (p != c) {
            for (int j = c; j < n; ++j) std::swap(w(c, j), w(p, j));
            det = -det;
        }
        det *= w(c, c);
        for (int r = c + 1; r < n; ++r) {
            if (w(r, c) == 0) continue;
            const Rat f = w(r, c) / w(c, c);
            for (int j = c; j < n; ++j) w(r, j) -= f * w(c, j);
        }
    }
    return det;
}

inline Int idet(const IntMat& m) {
    const Rat d = rdet(to_rat(m));
    if (d.get_den() != 1) throw std::logic_error("idet: non-integer determinant");
    return d.get_num();
}

// ---------------------------------------------------------------------------
// Smith normal form with transforms: d = u * m * v, u and v unimodular,
// d diagonal with d_1 | d_2 | ... | d_r > 0 followed by zeros.
// ---------------------------------------------------------------------------

struct SmithResult {
    IntMat d, u, v;
    int rank = 0;
};

inline SmithResult smith_normal_form(const IntMat& m) {
    SmithResult res{m, IntMat::identity(m.rows), IntMat::identity(m.cols), 0};
    IntMat& d = res.d;
    IntMat& u = res.u;
    IntMat& v = res.v;

    auto swap_rows = [&](int r1, int r2) {
        if (r1 == r2) return;
        for (int j = 0; j < d.cols; ++j) std::swap(d(r1, j), d(r2, j));
        for (int j = 0; j < u.cols; ++j) std::swap(u(r1, j), u(r2, j));
    };
    auto swap_cols = [&](int c1, int c2) {
        if (c1 == c2) return;
        for (int i = 0; i < d.rows; ++i) std::swap(d(i, c1), d(i, c2));
        for (int i = 0; i < v.rows; ++i) std::swap(v(i, c1), v(i, c2));
    };
    auto add_row = [&](int dst, int src, const Int& f) {  // row_dst += f * row_src
        for (int j = 0; j < d.cols; ++j) d(dst, j) += f * d(src, j);
        for (int j = 0; j < u.cols; ++j) u(dst, j) += f * u(src, j);
    };
    auto add_col = [&](int dst, int src, const Int& f) {  // col_dst += f * col_src
        for (int i = 0; i < d.rows; ++i) d(i, dst) += f * d(i, src);
        for (int i = 0; i < v.rows; ++i) v(i, dst) += f * v(i, src);
    };
    auto negate_row = [&](int r) {
        for (int j = 0; j < d.cols; ++j) d(r, j) = -d(r, j);
        for (int j = 0; j < u.cols; ++j) u(r, j) = -u(r, j);
    };

    const int tmax = std::min(m.rows, m.cols);
    for (int t = 0; t < tmax; ++t) {
        // locate minimal nonzero entry in the working submatrix
        auto find_pivot = [&]() -> std::pair<int, int> {
            int bi = -1, bj = -1;
            Int best;
            for (int i = t; i < d.rows; ++i)
                for (int j = t; j < d.cols; ++j) {
                    if (d(i, j) == 0) continue;
                    Int av = abs(d(i, j));
                    if (bi < 0 || av < best) { best = av; bi = i; bj = j; }
                }
            return {bi, bj};
        };

        bool submatrix_empty = false;
        for (int guard = 0;; ++guard) {
            if (guard > 10000) throw std::logic_error("smith_normal_form: no convergence");
            auto [pi, pj] = find_pivot();
            if (pi < 0) { submatrix_empty = true; break; }
            swap_rows(t, pi);
            swap_cols(t, pj);
            bool clean = true;
            for (int r = t + 1; r < d.rows; ++r) {
                if (d(r, t) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), d(r, t).get_mpz_t(), d(t, t).get_mpz_t());
                add_row(r, t, -q);
                if (d(r, t) != 0) clean = false;
            }
            for (int c = t + 1; c < d.cols; ++c) {
                if (d(t, c) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), d(t, c).get_mpz_t(), d(t, t).get_mpz_t());
                add_col(c, t, -q);
                if (d(t, c) != 0) clean = false;
            }
            if (!clean) continue;
            // pivot must divide every remaining entry
            int oi = -1;
            for (int i = t + 1; i < d.rows && oi < 0; ++i)
                for (int j = t + 1; j < d.cols; ++j)
                    if (d(i, j) % d(t, t) != 0) { oi = i; break; }
            if (oi >= 0) {
                add_row(t, oi, 1);
                continue;
            }
            break;
        }
        if (submatrix_empty) break;
        if (d(t, t) < 0) negate_row(t);
        res.rank = t + 1;
    }
    return res;
}

// ---------------------------------------------------------------------------
// column-style Hermite normal form for square nonsingular matrices:
// h = m * u with u unimodular, h upper triangular, positive diagonal,
// and 0 <= h(i,j) < h(i,i) for j > i.
// ---------------------------------------------------------------------------

struct HermiteResult {
    IntMat h, u;
};

inline HermiteResult hermite_upper(const IntMat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("hermite_upper: not square");
    const int n = m.rows;
    HermiteResult res{m, IntMat::identity(n)};
    IntMat& h = res.h;
    IntMat& u = res.u;

    auto swap_cols = [&](int c1, int c2) {
        if (c1 == c2) return;
        for (int i = 0; i < n; ++i) { std::swap(h(i, c1), h(i, c2)); std::swap(u(i, c1), u(i, c2)); }
    };
    auto add_col = [&](int dst, int src, const Int& f) {
        for (int i = 0; i < n; ++i) { h(i, dst) += f * h(i, src); u(i, dst) += f * u(i, src); }
    };
    auto negate_col = [&](int c) {
        for (int i = 0; i < n; ++i) { h(i, c) = -h(i, c); u(i, c) = -u(i, c); }
    };

    for (int i = n - 1; i >= 0; --i) {
        // gcd-collect the entries of row i among columns 0..i into column i
        for (int guard = 0;; ++guard) {
            if (guard > 10000) throw std::logic_error("hermite_upper: no convergence");
            int p = -1;
            Int best;
            for (int c = 0; c <= i; ++c) {
                if (h(i, c) == 0) continue;
                Int av = abs(h(i, c));
                if (p < 0 || av < best) { best = av; p = c; }
            }
            if (p < 0) throw std::runtime_error("hermite_upper: rank-deficient input");
            swap_cols(p, i);
            bool clean = true;
            for (int c = 0; c < i; ++c) {
                if (h(i, c) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), h(i, c).get_mpz_t(), h(i, i).get_mpz_t());
                add_col(c, i, -q);
                if (h(i, c) != 0) clean = false;
            }
            if (clean) break;
        }
        if (h(i, i) < 0) negate_col(i);
        for (int c = i + 1; c < n; ++c) {
            Int q;
            mpz_fdiv_q(q.get_mpz_t(), h(i, c).get_mpz_t(), h(i, i).get_mpz_t());
            if (q != 0) add_col(c, i, -q);
        }
    }
    return res;
}

// ---------------------------------------------------------------------------
// integer kernel (columns span the saturated kernel lattice of x -> m x)
// ---------------------------------------------------------------------------

inline IntMat kernel_basis(const IntMat& m) {
    SmithResult s = smith_normal_form(m);
    const int k = m.cols - s.rank;
    IntMat res(m.cols, k);
    for (int j = 0; j < k; ++j)
        for (int i = 0; i < m.cols; ++i) res(i, j) = s.v(i, s.rank + j);
    return res;
}

// intersection of the column lattices of two nonsingular square matrices,
// returned as a Hermite-reduced column basis
inline IntMat lattice_intersection(const IntMat& a, const IntMat& b) {
    if (a.rows != a.cols || b.rows != b.cols || a.rows != b.rows)
        throw std::invalid_argument("lattice_intersection: need equal square sizes");
    const int n = a.rows;
    IntMat stacked(n, 2 * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            stacked(i, j) = a(i, j);
            stacked(i, n + j) = -b(i, j);
        }
    IntMat ker = kernel_basis(stacked);
    if (ker.cols != n)
        throw std::runtime_error("lattice_intersection: unexpected kernel rank (singular input?)");
    IntMat top(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) top(i, j) = ker(i, j);
    return hermite_upper(imul(a, top)).h;
}

// ---------------------------------------------------------------------------
// number-theory helpers
// ---------------------------------------------------------------------------

inline int jacobi_symbol(const Int& a, const Int& n) {
    if (n <= 0 || n % 2 == 0) throw std::invalid_argument("jacobi_symbol: modulus must be odd positive");
    return mpz_jacobi(a.get_mpz_t(), n.get_mpz_t());
}

inline Int gcd_int(const Int& a, const Int& b) {
    Int g;
    mpz_gcd(g.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

// g = gcd(a,b) = s*a + t*b
inline Int gcd_ext(const Int& a, const Int& b, Int& s, Int& t) {
    Int g;
    mpz_gcdext(g.get_mpz_t(), s.get_mpz_t(), t.get_mpz_t(), a.get_mpz_t(), b.get_mpz_t());
    return g;
}

inline std::optional<Int> isqrt_checked(const Int& n) {
    if (n < 0) return std::nullopt;
    Int r, rem;
    mpz_sqrtrem(r.get_mpz_t(), rem.get_mpz_t(), n.get_mpz_t());
    if (rem != 0) return std::nullopt;
    return r;
}

inline int v2(const Int& n) {
    if (n == 0) throw std::invalid_argument("v2: valuation of zero");
    return static_cast<int>(mpz_scan1(n.get_mpz_t(), 0));
}

// true iff r lies in Z localized at 2 (odd denominator)
inline bool is_2adic_integer(const Rat& r) { return r.get_den() % 2 != 0; }

inline bool is_2adic_integral(const RatMat& m) {
    for (const auto& v : m.a)
        if (!is_2adic_integer(v)) return false;
    return true;
}

// residue of a 2-adic integer modulo 2^k, in [0, 2^k)
inline Int mod_2k(const Rat& r, int k) {
    if (!is_2adic_integer(r)) throw std::invalid_argument("mod_2k: even denominator");
    const Int mod = Int(1) << k;
    Int dinv;
    if (mpz_invert(dinv.get_mpz_t(), r.get_den().get_mpz_t(), mod.get_mpz_t()) == 0)
        throw std::logic_error("mod_2k: inversion failed");
    Int res = (r.get_num() % mod) * dinv % mod;
    if (res < 0) res += mod;
    return res;
}

// residue of a rational with denominator coprime to mod, in [0, mod)
inline Int mod_n(const Rat& r, const Int& mod) {
    Int dinv;
    if (mpz_invert(dinv.get_mpz_t(), r.get_den().get_mpz_t(), mod.get_mpz_t()) == 0)
        throw std::invalid_argument("mod_n: denominator not invertible");
    Int res = (r.get_num() % mod) * dinv % mod;
    if (res < 0) res += mod;
    return res;
}

// continued-fraction rationalization of a float, with verification
inline std::optional<Rat> rationalize(long double x, const Int& max_den, long double tol) {
    Int p0 = 0, q0 = 1;  // h_{-2}/k_{-2}
    Int p1 = 1, q1 = 0;  // h_{-1}/k_{-1}; holds the current convergent after each step
    long double rem = x;
    for (int iter = 0; iter < 64; ++iter) {
        const long double fl = std::floor(rem);
        if (fl > 1e18L || fl < -1e18L) return std::nullopt;
        const Int a(static_cast<long>(fl));
        const Int p2 = a * p1 + p0;
        const Int q2 = a * q1 + q0;
        if (q2 > max_den) break;
        p0 = p1; q0 = q1; p1 = p2; q1 = q2;
        const long double frac = rem - fl;
        const long double approx =
            std::abs(static_cast<long double>(p1.get_d()) / static_cast<long double>(q1.get_d()) - x);
        if (approx <= tol) break;
        if (frac < 1e-18L) break;
        rem = 1.0L / frac;
    }
    if (q1 == 0) return std::nullopt;
    Rat r(p1, q1);
    r.canonicalize();
    const long double err = std::abs(
        static_cast<long double>(r.get_num().get_d()) / static_cast<long double>(r.get_den().get_d()) - x);
    if (err > tol) return std::nullopt;
    return r;
}

// ---------------------------------------------------------------------------
// symplectic Gram-Schmidt: given an alternating unimodular Gram matrix G of
// even size 2g, produce unimodular P with  tP G P = J,  J = [[0,I],[-I,0]].
// Throws if the form is degenerate or not unimodular.
// ---------------------------------------------------------------------------

inline IntMat standard_symplectic_form(int g) {
    IntMat j(2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        j(i, g + i) = 1;
        j(g + i, i) = -1;
    }
    return j;
}

inline IntMat symplectic_basis(const IntMat& gram) {
    if (gram.rows != gram.cols || gram.rows % 2 != 0)
        throw std::invalid_argument("symplectic_basis: need even square size");
    const int n = gram.rows, g = n / 2;
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            if (gram(i, j) != -gram(j, i))
                throw std::invalid_argument("symplectic_basis: form not alternating");

    IntMat w = gram, p = IntMat::identity(n);
    auto swap_vec = [&](int c1, int c2) {
        if (c1 == c2) return;
        for (int i = 0; i < n; ++i) { std::swap(p(i, c1), p(i, c2)); std::swap(w(i, c1), w(i, c2)); }
        for (int j = 0; j < n; ++j) std::swap(w(c1, j), w(c2, j));
    };
    auto add_vec = [&](int dst, int src, const Int& f) {  // v_dst += f * v_src
        for (int i = 0; i < n; ++i) p(i, dst) += f * p(i, src);
        for (int i = 0; i < n; ++i) w(i, dst) += f * w(i, src);
        for (int j = 0; j < n; ++j) w(dst, j) += f * w(src, j);
    };

    for (int pair = 0; pair < g; ++pair) {
        const int base = 2 * pair;
        for (int guard = 0;; ++guard) {
            if (guard > 10000) throw std::logic_error("symplectic_basis: no convergence");
            int bi = -1, bj = -1;
            Int best;
            for (int i = base; i < n; ++i)
                for (int j = i + 1; j < n; ++j) {
                    if (w(i, j) == 0) continue;
                    Int av = abs(w(i, j));
                    if (bi < 0 || av < best) { best = av; bi = i; bj = j; }
                }
            if (bi < 0) throw std::runtime_error("symplectic_basis: degenerate form");
            swap_vec(base, bi);
            if (bj == base) bj = bi;  // tracked the swap
            swap_vec(base + 1, bj);
            const Int e = w(base, base + 1);
            bool clean = true;
            for (int k = base + 2; k < n; ++k) {
                if (w(base, k) != 0) {
                    Int q;
                    mpz_fdiv_q(q.get_mpz_t(), w(base, k).get_mpz_t(), e.get_mpz_t());
                    add_vec(k, base + 1, -q);
                    if (w(base, k) != 0) clean = false;
                }
                if (w(base + 1, k) != 0) {
                    const Int me = -e;
                    Int q;
                    mpz_fdiv_q(q.get_mpz_t(), w(base + 1, k).get_mpz_t(), me.get_mpz_t());
                    add_vec(k, base, -q);
                    if (w(base + 1, k) != 0) clean = false;
                }
            }
            if (!clean) continue;
            if (w(base, base + 1) < 0) swap_vec(base, base + 1);
            if (w(base, base + 1) != 1)
                throw std::runtime_error("symplectic_basis: form not unimodular (pivot != 1)");
            break;
        }
    }
    // reorder interleaved pairs (e1 f1 e2 f2 ...) into (e1..eg f1..fg)
    IntMat res(n, n);
    for (int k = 0; k < g; ++k)
        for (int i = 0; i < n; ++i) {
            res(i, k) = p(i, 2 * k);
            res(i, g + k) = p(i, 2 * k + 1);
        }
    IntMat check = imul(itranspose(res), imul(gram, res));
    if (!(check == standard_symplectic_form(g)))
        throw std::logic_error("symplectic_basis: postcondition failed");
    return res;
}

// ---------------------------------------------------------------------------
// conversions to floating point
// ---------------------------------------------------------------------------

template <typename T>
T rat_to(const Rat& r) {
    // split to keep precision for long double targets
    return static_cast<T>(r.get_num().get_d()) / static_cast<T>(r.get_den().get_d());
}

template <typename T>
CMat<T> rat_to_cmat(const RatMat& m) {
    if (m.rows != m.cols) throw std::invalid_argument("rat_to_cmat: not square");
    CMat<T> r(m.rows);
    for (int i = 0; i < m.rows; ++i)
        for (int j = 0; j < m.cols; ++j) r(i, j) = cplx<T>(rat_to<T>(m(i, j)));
    return r;
}

// ---------------------------------------------------------------------------
// dense rational polynomials, coefficients low -> high
// ---------------------------------------------------------------------------

using RatPoly = std::vector<Rat>;

inline RatPoly poly_trim(RatPoly p) {
    while (!p.empty() && p.back() == 0) p.pop_back();
    return p;
}

inline int poly_deg(const RatPoly& p) { return static_cast<int>(p.size()) - 1; }

inline RatPoly poly_add(const RatPoly& a, const RatPoly& b) {
    RatPoly r(std::max(a.size(), b.size()));
    for (size_t i = 0; i < a.size(); ++i) r[i] += a[i];
    for (size_t i = 0; i < b.size(); ++i) r[i] += b[i];
    return poly_trim(r);
}

inline RatPoly poly_scale(const RatPoly& a, const Rat& s) {
    RatPoly r = a;
    for (auto& v : r) v *= s;
    return poly_trim(r);
}

inline RatPoly poly_mul(const RatPoly& a, const RatPoly& b) {
    if (a.empty() || b.empty()) return {};
    RatPoly r(a.size() + b.size() - 1);
    for (size_t i = 0; i < a.size(); ++i) {
        if (a[i] == 0) continue;
        for (size_t j = 0; j < b.size(); ++j) r[i + j] += a[i] * b[j];
    }
    return poly_trim(r);
}

// quotient and remainder of a by b (b nonzero)
inline std::pair<RatPoly, RatPoly> poly_divmod(const RatPoly& a, const RatPoly& b) {
    RatPoly bb = poly_trim(b);
    if (bb.empty()) throw std::invalid_argument("poly_divmod: division by zero polynomial");
    RatPoly rem = poly_trim(a);
    if (rem.size() < bb.size()) return {{}, rem};
    RatPoly quot(rem.size() - bb.size() + 1);
    const Rat lead = bb.back();
    for (int i = static_cast<int>(rem.size()) - 1; i >= static_cast<int>(bb.size()) - 1; --i) {
        if (rem[i] == 0) continue;
        const Rat f = rem[i] / lead;
        quot[i - (bb.size() - 1)] = f;
        for (size_t j = 0; j < bb.size(); ++j) rem[i - (bb.size() - 1) + j] -= f * bb[j];
    }
    return {poly_trim(quot), poly_trim(rem)};
}

inline RatPoly poly_mod(const RatPoly& a, const RatPoly& b) { return poly_divmod(a, b).second; }

inline RatPoly poly_derivative(const RatPoly& p) {
    if (p.size() <= 1) return {};
    RatPoly r(p.size() - 1);
    for (size_t i = 1; i < p.size(); ++i) r[i - 1] = p[i] * Rat(static_cast<long>(i));
    return poly_trim(r);
}

inline RatPoly poly_monic(const RatPoly& p) {
    RatPoly r = poly_trim(p);
    if (r.empty()) return r;
    const Rat lead = r.back();
    for (auto& v : r) v /= lead;
    return r;
}

inline RatPoly poly_gcd(RatPoly a, RatPoly b) {
    a = poly_trim(a);
    b = poly_trim(b);
    while (!b.empty()) {
        RatPoly r = poly_mod(a, b);
        a = std::move(b);
        b = std::move(r);
    }
    return poly_monic(a);
}

inline Rat poly_eval_rat(const RatPoly& p, const Rat& x) {
    Rat v(0);
    for (size_t i = p.size(); i-- > 0;) v = v * x + p[i];
    return v;
}

template <typename T>
cplx<T> poly_eval_cplx(const RatPoly& p, const cplx<T>& x) {
    cplx<T> v(0);
    for (size_t i = p.size(); i-- > 0;) v = v * x + cplx<T>(rat_to<T>(p[i]));
    return v;
}

}  // namespace thetacrit
