#pragma once

// The symplectic layer: exact rational symplectic matrices with block
// access, classification of the congruence-type subgroups relevant to theta
// transformation behaviour, the Siegel upper-half-space action, an adapted
// (symplectic Smith) factorization h = sigma1 * diag(d^-1, d) * sigma2 over
// the integers, and the Cayley transform with its Lie-algebra membership
// test.

#include <optional>
#include <stdexcept>
#include <utility>
#include <vector>

#include "exact.hpp"
#include "numeric.hpp"

namespace thetacrit {

// ---------------------------------------------------------------------------
// blocks and basic predicates
// ---------------------------------------------------------------------------

inline RatMat rblock(const RatMat& m, int roff, int coff, int rows, int cols) {
    RatMat b(rows, cols);
    for (int i = 0; i < rows; ++i)
        for (int j = 0; j < cols; ++j) b(i, j) = m(roff + i, coff + j);
    return b;
}

inline RatMat rblock_a(const RatMat& m, int g) { return rblock(m, 0, 0, g, g); }
inline RatMat rblock_b(const RatMat& m, int g) { return rblock(m, 0, g, g, g); }
inline RatMat rblock_c(const RatMat& m, int g) { return rblock(m, g, 0, g, g); }
inline RatMat rblock_d(const RatMat& m, int g) { return rblock(m, g, g, g, g); }

inline RatMat assemble_blocks(const RatMat& a, const RatMat& b, const RatMat& c,
                              const RatMat& d) {
    const int g = a.rows;
    RatMat m(2 * g, 2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            m(i, j) = a(i, j);
            m(i, g + j) = b(i, j);
            m(g + i, j) = c(i, j);
            m(g + i, g + j) = d(i, j);
        }
    return m;
}

inline RatMat rat_symplectic_form(int g) { return to_rat(standard_symplectic_form(g)); }

inline bool is_symplectic(const RatMat& m) {
    if (m.rows != m.cols || m.rows % 2 != 0) return false;
    const int g = m.rows / 2;
    return rmul(rtranspose(m), rmul(rat_symplectic_form(g), m)) == rat_symplectic_form(g);
}

// exact inverse of a symplectic matrix: [[ta*.., ..]] via the form
inline RatMat sp_inverse(const RatMat& m) {
    const int g = m.rows / 2;
    return assemble_blocks(rtranspose(rblock_d(m, g)), rscale(rtranspose(rblock_b(m, g)), Rat(-1)),
                           rscale(rtranspose(rblock_c(m, g)), Rat(-1)), rtranspose(rblock_a(m, g)));
}

// ---------------------------------------------------------------------------
// congruence-type classification
// ---------------------------------------------------------------------------

struct ThetaLevelClass {
    bool symplectic = false;      // in Sp(g, Q)
    bool integral = false;        // entries in Z
    bool mod2_unipotent = false;  // integral and congruent to 1 mod 2
    bool theta = false;           // integral with even diag(ta*c), diag(tb*d)
    bool theta2 = false;          // mod2_unipotent with diag(ta*c), diag(tb*d) in 4Z

    std::string finest() const {
        if (theta2) return "sp_theta_2";
        if (mod2_unipotent && theta) return "sp_2_and_theta";
        if (mod2_unipotent) return "sp_2";
        if (theta) return "sp_theta";
        if (integral) return "sp_z";
        if (symplectic) return "sp_q";
        return "none";
    }
};

inline ThetaLevelClass classify_theta_level(const RatMat& m) {
    ThetaLevelClass cl;
    cl.symplectic = is_symplectic(m);
    if (!cl.symplectic) return cl;
    cl.integral = is_integral(m);
    if (!cl.integral) return cl;
    const int g = m.rows / 2;
    bool unip = true;
    for (int i = 0; i < 2 * g && unip; ++i)
        for (int j = 0; j < 2 * g && unip; ++j) {
            const Int e = m(i, j).get_num() - (i == j ? 1 : 0);
            if (e % 2 != 0) unip = false;
        }
    cl.mod2_unipotent = unip;
    const RatMat tac = rmul(rtranspose(rblock_a(m, g)), rblock_c(m, g));
    const RatMat tbd = rmul(rtranspose(rblock_b(m, g)), rblock_d(m, g));
    bool diag2 = true, diag4 = true;
    for (int i = 0; i < g; ++i) {
        const Int u = tac(i, i).get_num(), v = tbd(i, i).get_num();
        if (u % 2 != 0 || v % 2 != 0) diag2 = false;
        if (u % 4 != 0 || v % 4 != 0) diag4 = false;
    }
    cl.theta = diag2;
    cl.theta2 = unip && diag4;
    return cl;
}

// the rational (2-adically defined) analogue of the finest class: entries in
// Z_(2), congruent to 1 mod 2, diag(ta*c) and diag(tb*d) in 4 Z_(2)
inline bool rational_theta_level(const RatMat& m) {
    if (!is_symplectic(m)) return false;
    if (!is_2adic_integral(m)) return false;
    const int g = m.rows / 2;
    for (int i = 0; i < 2 * g; ++i)
        for (int j = 0; j < 2 * g; ++j)
            if (mod_2k(m(i, j) - Rat(i == j ? 1 : 0), 1) != 0) return false;
    const RatMat tac = rmul(rtranspose(rblock_a(m, g)), rblock_c(m, g));
    const RatMat tbd = rmul(rtranspose(rblock_b(m, g)), rblock_d(m, g));
    for (int i = 0; i < g; ++i)
        if (mod_2k(tac(i, i), 2) != 0 || mod_2k(tbd(i, i), 2) != 0) return false;
    return true;
}

// ---------------------------------------------------------------------------
// Siegel upper half space
// ---------------------------------------------------------------------------

template <typename T>
CMat<T> symmetrize(const CMat<T>& m) {
    CMat<T> r(m.n);
    for (int i = 0; i < m.n; ++i)
        for (int j = 0; j < m.n; ++j) r(i, j) = (m(i, j) + m(j, i)) / T(2);
    return r;
}

template <typename T>
std::vector<T> im_eigenvalues(const CMat<T>& tau) {
    std::vector<T> im(static_cast<size_t>(tau.n) * tau.n);
    for (int i = 0; i < tau.n; ++i)
        for (int j = 0; j < tau.n; ++j) im[static_cast<size_t>(i) * tau.n + j] =
            (tau(i, j).imag() + tau(j, i).imag()) / 2;
    return symmetric_eigenvalues(im, tau.n);
}

template <typename T>
bool is_riemann_matrix(const CMat<T>& tau, T tol) {
    if (tau.n == 0) return false;
    T scale = cmat_max_abs(tau);
    for (int i = 0; i < tau.n; ++i)
        for (int j = 0; j < tau.n; ++j)
            if (std::abs(tau(i, j) - tau(j, i)) > tol * std::max(scale, T(1))) return false;
    auto ev = im_eigenvalues(tau);
    return ev.front() > 0;
}

// action (a tau + b)(c tau + d)^{-1}
template <typename T>
CMat<T> siegel_act(const RatMat& sigma, const CMat<T>& tau) {
    const int g = tau.n;
    if (sigma.rows != 2 * g) throw std::invalid_argument("siegel_act: size mismatch");
    const CMat<T> a = rat_to_cmat<T>(rblock_a(sigma, g));
    const CMat<T> b = rat_to_cmat<T>(rblock_b(sigma, g));
    const CMat<T> c = rat_to_cmat<T>(rblock_c(sigma, g));
    const CMat<T> d = rat_to_cmat<T>(rblock_d(sigma, g));
    const CMat<T> num = cadd(cmul(a, tau), b);
    const CMat<T> den = cadd(cmul(c, tau), d);
    // num * den^{-1}; computed as (den^t \ num^t)^t for stability
    return ctranspose(csolve(ctranspose(den), ctranspose(num)));
}

// congruence  t(d) tau d  for an integral matrix d
template <typename T>
CMat<T> congruence_by(const IntMat& d, const CMat<T>& tau) {
    const int g = tau.n;
    if (d.rows != g || d.cols != g) throw std::invalid_argument("congruence_by: size mismatch");
    CMat<T> dc(g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) dc(i, j) = cplx<T>(static_cast<T>(d(i, j).get_d()));
    return cmul(ctranspose(dc), cmul(tau, dc));
}

// exact characteristic polynomial det(xI - A) via the trace recursion
inline RatPoly rat_char_poly(const RatMat& a) {
    if (a.rows != a.cols) throw std::invalid_argument("rat_char_poly: not square");
    const int n = a.rows;
    RatPoly c(n + 1);
    c[n] = 1;
    RatMat m = RatMat::identity(n);
    for (int k = 1; k <= n; ++k) {
        m = rmul(a, m);
        Rat tr(0);
        for (int i = 0; i < n; ++i) tr += m(i, i);
        const Rat ck = -tr / Rat(k);
        c[n - k] = ck;
        for (int i = 0; i < n; ++i) m(i, i) += ck;
    }
    return c;
}

inline RatMat poly_eval_mat(const RatPoly& p, const RatMat& a) {
    const int n = a.rows;
    RatMat v(n, n);
    for (size_t i = p.size(); i-- > 0;) {
        v = rmul(v, a);
        for (int k = 0; k < n; ++k) v(k, k) += p[i];
    }
    return v;
}

// fixed-point criterion on the Siegel space: semisimple (checked exactly via
// the squarefree part of the characteristic polynomial) with every
// eigenvalue on the unit circle (checked numerically)
inline bool is_elliptic(const RatMat& m, double tol = 1e-6) {
    const RatPoly p = rat_char_poly(m);
    const RatPoly g = poly_gcd(p, poly_derivative(p));
    const RatPoly q = poly_divmod(p, g).first;  // squarefree part
    const RatMat qa = poly_eval_mat(q, m);
    for (const auto& v : qa.a)
        if (v != 0) return false;
    std::vector<cplx<double>> coeffs(q.size());
    for (size_t i = 0; i < q.size(); ++i) coeffs[i] = cplx<double>(rat_to<double>(q[i]));
    for (const auto& root : poly_roots(coeffs))
        if (std::abs(std::abs(root) - 1.0) > tol) return false;
    return true;
}

// ---------------------------------------------------------------------------
// adapted symplectic factorization: given symplectic h over Q, produce
// sigma1, sigma2 in Sp(g,Z) and a positive diagonal d with divisibility
// chain d_1 | d_2 | ... such that  h = sigma1 * diag(d^{-1}, d) * sigma2.
// ---------------------------------------------------------------------------

struct AdaptedBasis {
    IntMat sigma1, sigma2;   // integral symplectic factors
    std::vector<Int> d;      // diagonal of the divisor matrix
};

namespace detail {

// elementary symplectic matrices of size 2g
inline IntMat sp_first_row_add(int g, int i, int j, const Int& c) {
    // row i += c row j in the first block, coupled row g+j -= c row g+i
    IntMat e = IntMat::identity(2 * g);
    e(i, j) += c;
    e(g + j, g + i) -= c;
    return e;
}

inline IntMat sp_pair_swap(int g, int i, int j) {
    IntMat e = IntMat::identity(2 * g);
    e(i, i) = e(j, j) = e(g + i, g + i) = e(g + j, g + j) = 0;
    e(i, j) = e(j, i) = e(g + i, g + j) = e(g + j, g + i) = 1;
    return e;
}

inline IntMat sp_shear_upper(int g, int i, int j, const Int& c) {
    // symmetric B with B_ij = B_ji = c (single c at i==j)
    IntMat e = IntMat::identity(2 * g);
    e(i, g + j) += c;
    if (i != j) e(j, g + i) += c;
    return e;
}

inline IntMat sp_shear_lower(int g, int i, int j, const Int& c) {
    IntMat e = IntMat::identity(2 * g);
    e(g + i, j) += c;
    if (i != j) e(g + j, i) += c;
    return e;
}

inline IntMat sp_pair_rotate(int g, int k) {
    // e_k -> -f_k, f_k -> e_k on rows: new row k = row g+k, new row g+k = -row k
    IntMat e = IntMat::identity(2 * g);
    e(k, k) = 0;
    e(g + k, g + k) = 0;
    e(k, g + k) = 1;
    e(g + k, k) = -1;
    return e;
}

inline IntMat sp_negate_pair(int g, int k) {
    IntMat e = IntMat::identity(2 * g);
    e(k, k) = -1;
    e(g + k, g + k) = -1;
    return e;
}

inline IntMat int_sp_inverse(const IntMat& m) {
    const int g = m.rows / 2;
    IntMat r(2 * g, 2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            r(i, j) = m(g + j, g + i);
            r(i, g + j) = -m(j, g + i);
            r(g + i, j) = -m(g + j, i);
            r(g + i, g + j) = m(j, i);
        }
    return r;
}

}  // namespace detail

inline AdaptedBasis adapted_basis(const RatMat& h) {
    if (!is_symplectic(h)) throw std::invalid_argument("adapted_basis: input not symplectic");
    const int g = h.rows / 2;

    Int n = 1;
    for (const auto& v : h.a) {
        Int den = v.get_den();
        n = n / gcd_int(n, den) * den;  // lcm
    }
    IntMat m(2 * g, 2 * g);
    for (int i = 0; i < 2 * g; ++i)
        for (int j = 0; j < 2 * g; ++j) {
            Rat scaled = h(i, j) * Rat(n);
            m(i, j) = scaled.get_num();
        }

    IntMat lacc = IntMat::identity(2 * g), racc = IntMat::identity(2 * g);
    auto apply_left = [&](const IntMat& e) {
        m = imul(e, m);
        lacc = imul(e, lacc);
    };
    auto apply_right = [&](const IntMat& e) {
        m = imul(m, e);
        racc = imul(racc, e);
    };

    using namespace detail;

    auto active_indices = [&](int stage) {
        std::vector<int> idx;
        for (int i = stage; i < g; ++i) idx.push_back(i);
        for (int i = stage; i < g; ++i) idx.push_back(g + i);
        return idx;
    };

    for (int stage = 0; stage < g; ++stage) {
        const auto idx = active_indices(stage);
        for (int guard = 0;; ++guard) {
            if (guard > 20000) throw std::logic_error("adapted_basis: no convergence");
            // locate minimal nonzero entry in the active submatrix
            int pr = -1, pc = -1;
            Int best;
            for (int r : idx)
                for (int c : idx) {
                    if (m(r, c) == 0) continue;
                    Int av = abs(m(r, c));
                    if (pr < 0 || av < best) { best = av; pr = r; pc = c; }
                }
            if (pr < 0) throw std::runtime_error("adapted_basis: degenerate input");
            // move pivot to (stage, stage)
            if (pr >= g) { apply_left(sp_pair_rotate(g, pr - g)); pr -= g; }
            if (pr != stage) apply_left(sp_pair_swap(g, pr, stage));
            if (pc >= g) { apply_right(sp_pair_rotate(g, pc - g)); pc -= g; }
            if (pc != stage) apply_right(sp_pair_swap(g, pc, stage));
            const Int piv = m(stage, stage);
            if (piv == 0) continue;  // a move shuffled it away; re-select

            bool clean = true;
            // clear column `stage`
            for (int r : idx) {
                if (r == stage || m(r, stage) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), m(r, stage).get_mpz_t(), piv.get_mpz_t());
                if (r < g)
                    apply_left(sp_first_row_add(g, r, stage, -q));
                else
                    apply_left(sp_shear_lower(g, r - g, stage, -q));
                if (m(r, stage) != 0) clean = false;
            }
            // clear row `stage`
            for (int c : idx) {
                if (c == stage || m(stage, c) == 0) continue;
                Int q;
                mpz_fdiv_q(q.get_mpz_t(), m(stage, c).get_mpz_t(), piv.get_mpz_t());
                if (c < g)
                    apply_right(sp_first_row_add(g, stage, c, -q));
                else
                    apply_right(sp_shear_upper(g, stage, c - g, -q));
                if (m(stage, c) != 0) clean = false;
            }
            if (!clean) continue;
            // divisibility: pivot must divide every active entry
            int or_ = -1;
            for (int r : idx) {
                for (int c : idx)
                    if (!(r == stage && c == stage) && m(r, c) % piv != 0) { or_ = r; break; }
                if (or_ >= 0) break;
            }
            if (or_ >= 0) {
                if (or_ == stage) throw std::logic_error("adapted_basis: pivot row dirty");
                if (or_ < g)
                    apply_left(sp_first_row_add(g, stage, or_, Int(1)));
                else
                    apply_left(sp_shear_upper(g, stage, or_ - g, Int(1)));
                continue;
            }
            break;
        }
        if (m(stage, stage) < 0) apply_left(sp_negate_pair(g, stage));
        // the symplectic relations force the partner row/column to vanish
        for (int r : idx)
            if (r != g + stage && m(r, g + stage) != 0)
                throw std::logic_error("adapted_basis: partner column not cleared");
        for (int c : idx)
            if (c != g + stage && m(g + stage, c) != 0)
                throw std::logic_error("adapted_basis: partner row not cleared");
        if (m(stage, stage) * m(g + stage, g + stage) != n * n)
            throw std::logic_error("adapted_basis: pair product mismatch");
    }

    // invariant factors: e_k = m(k,k) ascending divisibility, d_k = n / e_k
    // descending; reverse the pair order so the d-chain ascends
    {
        IntMat up(2 * g, 2 * g);  // U(P) for the pair-reversal permutation P
        for (int k = 0; k < g; ++k) {
            up(k, g - 1 - k) = 1;
            up(g + k, g + (g - 1 - k)) = 1;
        }
        m = imul(up, imul(m, detail::int_sp_inverse(up)));
        lacc = imul(up, lacc);
        racc = imul(racc, detail::int_sp_inverse(up));
    }

    AdaptedBasis res;
    res.sigma1 = detail::int_sp_inverse(lacc);
    res.sigma2 = detail::int_sp_inverse(racc);
    res.d.resize(g);
    for (int k = 0; k < g; ++k) {
        if (m(k, k) == 0 || n % m(k, k) != 0)
            throw std::logic_error("adapted_basis: invariant factor does not divide n");
        res.d[k] = n / m(k, k);
    }
    for (int k = 0; k + 1 < g; ++k)
        if (res.d[k + 1] % res.d[k] != 0)
            throw std::logic_error("adapted_basis: divisor chain broken");

    // postconditions
    RatMat dm(2 * g, 2 * g);
    for (int k = 0; k < g; ++k) {
        dm(k, k) = make_rat(Int(1), res.d[k]);
        dm(g + k, g + k) = Rat(res.d[k]);
    }
    const RatMat recon = rmul(to_rat(res.sigma1), rmul(dm, to_rat(res.sigma2)));
    if (!(recon == h)) throw std::logic_error("adapted_basis: reconstruction failed");
    if (!is_symplectic(to_rat(res.sigma1)) || !is_symplectic(to_rat(res.sigma2)))
        throw std::logic_error("adapted_basis: factors not symplectic");
    return res;
}

// ---------------------------------------------------------------------------
// Cayley transform and the Lie-algebra membership criterion
// ---------------------------------------------------------------------------

inline RatMat cayley(const RatMat& x) {
    const int n = x.rows;
    const RatMat one = RatMat::identity(n);
    return rmul(radd(one, x), rinverse(rsub(one, x)));
}

inline RatMat cayley_inv(const RatMat& h) {
    const int n = h.rows;
    const RatMat one = RatMat::identity(n);
    return rmul(rsub(h, one), rinverse(radd(h, one)));
}

// adjoint with respect to the symplectic form: Y* = J tY J^{-1}
inline RatMat sp_star(const RatMat& y) {
    const int g = y.rows / 2;
    const RatMat j = rat_symplectic_form(g);
    return rscale(rmul(j, rmul(rtranspose(y), j)), Rat(-1));  // J^{-1} = -J
}

inline bool lie_is_sp(const RatMat& x) {
    return x.rows == x.cols && x.rows % 2 == 0 && sp_star(x) == rscale(x, Rat(-1));
}

// canonical witness Y with Y - Y* = X for X in the symplectic Lie algebra
inline RatMat lie_decompose(const RatMat& x) {
    if (!lie_is_sp(x)) throw std::invalid_argument("lie_decompose: not in the Lie algebra");
    const int g = x.rows / 2;
    const RatMat a = rblock_a(x, g), b = rblock_b(x, g), c = rblock_c(x, g);
    RatMat beta(g, g), gamma(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            if (i > j) { beta(i, j) = b(i, j); gamma(i, j) = c(i, j); }
            else if (i == j) { beta(i, i) = b(i, i) / 2; gamma(i, i) = c(i, i) / 2; }
        }
    RatMat y(2 * g, 2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            y(i, j) = a(i, j);
            y(i, g + j) = beta(i, j);
            y(g + i, j) = gamma(i, j);
        }
    return y;
}

// X lies in { Y - Y* : Y with entries in Z_(2) }  iff  X has entries in
// Z_(2) and the diagonals of its two off-diagonal blocks are even
inline bool lie_theta_membership(const RatMat& x) {
    if (!lie_is_sp(x) || !is_2adic_integral(x)) return false;
    const int g = x.rows / 2;
    for (int i = 0; i < g; ++i)
        if (mod_2k(x(i, g + i), 1) != 0 || mod_2k(x(g + i, i), 1) != 0) return false;
    return true;
}

// theta-level test through the Cayley transform; usable whenever the
// transform is 2-adically regular (det(1 - X) a 2-adic unit), nullopt
// otherwise
inline std::optional<bool> cayley_theta_equivalence(const RatMat& h) {
    const int n = h.rows;
    const RatMat hp1 = radd(h, RatMat::identity(n));
    if (rdet(hp1) == 0) return std::nullopt;
    const RatMat x = cayley_inv(h);
    const Rat d = rdet(rsub(RatMat::identity(n), x));
    if (d == 0 || d.get_num() % 2 == 0 || d.get_den() % 2 == 0) return std::nullopt;
    return lie_theta_membership(x);
}

}  // namespace thetacrit
