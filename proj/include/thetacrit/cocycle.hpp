#pragma once

// Automorphy factor of the theta constant: the quotient j(s, tau) =
// theta(0, s.tau) / theta(0, tau), computed three independent ways —
// as a plain quotient of series values, as a Gauss-sum-normalized
// product of determinant half-powers, and via a Jacobi-symbol closed
// form when the lower-left block is invertible and |det delta| is odd
// and squarefree.  The critical value attached to a scaling matrix is
// j at the rescaled period matrix times the isogeny degree.

#include <thetacrit/theta.hpp>

#include <optional>
#include <string>

namespace thetacrit {

// ---------------------------------------------------------------------------
// determinant half-power h(tau) = det(tau / i)^{1/2}, the branch that is
// 1 at tau = i * identity and continuous on the whole Siegel domain.
// Elimination without pivoting: -i*tau is complex symmetric with positive
// definite real part, a class closed under taking Schur complements, so
// every pivot stays in the open right half-plane and the product of
// principal square roots of the pivots is a continuous square root of the
// determinant that equals 1 at the base point.
// ---------------------------------------------------------------------------

template <typename T>
cplx<T> h_tau(const CMat<T>& tau) {
    const int g = tau.n;
    CMat<T> a = cscale(tau, cplx<T>(0, -1));
    cplx<T> prod(1);
    for (int k = 0; k < g; ++k) {
        const cplx<T> piv = a(k, k);
        if (!(piv.real() > 0))
            throw std::invalid_argument("h_tau: pivot off the right half-plane; "
                                        "argument is not in the Siegel domain");
        prod *= std::sqrt(piv);
        for (int i = k + 1; i < g; ++i) {
            const cplx<T> f = a(i, k) / piv;
            for (int j = k + 1; j < g; ++j) a(i, j) -= f * a(k, j);
        }
    }
    return prod;
}

// same branch by continuation of the determinant along the straight path
// from i * identity; the path stays in the domain by convexity, so the
// determinant never vanishes along it
template <typename T>
cplx<T> h_tau_path(const CMat<T>& tau) {
    const int g = tau.n;
    auto det_at = [&](T t) {
        CMat<T> m(g);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                cplx<T> base = (i == j) ? cplx<T>(0, 1) : cplx<T>(0);
                m(i, j) = base * (T(1) - t) + tau(i, j) * t;
            }
        return cdet(cscale(m, cplx<T>(0, -1)));
    };
    T t = 0;
    T step = T(0.5);
    cplx<T> w(1);
    cplx<T> dprev = det_at(T(0));
    while (t < 1) {
        T tn = std::min(T(1), t + step);
        cplx<T> dn = det_at(tn);
        cplx<T> r = dn / dprev;
        if (std::abs(r - cplx<T>(1)) > T(0.5)) {
            step /= 2;
            if (step < T(1e-7))
                throw std::runtime_error("h_tau_path: continuation step underflow");
            continue;
        }
        w *= std::sqrt(r);
        dprev = dn;
        t = tn;
        step = std::min(step * 2, T(0.5));
    }
    return w;
}

// ---------------------------------------------------------------------------
// exact signature of a symmetric rational matrix by congruence
// diagonalization (number of positive minus number of negative entries)
// ---------------------------------------------------------------------------

inline int signature_exact(const RatMat& s0) {
    const int n = s0.rows;
    if (s0.cols != n) throw std::invalid_argument("signature_exact: square matrix required");
    for (int i = 0; i < n; ++i)
        for (int j = i + 1; j < n; ++j)
            if (!(s0(i, j) == s0(j, i)))
                throw std::invalid_argument("signature_exact: matrix not symmetric");
    RatMat a = s0;
    int pos = 0, neg = 0;
    for (int k = 0; k < n; ++k) {
        if (a(k, k) == 0) {
            // try to bring a nonzero entry onto the diagonal
            int swap_with = -1, couple_with = -1;
            for (int l = k + 1; l < n; ++l) {
                if (a(l, l) != 0 && swap_with < 0) swap_with = l;
                if (a(k, l) != 0 && couple_with < 0) couple_with = l;
            }
            if (swap_with >= 0) {
                for (int j = 0; j < n; ++j) std::swap(a(k, j), a(swap_with, j));
                for (int i = 0; i < n; ++i) std::swap(a(i, k), a(i, swap_with));
            } else if (couple_with >= 0) {
                // row/column addition turns the off-diagonal pair into 2*a(k,l)
                for (int j = 0; j < n; ++j) a(k, j) += a(couple_with, j);
                for (int i = 0; i < n; ++i) a(i, k) += a(i, couple_with);
            } else {
                continue;  // decoupled null direction
            }
        }
        const Rat p = a(k, k);
        if (p == 0) continue;
        if (p > 0) ++pos; else ++neg;
        for (int i = k + 1; i < n; ++i) {
            if (a(i, k) == 0) continue;
            const Rat f = a(i, k) / p;
            for (int j = 0; j < n; ++j) a(i, j) -= f * a(k, j);
            for (int j = 0; j < n; ++j) a(j, i) -= f * a(j, k);
        }
    }
    return pos - neg;
}

// ---------------------------------------------------------------------------
// block access and the index-halving rescale s -> s' = (a, 2b; c/2, d)
// ---------------------------------------------------------------------------

namespace detail {

inline IntMat iblock(const IntMat& m, int r0, int c0, int n) {
    IntMat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out(i, j) = m(r0 + i, c0 + j);
    return out;
}

inline Rat mod2_rat(const Rat& q) {
    const Int f = rat_floor(q / 2);
    Rat out = q - Rat(2) * Rat(f);
    return out;
}

// representatives of delta^{-1} Z^g / Z^g from the diagonal reduction
// u * delta * v = e: the set { v * e^{-1} * r } over digit boxes r
inline std::vector<std::vector<Rat>> inverse_lattice_cosets(const IntMat& delta) {
    const int g = delta.rows;
    auto sn = smith_normal_form(delta);
    std::vector<long> bounds(g);
    Int total(1);
    for (int k = 0; k < g; ++k) {
        if (sn.d(k, k) == 0)
            throw std::invalid_argument("inverse_lattice_cosets: singular matrix");
        bounds[k] = sn.d(k, k).get_si();
        total *= sn.d(k, k);
    }
    std::vector<std::vector<Rat>> out;
    std::vector<long> r(g, 0);
    while (true) {
        std::vector<Rat> x(g, Rat(0));
        for (int i = 0; i < g; ++i)
            for (int k = 0; k < g; ++k)
                x[i] += Rat(sn.v(i, k)) * make_rat(Int(r[k]), sn.d(k, k));
        out.push_back(x);
        int k = g - 1;
        while (k >= 0 && r[k] == bounds[k] - 1) r[k--] = 0;
        if (k < 0) break;
        ++r[k];
    }
    return out;
}

}  // namespace detail

// halve the lower-left block and double the upper-right one; requires the
// lower-left block to be even
inline IntMat sp_rescale_half(const IntMat& sigma) {
    const int n = sigma.rows;
    if (n % 2 != 0 || sigma.cols != n)
        throw std::invalid_argument("sp_rescale_half: even square matrix required");
    const int g = n / 2;
    IntMat out(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i < g && j >= g) {
                out(i, j) = 2 * sigma(i, j);
            } else if (i >= g && j < g) {
                if (sigma(i, j) % 2 != 0)
                    throw std::invalid_argument("sp_rescale_half: lower-left block not even");
                out(i, j) = sigma(i, j) / 2;
            } else {
                out(i, j) = sigma(i, j);
            }
        }
    return out;
}

// ---------------------------------------------------------------------------
// normalized Gauss sum over delta^{-1} Z^g / Z^g with the quadratic phase
// x -> t(x) (t(delta) beta) x; an eighth root of unity on the theta group
// ---------------------------------------------------------------------------

template <typename T>
cplx<T> gauss_kappa(const IntMat& sigma) {
    const int g = sigma.rows / 2;
    const IntMat beta = detail::iblock(sigma, 0, g, g);
    const IntMat delta = detail::iblock(sigma, g, g, g);
    const Int dd = idet(delta);
    if (dd == 0) throw std::invalid_argument("gauss_kappa: lower-right block singular");
    const IntMat m = imul(itranspose(delta), beta);
    for (int i = 0; i < g; ++i) {
        if (m(i, i) % 2 != 0)
            throw std::invalid_argument("gauss_kappa: quadratic phase not even on the diagonal");
        for (int j = i + 1; j < g; ++j)
            if (!(m(i, j) == m(j, i)))
                throw std::invalid_argument("gauss_kappa: phase matrix not symmetric");
    }
    const T pi = std::acos(T(-1));
    cplx<T> sum(0);
    for (const auto& x : detail::inverse_lattice_cosets(delta)) {
        Rat q(0);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) q += x[i] * Rat(m(i, j)) * x[j];
        const T angle = pi * rat_to<T>(detail::mod2_rat(q));
        sum += cplx<T>(std::cos(angle), std::sin(angle));
    }
    const Int ad = abs(dd);
    return sum / std::sqrt(rat_to<T>(Rat(ad)));
}

// ---------------------------------------------------------------------------
// the automorphy factor three ways
// ---------------------------------------------------------------------------

// direct quotient of series values; valid wherever the denominator is
// away from zero
template <typename T>
cplx<T> j_direct(const IntMat& sigma, const CMat<T>& tau, T eps = T(1e-12)) {
    const int g = tau.n;
    const std::vector<cplx<T>> zero(g, cplx<T>(0));
    const cplx<T> den = theta(tau, zero, eps);
    if (std::abs(den) < 1000 * eps)
        throw std::runtime_error("j_direct: theta constant too close to zero at base point");
    const CMat<T> moved = siegel_act(to_rat(sigma), tau);
    return theta(moved, zero, eps) / den;
}

// Gauss-sum form: kappa * |det delta|^{1/2} * h(tau) * h(-tau^{-1} - delta^{-1} gamma);
// needs only the lower-right block to be invertible
template <typename T>
cplx<T> j_product(const IntMat& sigma, const CMat<T>& tau) {
    const int g = sigma.rows / 2;
    const IntMat gamma = detail::iblock(sigma, g, 0, g);
    const IntMat delta = detail::iblock(sigma, g, g, g);
    const Int dd = idet(delta);
    if (dd == 0) throw std::invalid_argument("j_product: lower-right block singular");
    const RatMat s = rmul(rinverse(to_rat(delta)), to_rat(gamma));
    for (int i = 0; i < g; ++i)
        for (int j = i + 1; j < g; ++j)
            if (!(s(i, j) == s(j, i)))
                throw std::invalid_argument("j_product: delta^{-1} gamma not symmetric");
    const cplx<T> kappa = gauss_kappa<T>(sigma);
    const CMat<T> tinv = cinverse(tau);
    CMat<T> arg(g);
    const CMat<T> snum = rat_to_cmat<T>(s);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) arg(i, j) = -tinv(i, j) - snum(i, j);
    const Int ad = abs(dd);
    return kappa * std::sqrt(rat_to<T>(Rat(ad))) * h_tau(tau) * h_tau(arg);
}

// certified check that |n| is odd and squarefree by trial division
inline bool is_odd_squarefree(const Int& n0) {
    Int n = abs(n0);
    if (n == 0 || n % 2 == 0) return false;
    if (n == 1) return true;
    Int p(3);
    int steps = 0;
    while (p * p <= n) {
        if (++steps > 2000000)
            throw std::runtime_error("is_odd_squarefree: certification budget exceeded");
        if (n % p == 0) {
            n /= p;
            if (n % p == 0) return false;
        } else {
            p += 2;
        }
    }
    return true;
}

// Jacobi-symbol closed form, valid when the lower-left block is invertible
// and |det delta| is odd and squarefree:
//   e^{i pi s / 4} * eps_{d0}^{-1} * (c | d0) * |det gamma|^{1/2} * h(tau + gamma^{-1} delta)
// with s the signature of delta^{-1} gamma, d0 = |det delta|,
// eps_{d0} = 1 or i according to d0 mod 4, and c any integer of the form
// 2 d0 t(m) delta^{-1} gamma m coprime to d0
template <typename T>
cplx<T> j_symbol(const IntMat& sigma, const CMat<T>& tau) {
    const int g = sigma.rows / 2;
    const IntMat gamma = detail::iblock(sigma, g, 0, g);
    const IntMat delta = detail::iblock(sigma, g, g, g);
    if (idet(gamma) == 0)
        throw std::invalid_argument("j_symbol: lower-left block singular");
    const Int d0 = abs(idet(delta));
    if (!is_odd_squarefree(d0))
        throw std::invalid_argument("j_symbol: |det delta| not odd and squarefree");
    const RatMat dg = rmul(rinverse(to_rat(delta)), to_rat(gamma));
    const int s = signature_exact(dg);
    int symbol = 1;
    if (d0 > 1) {
        // scan small integer vectors for a residue prime to d0
        bool found = false;
        std::vector<long> mvec(g, 0);
        for (long radius = 1; radius <= 6 && !found; ++radius) {
            std::fill(mvec.begin(), mvec.end(), -radius);
            while (true) {
                Rat q(0);
                for (int i = 0; i < g; ++i)
                    for (int j = 0; j < g; ++j) q += Rat(mvec[i]) * dg(i, j) * Rat(mvec[j]);
                Rat c_rat = Rat(2) * Rat(d0) * q;
                if (c_rat.get_den() == 1) {
                    const Int c = c_rat.get_num();
                    if (c != 0 && gcd_int(c, d0) == 1) {
                        symbol = jacobi_symbol(c, d0);
                        found = true;
                        break;
                    }
                }
                int k = g - 1;
                while (k >= 0 && mvec[k] == radius) mvec[k--] = -radius;
                if (k < 0) break;
                ++mvec[k];
            }
        }
        if (!found)
            throw std::runtime_error("j_symbol: no residue coprime to |det delta| found");
    }
    const T pi = std::acos(T(-1));
    const cplx<T> phase = std::polar(T(1), pi * T(s) / 4);
    // inverse of the quartic factor: 1 when d0 = 1 mod 4, -i when d0 = 3 mod 4
    const cplx<T> quartic = (d0 % 4 == 1) ? cplx<T>(1, 0) : cplx<T>(0, -1);
    const RatMat gd = rmul(rinverse(to_rat(gamma)), to_rat(delta));
    const CMat<T> shift = rat_to_cmat<T>(gd);
    CMat<T> arg = tau;
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) arg(i, j) += shift(i, j);
    const Int ag = abs(idet(gamma));
    return phase * quartic * T(symbol) * std::sqrt(rat_to<T>(Rat(ag))) * h_tau(arg);
}

// ---------------------------------------------------------------------------
// the critical value of a scaled fixed point: lambda = j(s', 2 tau) * deg
// where s' is the index-halving rescale and deg = |det dmat|
// ---------------------------------------------------------------------------

template <typename T>
struct CocycleLambda {
    cplx<T> lambda;                        // from the direct series quotient
    std::optional<cplx<T>> lambda_closed;  // from a closed form, when applicable
    std::string route;                     // which closed form was used
    T magnitude_residual;                  // | |det(c'(2tau)+d')| - 1/deg |
};

template <typename T>
CocycleLambda<T> critical_lambda(const IntMat& sigma, const CMat<T>& tau, const IntMat& dmat,
                                 T eps = T(1e-12)) {
    const int g = tau.n;
    const auto cls = classify_theta_level(to_rat(sigma));
    if (!cls.theta2)
        throw std::invalid_argument("critical_lambda: matrix outside the doubled theta group");
    const IntMat prime = sp_rescale_half(sigma);
    if (!classify_theta_level(to_rat(prime)).theta)
        throw std::invalid_argument("critical_lambda: rescaled matrix outside the theta group");
    const CMat<T> tau2 = cscale(tau, cplx<T>(2));
    const T deg = std::abs(rat_to<T>(Rat(idet(dmat))));
    if (deg == 0) throw std::invalid_argument("critical_lambda: singular scaling matrix");

    CocycleLambda<T> out;
    out.lambda = j_direct(prime, tau2, eps) * deg;
    out.route = "quotient";
    try {
        out.lambda_closed = j_symbol(prime, tau2) * deg;
        out.route = "quotient+symbol";
    } catch (const std::invalid_argument&) {
        try {
            out.lambda_closed = j_product(prime, tau2) * deg;
            out.route = "quotient+product";
        } catch (const std::invalid_argument&) {
            out.lambda_closed = std::nullopt;
        }
    }

    // the magnitude law: the absolute value of det(c' (2 tau) + d') must be
    // the reciprocal of the isogeny degree
    const IntMat gb = detail::iblock(prime, g, 0, g);
    const IntMat db = detail::iblock(prime, g, g, g);
    CMat<T> den = cmul(rat_to_cmat<T>(to_rat(gb)), tau2);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) den(i, j) += rat_to<T>(Rat(db(i, j)));
    out.magnitude_residual = std::abs(std::abs(cdet(den)) - T(1) / deg);
    return out;
}

}  // namespace thetacrit
