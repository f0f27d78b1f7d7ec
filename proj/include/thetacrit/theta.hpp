#pragma once

// Numerical Riemann theta functions with certified truncation: the series
// with characteristics, the parity-restricted variants indexed by classes in
// (Z/2)^g, and the isogeny-type summation identities over the rational
// torsion subgroups that drive the criticality criterion.

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

#include "exact.hpp"
#include "numeric.hpp"
#include "siegel.hpp"

namespace thetacrit {

template <typename T>
struct TruncationBudget {
    T eps = 0;          // requested absolute tail target
    int radius = 0;     // accepted box radius
    T tail_bound = 0;   // certified bound on the dropped tail
    long terms = 0;     // lattice points actually summed
};

class ThetaBudgetError : public std::runtime_error {
  public:
    long attempted_radius;
    explicit ThetaBudgetError(const std::string& msg, long radius)
        : std::runtime_error(msg), attempted_radius(radius) {}
};

// Theta series at fixed (tau, characteristic a): precomputes the Gaussian
// coefficients over a certified box, then evaluates
//   sum_m exp(i pi t(m+a) tau (m+a)) exp(2 i pi t(m+a) (z+b))
// for arguments with || Im(z+b) ||_2 bounded by the declared cap.
template <typename T>
class ThetaSeries {
  public:
    ThetaSeries(const CMat<T>& tau, std::vector<T> char_a, T eps, T im_cap,
                long radius_cap = 4096)
        : g_(tau.n), tau_(tau), a_(std::move(char_a)), im_cap_(im_cap) {
        if (static_cast<int>(a_.size()) != g_)
            throw std::invalid_argument("ThetaSeries: characteristic size mismatch");
        const auto ev = im_eigenvalues(tau);
        lambda_min_ = ev.front();
        if (!(lambda_min_ > 0))
            throw std::invalid_argument("ThetaSeries: Im(tau) not positive definite");

        const T pi = std::acos(T(-1));
        auto shell_bound = [&](long k) -> T {
            // count of lattice points in the shell times the peak term size
            const T logcount = T(g_) * std::log(T(2 * k + 3));
            return std::exp(logcount - pi * lambda_min_ * T(k) * T(k) +
                            2 * pi * im_cap_ * T(k));
        };

        long r = std::max<long>(4, static_cast<long>(im_cap_ / lambda_min_) + 2);
        bool accepted = false;
        for (; r <= radius_cap; r += std::max<long>(2, r / 8)) {
            const T fr = shell_bound(r);
            if (fr <= eps / 2 && shell_bound(r + 1) <= fr / 2) {
                accepted = true;
                break;
            }
        }
        if (!accepted)
            throw ThetaBudgetError(
                "ThetaSeries: truncation radius cap reached (min Im eigenvalue " +
                    std::to_string(static_cast<double>(lambda_min_)) + ", cap " +
                    std::to_string(radius_cap) + "); raise the radius cap or the precision",
                radius_cap);

        budget_.eps = eps;
        budget_.radius = static_cast<int>(r);
        budget_.tail_bound = 2 * shell_bound(r);

        lo_.resize(g_);
        sizes_.resize(g_);
        long terms = 1;
        for (int j = 0; j < g_; ++j) {
            const T center = -a_[j];
            const long lo = static_cast<long>(std::ceil(center - T(r)));
            const long hi = static_cast<long>(std::floor(center + T(r)));
            lo_[j] = lo;
            sizes_[j] = static_cast<int>(hi - lo + 1);
            if (sizes_[j] <= 0) throw std::logic_error("ThetaSeries: empty box");
            terms *= sizes_[j];
            if (terms > (1L << 25))
                throw ThetaBudgetError("ThetaSeries: term budget exceeded (" +
                                           std::to_string(terms) + " lattice points)",
                                       r);
        }
        budget_.terms = terms;

        coeff_.resize(static_cast<size_t>(terms));
        std::vector<int> digit(g_, 0);
        std::vector<T> u(g_);
        for (long flat = 0; flat < terms; ++flat) {
            for (int j = 0; j < g_; ++j) u[j] = T(lo_[j] + digit[j]) + a_[j];
            // s = t(u) tau u
            cplx<T> s(0);
            for (int i = 0; i < g_; ++i)
                for (int j = 0; j < g_; ++j) s += tau_(i, j) * u[i] * u[j];
            const T re = std::fmod(s.real(), T(2));
            const T mag = std::exp(-pi * s.imag());
            coeff_[static_cast<size_t>(flat)] =
                cplx<T>(mag * std::cos(pi * re), mag * std::sin(pi * re));
            for (int j = g_ - 1; j >= 0; --j) {
                if (++digit[j] < sizes_[j]) break;
                digit[j] = 0;
            }
        }
    }

    // theta[a; b](z, tau) truncated to the certified box
    cplx<T> eval(const std::vector<cplx<T>>& z, const std::vector<T>& char_b) const {
        if (static_cast<int>(z.size()) != g_ || static_cast<int>(char_b.size()) != g_)
            throw std::invalid_argument("ThetaSeries::eval: argument size mismatch");
        const T pi = std::acos(T(-1));
        T imnorm2 = 0;
        for (int j = 0; j < g_; ++j) imnorm2 += z[j].imag() * z[j].imag();
        if (std::sqrt(imnorm2) > im_cap_ * (1 + T(1e-9)) + T(1e-12))
            throw std::invalid_argument("ThetaSeries::eval: Im(z+b) exceeds the declared cap");

        // per-coordinate factor tables e^{2 i pi (m_j + a_j)(z_j + b_j)}
        std::vector<std::vector<cplx<T>>> tab(g_);
        for (int j = 0; j < g_; ++j) {
            tab[j].resize(sizes_[j]);
            const cplx<T> zeta = z[j] + cplx<T>(char_b[j]);
            for (int k = 0; k < sizes_[j]; ++k) {
                const T uj = T(lo_[j] + k) + a_[j];
                const T re = std::fmod(uj * zeta.real(), T(1));
                const T mag = std::exp(-2 * pi * uj * zeta.imag());
                tab[j][k] = cplx<T>(mag * std::cos(2 * pi * re), mag * std::sin(2 * pi * re));
            }
        }
        cplx<T> total(0);
        std::vector<int> digit(g_, 0);
        const long terms = budget_.terms;
        for (long flat = 0; flat < terms; ++flat) {
            cplx<T> t = coeff_[static_cast<size_t>(flat)];
            for (int j = 0; j < g_; ++j) t *= tab[j][digit[j]];
            total += t;
            for (int j = g_ - 1; j >= 0; --j) {
                if (++digit[j] < sizes_[j]) break;
                digit[j] = 0;
            }
        }
        return total;
    }

    const TruncationBudget<T>& budget() const { return budget_; }
    T min_im_eigenvalue() const { return lambda_min_; }
    int genus() const { return g_; }

  private:
    int g_;
    CMat<T> tau_;
    std::vector<T> a_;
    T im_cap_;
    T lambda_min_ = 0;
    std::vector<long> lo_;
    std::vector<int> sizes_;
    std::vector<cplx<T>> coeff_;
    TruncationBudget<T> budget_;
};

// ---------------------------------------------------------------------------
// one-shot wrappers
// ---------------------------------------------------------------------------

template <typename T>
T im_norm(const std::vector<cplx<T>>& z) {
    T s = 0;
    for (const auto& v : z) s += v.imag() * v.imag();
    return std::sqrt(s);
}

// theta[a; b](z, tau)
template <typename T>
cplx<T> theta_char(const std::vector<T>& a, const std::vector<T>& b, const CMat<T>& tau,
                   const std::vector<cplx<T>>& z, T eps, long radius_cap = 4096) {
    std::vector<cplx<T>> zb(z.size());
    for (size_t j = 0; j < z.size(); ++j) zb[j] = z[j] + cplx<T>(b[j]);
    ThetaSeries<T> series(tau, a, eps, im_norm(zb) + T(1e-6), radius_cap);
    return series.eval(z, b);
}

// plain Riemann theta(z, tau)
template <typename T>
cplx<T> theta(const CMat<T>& tau, const std::vector<cplx<T>>& z, T eps,
              long radius_cap = 4096) {
    return theta_char(std::vector<T>(tau.n, T(0)), std::vector<T>(tau.n, T(0)), tau, z, eps,
                      radius_cap);
}

// parity-restricted series indexed by xi in (Z/2)^g:
//   theta_xi(z, tau) = sum_{m = xi mod 2} exp(i pi tm (tau/2) m + 2 i pi tm z)
//                    = theta[xi/2; 0](2z, 2tau)
template <typename T>
cplx<T> theta_xi(const std::vector<int>& xi, const CMat<T>& tau, const std::vector<cplx<T>>& z,
                 T eps, long radius_cap = 4096) {
    const int g = tau.n;
    std::vector<T> a(g);
    for (int j = 0; j < g; ++j) a[j] = T(((xi[j] % 2) + 2) % 2) / 2;
    CMat<T> tau2 = cscale(tau, cplx<T>(2));
    std::vector<cplx<T>> z2(g);
    for (int j = 0; j < g; ++j) z2[j] = T(2) * z[j];
    return theta_char(a, std::vector<T>(g, T(0)), tau2, z2, eps, radius_cap);
}

// ---------------------------------------------------------------------------
// torsion subgroup enumeration: coset representatives of Z^g / M Z^g and the
// corresponding points of (tM)^{-1} Z^g / Z^g
// ---------------------------------------------------------------------------

inline std::vector<std::vector<Int>> coset_representatives(const IntMat& m) {
    const Int det = idet(m);
    if (det == 0) throw std::invalid_argument("coset_representatives: singular matrix");
    SmithResult s = smith_normal_form(m);
    // m = u^{-1} d v^{-1}; representatives are u^{-1} s over the digit box
    const RatMat uinv = rinverse(to_rat(s.u));
    const int g = m.rows;
    std::vector<long> diag(g);
    long count = 1;
    for (int i = 0; i < g; ++i) {
        diag[i] = s.d(i, i).get_si();
        count *= diag[i];
    }
    std::vector<std::vector<Int>> reps;
    reps.reserve(count);
    std::vector<long> digit(g, 0);
    for (long flat = 0; flat < count; ++flat) {
        std::vector<Int> x(g, 0);
        for (int i = 0; i < g; ++i)
            for (int j = 0; j < g; ++j) {
                Rat v = uinv(i, j) * Rat(digit[j]);
                if (v.get_den() != 1) throw std::logic_error("coset_representatives: non-integer");
                x[i] += v.get_num();
            }
        reps.push_back(std::move(x));
        for (int j = g - 1; j >= 0; --j) {
            if (++digit[j] < diag[j]) break;
            digit[j] = 0;
        }
    }
    return reps;
}

inline Int rat_floor(const Rat& r) {
    Int q;
    mpz_fdiv_q(q.get_mpz_t(), r.get_num().get_mpz_t(), r.get_den().get_mpz_t());
    return q;
}

// rational torsion points of the group  t(d)^{-1} Z^g / Z^g
inline std::vector<std::vector<Rat>> torsion_points(const IntMat& dmat) {
    const IntMat td = itranspose(dmat);
    const RatMat tdinv = rinverse(to_rat(td));
    std::vector<std::vector<Rat>> pts;
    for (const auto& rep : coset_representatives(td)) {
        std::vector<Rat> p(dmat.rows, Rat(0));
        for (int i = 0; i < dmat.rows; ++i) {
            for (int j = 0; j < dmat.cols; ++j) p[i] += tdinv(i, j) * Rat(rep[j]);
            p[i] -= Rat(rat_floor(p[i]));  // normalize into [0, 1)
        }
        pts.push_back(std::move(p));
    }
    return pts;
}

// the characteristic permutation xi -> d^{-1} xi mod 2 (odd determinant)
inline std::vector<int> twist_characteristic(const IntMat& dmat, const std::vector<int>& xi) {
    const RatMat dinv = rinverse(to_rat(dmat));
    std::vector<int> out(dmat.rows);
    for (int i = 0; i < dmat.rows; ++i) {
        Rat acc(0);
        for (int j = 0; j < dmat.cols; ++j) acc += dinv(i, j) * Rat(xi[j]);
        out[i] = static_cast<int>(mod_2k(acc, 1).get_si());
    }
    return out;
}

// ---------------------------------------------------------------------------
// summation identity over the torsion subgroup and the criticality ratios
// ---------------------------------------------------------------------------

template <typename T>
std::vector<cplx<T>> rat_vector_to(const std::vector<Rat>& v) {
    std::vector<cplx<T>> out(v.size());
    for (size_t i = 0; i < v.size(); ++i) out[i] = cplx<T>(rat_to<T>(v[i]));
    return out;
}

// both sides of  sum_{l in G_d} theta_xi(z + l, tau)
//                    = |det d| * theta_{d^{-1} xi}(t(d) z, t(d) tau d)
template <typename T>
std::pair<cplx<T>, cplx<T>> isogeny_sum_pair(const std::vector<int>& xi, const IntMat& dmat,
                                             const CMat<T>& tau, const std::vector<cplx<T>>& z,
                                             T eps) {
    const int g = tau.n;
    cplx<T> lhs(0);
    for (const auto& pt : torsion_points(dmat)) {
        std::vector<cplx<T>> zl(g);
        auto ptc = rat_vector_to<T>(pt);
        for (int j = 0; j < g; ++j) zl[j] = z[j] + ptc[j];
        lhs += theta_xi(xi, tau, zl, eps);
    }
    const std::vector<int> xi2 = twist_characteristic(dmat, xi);
    const CMat<T> tdtd = congruence_by(dmat, tau);
    // t(d) z
    std::vector<cplx<T>> tz(g, cplx<T>(0));
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) tz[i] += T(dmat(j, i).get_d()) * z[j];
    const T count = std::abs(static_cast<T>(idet(dmat).get_d()));
    const cplx<T> rhs = count * theta_xi(xi2, tdtd, tz, eps);
    return {lhs, rhs};
}

template <typename T>
struct CriterionResult {
    std::vector<cplx<T>> ratios;  // indexed by xi in binary counter order
    std::vector<bool> valid;      // false where the denominator vanished
    cplx<T> lambda{0};            // mean over the valid ratios
    T spread = 0;                 // max |ratio - lambda| over the valid ratios
    bool degenerate = false;      // some denominator vanished
};

// the 2^g ratios  |det d| theta_{d^{-1}xi}(0, t(d) tau d) / theta_xi(0, tau);
// constancy over xi is the criticality criterion, the value is lambda
template <typename T>
CriterionResult<T> criterion_ratios(const CMat<T>& tau, const IntMat& dmat, T eps,
                                    long radius_cap = 4096) {
    const int g = tau.n;
    const CMat<T> tdtd = congruence_by(dmat, tau);
    const T count = std::abs(static_cast<T>(idet(dmat).get_d()));
    CriterionResult<T> res;
    const std::vector<cplx<T>> zero(g, cplx<T>(0));
    for (int mask = 0; mask < (1 << g); ++mask) {
        std::vector<int> xi(g);
        for (int j = 0; j < g; ++j) xi[j] = (mask >> j) & 1;
        const cplx<T> den = theta_xi(xi, tau, zero, eps, radius_cap);
        const cplx<T> num =
            count * theta_xi(twist_characteristic(dmat, xi), tdtd, zero, eps, radius_cap);
        const bool ok = std::abs(den) >= 100 * eps;
        res.valid.push_back(ok);
        res.ratios.push_back(ok ? num / den : cplx<T>(0));
        if (!ok) res.degenerate = true;
    }
    int used = 0;
    for (size_t i = 0; i < res.ratios.size(); ++i)
        if (res.valid[i]) {
            res.lambda += res.ratios[i];
            ++used;
        }
    if (used > 0) res.lambda /= T(used);
    for (size_t i = 0; i < res.ratios.size(); ++i)
        if (res.valid[i]) res.spread = std::max(res.spread, std::abs(res.ratios[i] - res.lambda));
    return res;
}

}  // namespace thetacrit
