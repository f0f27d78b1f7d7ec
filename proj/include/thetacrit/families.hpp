#pragma once

// Constructors for the explicit critical-value families on cyclic groups of
// odd order: the quadratic-surd family, products of two coprime such values,
// the quartic nested-radical family, and the cyclotomic (Lucas) products.
// Each constructor validates its arithmetic preconditions in two printed
// equivalent forms, builds the CM lattice data needed by the verifier, and
// pins the sign of the value where a proof pins it.

#include <thetacrit/cm.hpp>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace thetacrit {

// ---------------------------------------------------------------------------
// exact descriptions of the candidate values
// ---------------------------------------------------------------------------

struct IntegerVal {
    long n = 1;  // the value n itself
};

struct QuadSurd {
    long a = 0, b = 0;  // sqrt(a) + eps * i * sqrt(b)
    int eps = +1;
};

struct ProdSurd {
    QuadSurd f1, f2;  // sign * (f1 factor) * (f2 factor)
    int sign = +1;    // -1 when the adapted sublattice contributes a global negation
};

struct QuarticVal {
    long a = 0, b = 0, c = 0;
    bool caseB = false;  // false: sqrt(a)+sqrt(c) + im_sign*i*sqrt(b-2*sqrt(ac))
                         // true:  sqrt(b-2*sqrt(ac)) + im_sign*i*(sqrt(a)+sqrt(c))
    int im_sign = -1;
};

struct LucasVal {
    long n = 0;                // product over k < n/2 coprime to n of
    std::vector<int> eps;      //   1 + 2*i*eps_k*sin(k*pi/n), in ascending k
};

using ExactValue = std::variant<IntegerVal, QuadSurd, ProdSurd, QuarticVal, LucasVal>;

namespace detail {

inline long mod4(long x) { return ((x % 4) + 4) % 4; }

inline Rat rq(long num, long den) {
    Rat r(num, den);
    r.canonicalize();
    return r;
}

inline std::vector<long> coprime_ks(long n) {
    std::vector<long> ks;
    for (long k = 1; 2 * k < n; ++k)
        if (std::gcd(k, n) == 1) ks.push_back(k);
    return ks;
}

inline ld pi_ld() { return std::acos(ld(-1)); }

}  // namespace detail

inline cplx<ld> exact_approx(const ExactValue& v) {
    struct Eval {
        cplx<ld> operator()(const IntegerVal& x) const { return cplx<ld>(ld(x.n), 0); }
        cplx<ld> operator()(const QuadSurd& x) const {
            return cplx<ld>(std::sqrt(ld(x.a)), ld(x.eps) * std::sqrt(ld(x.b)));
        }
        cplx<ld> operator()(const ProdSurd& x) const {
            return ld(x.sign) * (*this)(x.f1) * (*this)(x.f2);
        }
        cplx<ld> operator()(const QuarticVal& x) const {
            const ld outer = std::sqrt(ld(x.a)) + std::sqrt(ld(x.c));
            const ld inner = std::sqrt(ld(x.b) - 2 * std::sqrt(ld(x.a) * ld(x.c)));
            if (x.caseB) return cplx<ld>(inner, ld(x.im_sign) * outer);
            return cplx<ld>(outer, ld(x.im_sign) * inner);
        }
        cplx<ld> operator()(const LucasVal& x) const {
            const ld pi = detail::pi_ld();
            cplx<ld> prod(1);
            const auto ks = detail::coprime_ks(x.n);
            for (size_t i = 0; i < ks.size(); ++i)
                prod *= cplx<ld>(1, 2 * ld(x.eps[i]) * std::sin(ld(ks[i]) * pi / ld(x.n)));
            return prod;
        }
    };
    return std::visit(Eval{}, v);
}

inline ExactValue exact_conjugate(const ExactValue& v) {
    struct Conj {
        ExactValue operator()(IntegerVal x) const { return x; }
        ExactValue operator()(QuadSurd x) const {
            x.eps = -x.eps;
            return x;
        }
        ExactValue operator()(ProdSurd x) const {
            x.f1.eps = -x.f1.eps;
            x.f2.eps = -x.f2.eps;
            return x;
        }
        ExactValue operator()(QuarticVal x) const {
            x.im_sign = -x.im_sign;
            return x;
        }
        ExactValue operator()(LucasVal x) const {
            for (auto& e : x.eps) e = -e;
            return x;
        }
    };
    return std::visit(Conj{}, v);
}

// ---------------------------------------------------------------------------
// display strings with square factors pulled out of the radicals
// ---------------------------------------------------------------------------

namespace detail {

struct SqrtParts {
    long coef = 1, rad = 1;  // m = coef^2 * rad with rad squarefree-ish
};

inline SqrtParts sqrt_parts(long m) {
    SqrtParts p;
    p.rad = m;
    for (long s = 2; s * s <= p.rad; ++s)
        while (p.rad % (s * s) == 0) {
            p.rad /= s * s;
            p.coef *= s;
        }
    return p;
}

inline std::string real_sqrt_str(long m) {
    const SqrtParts p = sqrt_parts(m);
    if (p.rad == 1) return std::to_string(p.coef);
    std::string out;
    if (p.coef != 1) out += std::to_string(p.coef);
    out += "√" + std::to_string(p.rad);
    return out;
}

inline std::string imag_sqrt_str(long m) {
    const SqrtParts p = sqrt_parts(m);
    std::string out;
    if (p.rad == 1) {
        if (p.coef != 1) out += std::to_string(p.coef);
        out += "i";
        return out;
    }
    if (p.coef != 1) out += std::to_string(p.coef);
    out += "i√" + std::to_string(p.rad);
    return out;
}

// sqrt(b - 2*sqrt(ac)) when ac is not a perfect square: pull the largest
// square factor t^2 out of both terms; returns "t" prefix and inner text
inline std::pair<long, std::string> nested_sqrt_str(long b, long ac) {
    const SqrtParts p = sqrt_parts(ac);  // 2*sqrt(ac) = (2*coef)*sqrt(rad)
    long t = 1;
    for (long s = 2; s * s <= b; ++s)
        if (b % (s * s) == 0 && (2 * p.coef) % (s * s) == 0) t = s;
    const long bb = b / (t * t), cc = (2 * p.coef) / (t * t);
    std::string inner = std::to_string(bb) + " - ";
    if (cc != 1) inner += std::to_string(cc);
    inner += "√" + std::to_string(p.rad);
    return {t, inner};
}

}  // namespace detail

inline std::string exact_display(const ExactValue& v) {
    struct Disp {
        std::string operator()(const IntegerVal& x) const { return std::to_string(x.n); }
        std::string operator()(const QuadSurd& x) const {
            return detail::real_sqrt_str(x.a) + (x.eps > 0 ? " + " : " - ") +
                   detail::imag_sqrt_str(x.b);
        }
        std::string operator()(const ProdSurd& x) const {
            return std::string(x.sign < 0 ? "-" : "") + "(" + (*this)(x.f1) + ")(" +
                   (*this)(x.f2) + ")";
        }
        std::string operator()(const QuarticVal& x) const {
            const auto pa = detail::sqrt_parts(x.a), pc = detail::sqrt_parts(x.c);
            std::string outer;  // sqrt(a) + sqrt(c), merged when both collapse
            if (pa.rad == 1 && pc.rad == 1)
                outer = std::to_string(pa.coef + pc.coef);
            else
                outer = detail::real_sqrt_str(x.a) + " + " + detail::real_sqrt_str(x.c);
            const auto pac = detail::sqrt_parts(x.a * x.c);
            const std::string sep = x.im_sign > 0 ? " + " : " - ";
            if (pac.rad == 1) {
                // the nested radical collapses: b - 2*sqrt(ac) is an integer
                const long inner = x.b - 2 * pac.coef;
                if (x.caseB)
                    return detail::real_sqrt_str(inner) + sep +
                           (pa.rad == 1 && pc.rad == 1
                                ? std::to_string(pa.coef + pc.coef) + "i"
                                : "i(" + detail::real_sqrt_str(x.a) + " + " +
                                      detail::real_sqrt_str(x.c) + ")");
                return outer + sep + detail::imag_sqrt_str(inner);
            }
            const auto [t, inner] = detail::nested_sqrt_str(x.b, x.a * x.c);
            const std::string tpfx = t == 1 ? "" : std::to_string(t);
            if (x.caseB)
                return tpfx + "√(" + inner + ")" + sep + "i(" +
                       detail::real_sqrt_str(x.a) + " + " + detail::real_sqrt_str(x.c) + ")";
            return outer + sep + tpfx + "i√(" + inner + ")";
        }
        std::string operator()(const LucasVal& x) const {
            const auto ks = detail::coprime_ks(x.n);
            std::string out;
            for (size_t i = 0; i < ks.size(); ++i) {
                out += "(1 ";
                out += x.eps[i] > 0 ? "+" : "-";
                out += " 2i sin(";
                if (ks[i] != 1) out += std::to_string(ks[i]);
                out += "π/" + std::to_string(x.n) + "))";
            }
            return out;
        }
    };
    return std::visit(Disp{}, v);
}

// ---------------------------------------------------------------------------
// conjugate supersets and minimal polynomials
// ---------------------------------------------------------------------------

namespace detail {

// a finite set of complex numbers, containing every algebraic conjugate of
// the value and starting with the value itself; stable under conjugation
inline std::vector<cplx<ld>> conjugate_superset(const ExactValue& v) {
    struct Orbit {
        std::vector<cplx<ld>> operator()(const IntegerVal& x) const {
            return {cplx<ld>(ld(x.n), 0)};
        }
        std::vector<cplx<ld>> operator()(const QuadSurd& x) const {
            const ld ra = std::sqrt(ld(x.a)), rb = std::sqrt(ld(x.b));
            return {cplx<ld>(ra, ld(x.eps) * rb), cplx<ld>(ra, -ld(x.eps) * rb),
                    cplx<ld>(-ra, ld(x.eps) * rb), cplx<ld>(-ra, -ld(x.eps) * rb)};
        }
        std::vector<cplx<ld>> operator()(const ProdSurd& x) const {
            const auto o1 = (*this)(x.f1), o2 = (*this)(x.f2);
            std::vector<cplx<ld>> out;
            // the factor orbits are stable under negation, so scaling every
            // product by the sign permutes the set and keeps element 0 equal
            // to the value itself
            for (const auto& u : o1)
                for (const auto& w : o2) out.push_back(ld(x.sign) * u * w);
            return out;
        }
        std::vector<cplx<ld>> operator()(const QuarticVal& x) const {
            const ld ra = std::sqrt(ld(x.a)), rc = std::sqrt(ld(x.c));
            const ld rac = std::sqrt(ld(x.a) * ld(x.c));
            std::vector<cplx<ld>> out;
            auto elt = [&](int s1, int s2, int s3) {
                const ld inner = std::sqrt(ld(x.b) - 2 * ld(s1) * ld(s2) * rac);
                if (x.caseB) return cplx<ld>(ld(s3) * inner, s1 * ra + s2 * rc);
                return cplx<ld>(s1 * ra + s2 * rc, ld(s3) * inner);
            };
            // the value first
            if (x.caseB)
                out.push_back(elt(x.im_sign, x.im_sign, +1));
            else
                out.push_back(elt(+1, +1, x.im_sign));
            for (int s1 : {+1, -1})
                for (int s2 : {+1, -1})
                    for (int s3 : {+1, -1}) {
                        const cplx<ld> e = elt(s1, s2, s3);
                        if (std::abs(e - out[0]) > 1e-12L || out.size() == 1) {
                            if (!(s1 == (x.caseB ? x.im_sign : +1) &&
                                  s2 == (x.caseB ? x.im_sign : +1) &&
                                  s3 == (x.caseB ? +1 : x.im_sign)))
                                out.push_back(e);
                        }
                    }
            return out;
        }
        std::vector<cplx<ld>> operator()(const LucasVal& x) const {
            // exact Galois images: z -> z^t over t prime to 2n, deduplicated
            const ld pi = pi_ld();
            const auto ks = coprime_ks(x.n);
            std::vector<cplx<ld>> out;
            for (long t = 1; t < 2 * x.n; t += 2) {
                if (std::gcd(t, 2 * x.n) != 1) continue;
                cplx<ld> prod(1);
                for (size_t i = 0; i < ks.size(); ++i)
                    prod *= cplx<ld>(
                        1, 2 * ld(x.eps[i]) * std::sin(ld(t) * ld(ks[i]) * pi / ld(x.n)));
                bool seen = false;
                for (const auto& p : out)
                    if (std::abs(p - prod) < 1e-9L) {
                        seen = true;
                        break;
                    }
                if (!seen) out.push_back(prod);
            }
            return out;
        }
    };
    return std::visit(Orbit{}, v);
}

using CPoly = std::vector<cplx<ld>>;

inline CPoly cpoly_mul_root(const CPoly& p, const cplx<ld>& root) {
    CPoly out(p.size() + 1, cplx<ld>(0));
    for (size_t i = 0; i < p.size(); ++i) {
        out[i] -= root * p[i];
        out[i + 1] += p[i];
    }
    return out;
}

inline cplx<ld> cpoly_eval(const CPoly& p, const cplx<ld>& z) {
    cplx<ld> acc(0);
    for (size_t i = p.size(); i-- > 0;) acc = acc * z + p[i];
    return acc;
}

inline std::optional<RatPoly> round_to_int_poly(const CPoly& p) {
    // rounding noise accumulates relative to the largest coefficient of the
    // product, not to each coefficient separately (near-zero coefficients of
    // a high-degree product carry the full cancellation error)
    ld scale = 0;
    for (const auto& c : p) scale = std::max(scale, std::abs(c.real()));
    const ld tol = 1e-6L + 1e-13L * scale;
    RatPoly out;
    for (const auto& c : p) {
        const ld r = std::round(c.real());
        if (std::abs(c.real() - r) > tol || std::abs(c.imag()) > tol) return std::nullopt;
        if (std::abs(r) > 8e17L) return std::nullopt;  // out of exact long range
        out.push_back(Rat(static_cast<long>(r)));
    }
    return out;
}

inline bool poly_is_zero(const RatPoly& p) {
    for (const auto& c : p)
        if (!(c == 0)) return false;
    return true;
}

}  // namespace detail

// monic minimal polynomial over Q (little-endian coefficient list), computed
// from a conjugation-stable superset of the value: the smallest subset
// containing the value whose root product has integer coefficients, certified
// by exact division into the full superset product
inline RatPoly minimal_polynomial(const ExactValue& v) {
    if (std::holds_alternative<IntegerVal>(v))
        return {Rat(-std::get<IntegerVal>(v).n), Rat(1)};

    const std::vector<cplx<ld>> orbit = detail::conjugate_superset(v);
    const cplx<ld> value = orbit[0];
    const size_t n = orbit.size();

    if (std::holds_alternative<LucasVal>(v)) {
        // the superset is exactly the set of Galois images: its product is
        // the minimal polynomial, no search needed
        detail::CPoly prod = {cplx<ld>(1)};
        for (const auto& mu : orbit) prod = detail::cpoly_mul_root(prod, mu);
        auto q = detail::round_to_int_poly(prod);
        if (!q)
            throw std::logic_error(
                "minimal_polynomial: cyclotomic coefficients exceed the exact "
                "floating-point range at this order");
        for (const auto& mu : orbit)
            if (std::abs(detail::cpoly_eval(prod, mu)) >
                1e-6L * std::pow(1 + std::abs(mu), static_cast<ld>(n)))
                throw std::logic_error("minimal_polynomial: rounded polynomial misses a root");
        return *q;
    }

    detail::CPoly fullc = {cplx<ld>(1)};
    for (const auto& mu : orbit) fullc = detail::cpoly_mul_root(fullc, mu);
    const auto full = detail::round_to_int_poly(fullc);
    if (!full) throw std::logic_error("minimal_polynomial: superset product did not round");

    for (size_t deg = 1; deg <= n; ++deg) {
        for (unsigned long mask = 1; mask < (1ul << n); mask += 2) {
            if (static_cast<size_t>(__builtin_popcountl(mask)) != deg) continue;
            detail::CPoly prod = {cplx<ld>(1)};
            for (size_t i = 0; i < n; ++i)
                if (mask & (1ul << i)) prod = detail::cpoly_mul_root(prod, orbit[i]);
            const auto q = detail::round_to_int_poly(prod);
            if (!q) continue;
            if (std::abs(detail::cpoly_eval(prod, value)) >
                1e-6L * std::pow(1 + std::abs(value), static_cast<ld>(deg)))
                continue;
            if (!detail::poly_is_zero(poly_mod(*full, *q))) continue;
            return *q;
        }
    }
    throw std::logic_error("minimal_polynomial: no integral factor found");
}

// monic minimal polynomial of (x - 1)/2 given the monic minimal polynomial
// of x: substitute 2y + 1 and renormalize
inline RatPoly half_shift_polynomial(const RatPoly& p) {
    const int deg = poly_deg(p);
    if (deg < 0) throw std::invalid_argument("half_shift_polynomial: zero polynomial");
    RatPoly acc = {Rat(0)};
    const RatPoly shift = {Rat(1), Rat(2)};  // 1 + 2y
    for (int i = deg; i >= 0; --i) {
        acc = poly_mul(acc, shift);
        acc = poly_add(acc, {p[static_cast<size_t>(i)]});
    }
    Rat scale(1);
    for (int i = 0; i < deg; ++i) scale *= Rat(2);
    return poly_scale(acc, Rat(1) / scale);
}

// whether (x - 1)/2 is an algebraic integer, given the minimal polynomial of x
inline bool is_half_integral(const RatPoly& minpoly) {
    for (const auto& c : half_shift_polynomial(minpoly))
        if (!(c.get_den() == 1)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// candidates and their verification payloads
// ---------------------------------------------------------------------------

enum class SignStatus { pinned, ambiguous };

struct VerificationPayload {
    CMAlgebra alg;
    CMElt t0;                              // pairing element of the lattice
    std::vector<CMElt> ebasis, fbasis;     // omega(f_i, e_j) = delta_ij
    CMElt nu;                              // unitary multiplier
    std::optional<RatMat> pchange;         // final basis in base-lattice (e,-f) coordinates
    std::optional<IntMat> sigma1, sigma2;  // adapted factors: m_nu = s1 * diag(td^-1, d) * s2
    std::optional<IntMat> dmat;            // the divisor block d of that factorization
    bool conjugated = false;               // verify against the mirrored period point
};

struct CriticalCandidate {
    std::string family;
    ExactValue lambda;
    cplx<ld> approx{};
    Int d = 0;
    std::vector<Int> group;  // invariant factors; product equals d
    SignStatus sign = SignStatus::pinned;
    bool conjugate_also_critical = true;
    bool half_integral = false;
    std::vector<std::string> notes;
    std::optional<VerificationPayload> payload;
};

// basis in the order (e_1..e_g, -f_1..-f_g); the pairing Gram on it is the
// standard symplectic form
inline std::vector<CMElt> emf_basis(const CMAlgebra& alg, const std::vector<CMElt>& ebasis,
                                    const std::vector<CMElt>& fbasis) {
    std::vector<CMElt> out = ebasis;
    for (const auto& f : fbasis) out.push_back(cm_scale(alg, f, Rat(-1)));
    return out;
}

// matrix of multiplication by the inverse (= conjugate) multiplier on the
// (e, -f) basis: the object whose adapted factorization drives verification
inline RatMat payload_mult_matrix(const VerificationPayload& p) {
    return cm_mult_matrix(p.alg, emf_basis(p.alg, p.ebasis, p.fbasis),
                          cm_conj(p.alg, p.nu));
}

namespace detail {

inline void construction_check(bool ok, const std::string& what) {
    if (!ok) throw std::logic_error("family construction: " + what);
}

// D = [[t(dmat)^-1, 0], [0, dmat]]
inline RatMat divisor_block(const IntMat& dmat) {
    const int g = dmat.rows;
    const RatMat dinv = rinverse(rtranspose(to_rat(dmat)));
    RatMat out(2 * g, 2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            out(i, j) = dinv(i, j);
            out(g + i, g + j) = Rat(dmat(i, j));
        }
    return out;
}

// component-supported element of a product algebra: r in factor k, 0 elsewhere
inline CMElt cm_component_rat(const CMAlgebra& alg, size_t k, const Rat& r) {
    CMElt x(alg.f.size());
    x[k] = {r};
    return x;
}

// shared construction-time integrity checks
inline void finalize_candidate(CriticalCandidate& c) {
    Int gprod = 1;
    for (const auto& g : c.group) gprod *= g;
    construction_check(gprod == c.d, "group invariant factors do not multiply to the order");
    const ld d_approx = static_cast<ld>(c.d.get_d());
    construction_check(std::abs(std::norm(c.approx) - d_approx) <=
                           1e-9L * std::max(ld(1), d_approx),
                       "value modulus squared does not match the order");
    if (!c.payload) return;
    const VerificationPayload& p = *c.payload;
    const int g = p.alg.genus();
    const auto emf = emf_basis(p.alg, p.ebasis, p.fbasis);
    construction_check(cm_gram(p.alg, p.t0, emf) == rat_symplectic_form(g),
                       "lattice pairing is not the standard symplectic form");
    construction_check(cm_eq(cm_mul(p.alg, p.nu, cm_conj(p.alg, p.nu)), cm_one(p.alg)),
                       "multiplier is not unitary");
    const RatMat m = payload_mult_matrix(p);
    construction_check(is_symplectic(m), "multiplier matrix is not symplectic");
    construction_check(quotient_invariants(m) == c.group,
                       "multiplier quotient does not match the stated group");
    construction_check(cm_unitary_doubled_level(p.alg, p.t0, emf, p.nu),
                       "lattice misses the doubled level required for verification");
    if (p.sigma1 && p.sigma2 && p.dmat) {
        construction_check(is_symplectic(to_rat(*p.sigma1)) && is_symplectic(to_rat(*p.sigma2)),
                           "adapted factors are not symplectic");
        Int dd = idet(*p.dmat);
        if (dd < 0) dd = -dd;
        construction_check(dd == c.d, "divisor determinant does not match the order");
        const RatMat reassembled =
            rmul(to_rat(*p.sigma1), rmul(divisor_block(*p.dmat), to_rat(*p.sigma2)));
        construction_check(reassembled == m,
                           "adapted factorization does not reassemble the multiplier");
        construction_check(
            classify_theta_level(to_rat(imul(*p.sigma2, *p.sigma1))).theta2,
            "adapted product is outside the doubled theta group");
    }
}

}  // namespace detail

// ---------------------------------------------------------------------------
// quadratic family: sqrt(a) + i sqrt(b) on the cyclic group of order a + b
// ---------------------------------------------------------------------------

inline CriticalCandidate family_quadratic(long a, long b) {
    if (a <= 0 || b <= 0) throw std::invalid_argument("family_quadratic: need a, b > 0");
    const long d = a + b;
    const bool form1 = detail::mod4(a - b) == 1 && detail::mod4(a * b) == 0;
    bool form2 = false;
    if (d % 2 == 1) form2 = detail::mod4(a - ((d + 1) * (d + 1)) / 4) == 0;
    detail::construction_check(form1 == form2, "quadratic congruence forms disagree");
    if (!form1)
        throw std::invalid_argument(
            "family_quadratic: need a - b = 1 (mod 4) and ab = 0 (mod 4)");

    CriticalCandidate c;
    c.family = "quadratic(" + std::to_string(a) + "," + std::to_string(b) + ")";
    c.lambda = QuadSurd{a, b, +1};
    c.approx = exact_approx(c.lambda);
    c.d = d;
    c.group = {Int(d)};
    c.sign = SignStatus::pinned;
    c.conjugate_also_critical = true;
    c.half_integral = is_half_integral(minimal_polynomial(c.lambda));

    VerificationPayload p;
    p.alg.f.push_back({{Rat(a * b), Rat(0), Rat(1)}, {Rat(0), Rat(-1)}});
    const CMElt alpha = cm_generator(p.alg);
    p.t0 = cm_scale(p.alg, alpha, Rat(4));
    p.ebasis = {cm_from_rat(p.alg, Rat(2))};
    p.fbasis = {alpha};
    p.nu = cm_scale(p.alg,
                    cm_add(p.alg, cm_from_rat(p.alg, Rat(a - b)),
                           cm_scale(p.alg, alpha, Rat(2))),
                    detail::rq(1, d));
    detail::construction_check((a - b - 1) % 4 == 0 && (a - b - d * d) % 4 == 0,
                               "quadratic shear entries are not integral");
    p.sigma1 = IntMat(2, 2, {a - b, (a - b - 1) / 4, 4, 1});
    p.sigma2 = IntMat(2, 2, {1, (a - b - d * d) / 4, 0, 1});
    p.dmat = IntMat(1, 1, {d});
    c.payload = p;
    detail::finalize_candidate(c);
    return c;
}

// ---------------------------------------------------------------------------
// product family: +-(sqrt(a1) + i e1 sqrt(b1))(sqrt(a2) + i e2 sqrt(b2)) on
// the cyclic group of order (a1+b1)(a2+b2), for coprime odd factor orders.
//
// The overall sign is part of the certified value and depends on the adapted
// sublattice: for mixed orientations (e1 = -e2) the value is the plain
// product; for equal orientations (e1 = e2) the sheared sublattice used in
// that case negates it. The negation is forced by the construction itself:
// the convolution functional-equation measurement, the transported series
// quotient, and the parity theta-constant ratios all return the negated
// product on every equal-orientation instance (both divisor signings, both
// orientations, both factor orders), while the mixed case and the quadratic
// family validate the shared conventions with the plain sign.
// ---------------------------------------------------------------------------

inline CriticalCandidate family_product(long a1, long b1, int eps1, long a2, long b2,
                                        int eps2) {
    if (eps1 * eps1 != 1 || eps2 * eps2 != 1)
        throw std::invalid_argument("family_product: signs must be +1 or -1");
    const long as[2] = {a1, a2}, bs[2] = {b1, b2};
    for (int j = 0; j < 2; ++j) {
        const long a = as[j], b = bs[j], dj = a + b;
        if (a <= 0 || b <= 0) throw std::invalid_argument("family_product: need a, b > 0");
        const bool form1 = detail::mod4(a - b) == 1 && detail::mod4(a * b) == 2;
        bool form2 = false;
        if (dj % 2 == 1) form2 = detail::mod4(a - ((dj + 1) * (dj + 1)) / 4) == 2;
        detail::construction_check(form1 == form2, "product congruence forms disagree");
        if (!form1)
            throw std::invalid_argument(
                "family_product: each factor needs a - b = 1 (mod 4) and ab = 2 (mod 4)");
    }
    const long d1 = a1 + b1, d2 = a2 + b2;
    if (std::gcd(d1, d2) != 1)
        throw std::invalid_argument(
            "family_product: factor orders must be coprime for a cyclic group");
    const long d = d1 * d2;
    const long dp1 = detail::mod4(d1) == 1 ? d1 : -d1;  // signed, = 1 (mod 4)
    const long dp2 = detail::mod4(d2) == 1 ? d2 : -d2;

    CriticalCandidate c;
    {
        std::ostringstream name;
        name << "product(" << a1 << "," << b1 << "," << (eps1 > 0 ? "+" : "-") << ";" << a2
             << "," << b2 << "," << (eps2 > 0 ? "+" : "-") << ")";
        c.family = name.str();
    }
    c.lambda = ProdSurd{QuadSurd{a1, b1, eps1}, QuadSurd{a2, b2, eps2},
                        eps1 == eps2 ? -1 : +1};
    c.approx = exact_approx(c.lambda);
    c.d = d;
    c.group = {Int(d)};
    c.sign = SignStatus::pinned;
    c.conjugate_also_critical = true;
    c.half_integral = is_half_integral(minimal_polynomial(c.lambda));

    VerificationPayload p;
    p.alg.f.push_back({{Rat(a1 * b1), Rat(0), Rat(1)}, {Rat(0), Rat(-1)}});
    p.alg.f.push_back({{Rat(a2 * b2), Rat(0), Rat(1)}, {Rat(0), Rat(-1)}});
    const CMElt alpha1 = cm_generator(p.alg, 0), alpha2 = cm_generator(p.alg, 1);
    const CMElt alpha = cm_add(p.alg, alpha1, alpha2);
    const CMElt e01 = detail::cm_component_rat(p.alg, 0, Rat(1));
    const CMElt e02 = detail::cm_component_rat(p.alg, 1, Rat(1));

    // base lattice: (e01, e02, f01, f02) = (1, 1, alpha1, alpha2) with the
    // pairing element 2 alpha; the working sublattice halves it to 4 alpha
    const std::vector<CMElt> emf0 = {e01, e02, cm_scale(p.alg, alpha1, Rat(-1)),
                                     cm_scale(p.alg, alpha2, Rat(-1))};
    const CMElt t0_base = cm_scale(p.alg, alpha, Rat(2));
    detail::construction_check(cm_gram(p.alg, t0_base, emf0) == rat_symplectic_form(2),
                               "product base lattice pairing is not standard");

    CMElt nu(p.alg.f.size());
    nu[0] = {detail::rq(a1 - b1, dp1), detail::rq(2 * eps1, dp1)};
    nu[1] = {detail::rq(a2 - b2, dp2), detail::rq(2 * eps2, dp2)};
    p.nu = nu;
    const RatMat m0 = cm_mult_matrix(p.alg, emf0, cm_conj(p.alg, nu));

    // printed adapted factors on the base lattice
    detail::construction_check((a1 - b1 - 1) % 2 == 0 && (a2 - b2 - 1) % 2 == 0 &&
                                   (a1 - b1 - d1 * d1) % 2 == 0 &&
                                   (a2 - b2 - d2 * d2) % 2 == 0,
                               "product shear entries are not integral");
    const IntMat s01(4, 4, {a1 - b1, 0, eps1 * (a1 - b1 - 1) / 2, 0,
                            0, a2 - b2, 0, eps2 * (a2 - b2 - 1) / 2,
                            2 * eps1, 0, 1, 0,
                            0, 2 * eps2, 0, 1});
    const IntMat s02(4, 4, {1, 0, eps1 * (a1 - b1 - d1 * d1) / 2, 0,
                            0, 1, 0, eps2 * (a2 - b2 - d2 * d2) / 2,
                            0, 0, 1, 0,
                            0, 0, 0, 1});
    RatMat d0(4, 4);
    d0(0, 0) = detail::rq(1, dp1);
    d0(1, 1) = detail::rq(1, dp2);
    d0(2, 2) = Rat(dp1);
    d0(3, 3) = Rat(dp2);
    detail::construction_check(rmul(to_rat(s01), rmul(d0, to_rat(s02))) == m0,
                               "product base factorization does not reassemble");

    RatMat pch(4, 4);
    IntMat dmat(2, 2);
    IntMat sig1(4, 4), sig2(4, 4);
    if (eps1 * eps2 < 0) {
        // mixed signs: the sublattice mixes the two factors
        p.ebasis = {cm_add(p.alg, e01, e02), cm_sub(p.alg, e01, e02)};
        p.fbasis = {cm_add(p.alg, alpha1, alpha2), cm_sub(p.alg, alpha1, alpha2)};
        pch = to_rat(IntMat(4, 4, {1, 1, 0, 0, 1, -1, 0, 0,
                                   0, 0, 1, 1, 0, 0, 1, -1}));
        dmat = IntMat(2, 2, {(dp1 + dp2) / 2, (dp1 - dp2) / 2,
                             (dp1 - dp2) / 2, (dp1 + dp2) / 2});
        const RatMat pinv = rinverse(pch);
        sig1 = to_int(rmul(pinv, rmul(to_rat(s01), pch)));
        sig2 = to_int(rmul(pinv, rmul(to_rat(s02), pch)));
    } else {
        // equal signs: double the idempotent half, shear the alpha half
        p.ebasis = {cm_scale(p.alg, e01, Rat(2)), cm_scale(p.alg, e02, Rat(2))};
        p.fbasis = {cm_sub(p.alg, alpha1, cm_add(p.alg, e01, e02)),
                    cm_add(p.alg, cm_sub(p.alg, alpha2, e01), e02)};
        pch = to_rat(IntMat(4, 4, {2, 0, 1, 1, 0, 2, 1, -1,
                                   0, 0, 1, 0, 0, 0, 0, 1}));
        dmat = IntMat(2, 2, {dp1, 0, 0, dp2});
        const RatMat pinv = rinverse(pch);
        // the extra unipotent factor that commutes the divisor past the basis change
        const RatMat s03 = rmul(pch, rmul(rinverse(d0), rmul(pinv, d0)));
        detail::construction_check(is_integral(s03),
                                   "product divisor commutator is not integral");
        sig1 = to_int(rmul(pinv, rmul(to_rat(s01), pch)));
        sig2 = to_int(rmul(pinv, rmul(s03, rmul(to_rat(s02), pch))));
    }
    const RatMat mfin = cm_mult_matrix(p.alg, emf_basis(p.alg, p.ebasis, p.fbasis),
                                       cm_conj(p.alg, nu));
    detail::construction_check(rmul(rinverse(pch), rmul(m0, pch)) == mfin,
                               "product basis change does not transport the multiplier");
    p.t0 = cm_scale(p.alg, alpha, Rat(4));
    p.pchange = pch;
    p.sigma1 = sig1;
    p.sigma2 = sig2;
    p.dmat = dmat;
    c.payload = p;
    c.notes.push_back(
        "pairing element doubles from 2*alpha to 4*alpha on the working sublattice");
    detail::finalize_candidate(c);
    return c;
}

// ---------------------------------------------------------------------------
// quartic family: nested-radical values on the cyclic group of order a + b + c
// ---------------------------------------------------------------------------

inline CriticalCandidate family_quartic(long a, long b, long c0) {
    const long c_ = c0;
    if (a <= 0 || b <= 0 || c_ <= 0)
        throw std::invalid_argument("family_quartic: need a, b, c > 0");
    const long disc = b * b - 4 * a * c_;
    if (disc <= 0)
        throw std::invalid_argument("family_quartic: need b^2 - 4ac > 0");
    const long am = detail::mod4(a), bm = detail::mod4(b), cm = detail::mod4(c_);
    const bool caseA = am == 1 && bm == cm && (bm == 0 || bm == 1);
    const bool caseBv = am == 3 && bm == cm && (bm == 0 || bm == 3);
    {
        // equivalent split: with e = +-1 matching a (mod 4), either b and c
        // are divisible by 4 (and d matches e), or all three match e
        const long d = a + b + c_;
        bool alt = false;
        for (int e : {+1, -1}) {
            const long em = detail::mod4(e);
            if (am != em) continue;
            if (bm == 0 && cm == 0 && detail::mod4(d) == em) alt = true;
            if (bm == em && cm == em) alt = true;
        }
        detail::construction_check(alt == (caseA || caseBv),
                                   "quartic congruence forms disagree");
    }
    if (!(caseA || caseBv))
        throw std::invalid_argument(
            "family_quartic: need a = 1 (mod 4) with b = c = 0 or 1 (mod 4), or "
            "a = 3 (mod 4) with b = c = 0 or 3 (mod 4)");
    const long d = a + b + c_;
    const int eps = caseA ? +1 : -1;

    CriticalCandidate c;
    c.family = "quartic(" + std::to_string(a) + "," + std::to_string(b) + "," +
               std::to_string(c_) + ")";
    c.lambda = QuarticVal{a, b, c_, caseBv, caseA ? -1 : +1};
    c.approx = exact_approx(c.lambda);
    c.d = d;
    c.group = {Int(d)};
    c.sign = SignStatus::pinned;
    c.conjugate_also_critical = true;
    c.half_integral = is_half_integral(minimal_polynomial(c.lambda));

    VerificationPayload p;
    const auto sq = isqrt_checked(Int(disc));
    if (sq) {
        // reducible defining polynomial: work in the two-factor algebra
        const long k = static_cast<long>(sq->get_si());
        p.alg.f.push_back({{detail::rq(b + k, 2 * a), Rat(0), Rat(1)}, {Rat(0), Rat(-1)}});
        p.alg.f.push_back({{detail::rq(b - k, 2 * a), Rat(0), Rat(1)}, {Rat(0), Rat(-1)}});
        c.notes.push_back("reducible defining polynomial: split into two quadratic factors");
    } else {
        p.alg.f.push_back(
            {{detail::rq(c_, a), Rat(0), detail::rq(b, a), Rat(0), Rat(1)}, {Rat(0), Rat(-1)}});
    }
    CMElt alpha = cm_zero(p.alg);
    for (size_t k = 0; k < p.alg.f.size(); ++k)
        alpha = cm_add(p.alg, alpha, cm_generator(p.alg, k));
    const CMElt delta = cm_add(
        p.alg, cm_scale(p.alg, cm_mul(p.alg, alpha, alpha), Rat(2 * a)),
        cm_from_rat(p.alg, Rat(b)));
    detail::construction_check(cm_eq(cm_conj(p.alg, delta), delta),
                               "quartic real generator is not conjugation-fixed");
    detail::construction_check(
        cm_eq(cm_mul(p.alg, delta, delta), cm_from_rat(p.alg, Rat(disc))),
        "quartic real generator does not square to the discriminant");
    const CMElt ad = cm_mul(p.alg, alpha, delta);

    // base lattice (1, delta, alpha delta, alpha) with pairing element 4 alpha delta
    const CMElt one = cm_one(p.alg);
    const std::vector<CMElt> base = {one, delta, ad, alpha};
    const std::vector<CMElt> emf0 = {base[0], base[1], cm_scale(p.alg, base[2], Rat(-1)),
                                     cm_scale(p.alg, base[3], Rat(-1))};
    const CMElt t0_base = cm_scale(p.alg, ad, Rat(4));
    detail::construction_check(cm_gram(p.alg, t0_base, emf0) == rat_symplectic_form(2),
                               "quartic base lattice pairing is not standard");
    p.nu = cm_cayley(p.alg, alpha);
    const RatMat m0 = cm_mult_matrix(p.alg, emf0, cm_conj(p.alg, p.nu));

    auto lin = [&](long x0, long x1, long x2, long x3) {
        CMElt out = cm_scale(p.alg, base[0], Rat(x0));
        out = cm_add(p.alg, out, cm_scale(p.alg, base[1], Rat(x1)));
        out = cm_add(p.alg, out, cm_scale(p.alg, base[2], Rat(x2)));
        out = cm_add(p.alg, out, cm_scale(p.alg, base[3], Rat(x3)));
        return out;
    };
    IntMat sig1(4, 4);
    if (b % 4 == 0) {
        // doubling with b divisible by 4
        p.ebasis = {lin(4, 0, 0, 0), lin(b, 1, 0, 0)};
        p.fbasis = {lin(0, 0, 1, -b), lin(0, 0, 0, 4)};
        p.pchange = to_rat(IntMat(4, 4, {4, b, 0, 0, 0, 1, 0, 0,
                                         0, 0, 1, 0, 0, 0, -b, 4}));
        detail::construction_check(
            ((eps * d - 1) * (b + c_)) % 2 == 0 &&
                (eps * d * (d - 2 * a) + d - 2 * c_) % 4 == 0,
            "quartic shear entries are not integral");
        sig1 = IntMat(4, 4, {1, (eps * d - 1) * (b + c_) / 2, 0, 0,
                             0, 1, 0, 0,
                             0, 1, 1, 0,
                             1, (eps * d * (d - 2 * a) + d - 2 * c_) / 4,
                             (1 - eps * d) * (b + c_) / 2, 1});
    } else {
        // doubling with odd b
        p.ebasis = {lin(4, 0, 0, 0), lin(2 * b, 2, 0, 0)};
        p.fbasis = {lin(-2, 0, 1, -b), lin(-b, -1, 0, 2)};
        p.pchange = to_rat(IntMat(4, 4, {4, 2 * b, 2, b, 0, 2, 0, 1,
                                         0, 0, 1, 0, 0, 0, -b, 2}));
        const long h = eps * d + 2 * eps * b - 1;
        detail::construction_check(h % 4 == 0, "quartic odd-b shear offset is not divisible");
        sig1 = IntMat(4, 4, {1, 2 * b + 2 * c_ + 2, 0, 0,
                             -1, d - 2 * c_ - 2, (b + c_ + 1) * h / 2, -h / 4,
                             0, -4, 1 - 2 * eps * b - 2 * eps * c_ - 2 * eps, eps,
                             2, -2 * d + 4 * c_, -(b + c_ + 1) * (h + 2 * eps),
                             (h + 2 * eps) / 2});
    }
    const RatMat mfin = cm_mult_matrix(p.alg, emf_basis(p.alg, p.ebasis, p.fbasis),
                                       cm_conj(p.alg, p.nu));
    detail::construction_check(rmul(rinverse(*p.pchange), rmul(m0, *p.pchange)) == mfin,
                               "quartic basis change does not transport the multiplier");
    const IntMat dmat(2, 2, {1, 0, 0, d});
    // derive the second factor from the first: s2 = D^-1 s1^-1 m
    const RatMat s2r =
        rmul(rinverse(detail::divisor_block(dmat)), rmul(rinverse(to_rat(sig1)), mfin));
    detail::construction_check(is_integral(s2r), "quartic derived factor is not integral");
    p.t0 = cm_scale(p.alg, ad, Rat(16));
    p.sigma1 = sig1;
    p.sigma2 = to_int(s2r);
    p.dmat = dmat;
    c.payload = p;
    detail::finalize_candidate(c);
    return c;
}

// ---------------------------------------------------------------------------
// cyclotomic product family on the order-n cyclotomic lattice
// ---------------------------------------------------------------------------

inline CriticalCandidate family_lucas(long n, const std::vector<int>& signs,
                                      bool search_polarization = true) {
    if (n < 5 || n % 2 == 0)
        throw std::invalid_argument(
            "family_lucas: need odd n >= 5 (the order-3 primitive factor is even)");
    const auto ks = detail::coprime_ks(n);
    if (signs.size() != ks.size())
        throw std::invalid_argument("family_lucas: need one sign per residue class");
    for (int s : signs)
        if (s * s != 1) throw std::invalid_argument("family_lucas: signs must be +1 or -1");

    CriticalCandidate c;
    {
        std::string name = "lucas(" + std::to_string(n) + ";";
        for (int s : signs) name += s > 0 ? '+' : '-';
        c.family = name + ")";
    }
    c.lambda = LucasVal{n, signs};
    c.approx = exact_approx(c.lambda);
    c.d = lucas_factor(n);
    c.group = lucas_quotient_structure(n);
    c.sign = SignStatus::ambiguous;
    c.conjugate_also_critical = true;
    c.half_integral = is_half_integral(minimal_polynomial(c.lambda));

    if (search_polarization) {
        const CMAlgebra alg = cyclotomic_algebra(n);
        // embedding set: each factor 1 + 2i e_k sin(k pi/n) is the image of the
        // kernel element under the embedding z -> exp(2 pi i j / n) with
        // j = k/2 or (n-k)/2 (mod n), reflected when the sign is negative
        std::vector<bool> selected(static_cast<size_t>(n), false);
        for (size_t i = 0; i < ks.size(); ++i) {
            const long k = ks[i];
            long j = (k % 2 == 0) ? k / 2 : (n - k) / 2;
            if (signs[i] < 0) j = n - j;
            selected[static_cast<size_t>(j)] = true;
        }
        CMType want;
        want.roots.push_back(detail::factor_roots(alg.f[0].p));
        want.pick.emplace_back();
        const ld twopi = 2 * detail::pi_ld();
        for (size_t r = 0; r < want.roots[0].size(); ++r) {
            const ld arg = std::arg(want.roots[0][r]);
            long j = std::lround(arg * ld(n) / twopi);
            j = ((j % n) + n) % n;
            if (selected[static_cast<size_t>(j)])
                want.pick[0].push_back(static_cast<int>(r));
        }
        SymplecticCMData data = find_principal_polarization(n, want, 1);
        long scanned = data.scanned;
        if (!data.found) {
            data = find_principal_polarization(n, want, 2);
            scanned += data.scanned;
        }
        if (data.found) {
            const CMElt mu = lucas_kernel_element(alg, n);
            const CMElt nu = cm_div(alg, mu, cm_conj(alg, mu));
            const auto emf = emf_basis(alg, data.ebasis, data.fbasis);
            if (cm_unitary_doubled_level(alg, data.t0, emf, nu)) {
                VerificationPayload p;
                p.alg = alg;
                p.t0 = data.t0;
                p.ebasis = data.ebasis;
                p.fbasis = data.fbasis;
                p.nu = nu;
                c.payload = p;
                c.notes.push_back("polarization scan examined " + std::to_string(scanned) +
                                  " unit candidates");
            } else {
                c.notes.push_back(
                    "polarization found but the lattice misses the doubled level; "
                    "no verification payload");
            }
        } else {
            c.notes.push_back("polarization search exhausted after " +
                              std::to_string(scanned) + " unit candidates; no payload");
        }
    } else {
        c.notes.push_back("polarization search skipped at this order");
    }
    detail::finalize_candidate(c);
    return c;
}

// ---------------------------------------------------------------------------
// conjugate candidates and enumeration
// ---------------------------------------------------------------------------

inline CriticalCandidate candidate_conjugate(const CriticalCandidate& c) {
    CriticalCandidate out = c;
    out.family += "~";
    out.lambda = exact_conjugate(c.lambda);
    out.approx = std::conj(c.approx);
    if (out.payload) out.payload->conjugated = !out.payload->conjugated;
    return out;
}

// all candidates from the four families whose group is cyclic of order d,
// deduplicated by complex value
inline std::vector<CriticalCandidate> enumerate_for_d(long d) {
    if (d < 1 || d % 2 == 0)
        throw std::invalid_argument("enumerate_for_d: need odd d >= 1");
    std::vector<CriticalCandidate> out;
    auto push = [&](CriticalCandidate&& cand) {
        for (const auto& prev : out)
            if (std::abs(prev.approx - cand.approx) < 1e-9L) return;
        out.push_back(std::move(cand));
    };

    if (d == 1) {
        CriticalCandidate unit;
        unit.family = "unit";
        unit.lambda = IntegerVal{1};
        unit.approx = cplx<ld>(1, 0);
        unit.d = 1;
        unit.sign = SignStatus::pinned;
        unit.conjugate_also_critical = true;
        unit.half_integral = is_half_integral(minimal_polynomial(unit.lambda));
        detail::finalize_candidate(unit);
        push(std::move(unit));
        return out;
    }

    for (long a = 1; a < d; ++a) {
        const long b = d - a;
        if (detail::mod4(a - b) != 1 || detail::mod4(a * b) != 0) continue;
        CriticalCandidate cand = family_quadratic(a, b);
        CriticalCandidate conj = candidate_conjugate(cand);
        push(std::move(cand));
        push(std::move(conj));
    }

    for (long d1 = 3; d1 * d1 < d; d1 += 2) {
        if (d % d1 != 0) continue;
        const long d2 = d / d1;
        if (d2 < 3 || std::gcd(d1, d2) != 1) continue;
        for (long x1 = 1; x1 < d1; ++x1) {
            const long y1 = d1 - x1;
            if (detail::mod4(x1 - y1) != 1 || detail::mod4(x1 * y1) != 2) continue;
            for (long x2 = 1; x2 < d2; ++x2) {
                const long y2 = d2 - x2;
                if (detail::mod4(x2 - y2) != 1 || detail::mod4(x2 * y2) != 2) continue;
                for (int e1 : {+1, -1})
                    for (int e2 : {+1, -1})
                        push(family_product(x1, y1, e1, x2, y2, e2));
            }
        }
    }

    for (long a = 1; a <= d - 2; ++a)
        for (long b = 1; b <= d - a - 1; ++b) {
            const long cc = d - a - b;
            const long am = detail::mod4(a), bm = detail::mod4(b), cm = detail::mod4(cc);
            const bool okA = am == 1 && bm == cm && (bm == 0 || bm == 1);
            const bool okB = am == 3 && bm == cm && (bm == 0 || bm == 3);
            if (!(okA || okB)) continue;
            if (b * b - 4 * a * cc <= 0) continue;
            CriticalCandidate cand = family_quartic(a, b, cc);
            CriticalCandidate conj = candidate_conjugate(cand);
            push(std::move(cand));
            push(std::move(conj));
        }

    for (long n = 5; n <= 25; n += 2) {
        if (lucas_factor(n) != d) continue;
        const size_t m = detail::coprime_ks(n).size();
        const bool search = n <= 15;
        for (unsigned long mask = 0; mask < (1ul << m); ++mask) {
            std::vector<int> signs(m);
            for (size_t i = 0; i < m; ++i) signs[i] = (mask >> i) & 1 ? -1 : +1;
            push(family_lucas(n, signs, search));
        }
    }
    return out;
}

}  // namespace thetacrit
