#pragma once

// Arithmetic in products of totally imaginary fields: exact element
// algebra over a monic defining polynomial per factor, the involution,
// trace pairings, multiplication matrices on chosen lattice bases,
// embedding types selected by a purely imaginary pairing element, and
// the cyclotomic constructions used by the norm-product families.

#include <thetacrit/siegel.hpp>

#include <numeric>
#include <optional>

namespace thetacrit {

// ---------------------------------------------------------------------------
// algebra and element containers
// ---------------------------------------------------------------------------

struct CMFactor {
    RatPoly p;       // monic defining polynomial of even degree
    RatPoly conj_x;  // image of the generator under the involution
};

struct CMAlgebra {
    std::vector<CMFactor> f;
    int degree() const {
        int d = 0;
        for (const auto& fac : f) d += poly_deg(fac.p);
        return d;
    }
    int genus() const { return degree() / 2; }
};

// one residue polynomial per factor, each of degree < deg(p_k)
using CMElt = std::vector<RatPoly>;

namespace detail {

// extended Euclid: the inverse of a modulo p, or nothing if not coprime
inline std::optional<RatPoly> poly_inverse_mod(const RatPoly& a0, const RatPoly& p) {
    RatPoly r0 = poly_trim(p), r1 = poly_mod(a0, p);
    RatPoly t0, t1 = {Rat(1)};
    while (poly_deg(r1) > 0) {
        auto [q, r2] = poly_divmod(r0, r1);
        RatPoly t2 = poly_add(t0, poly_scale(poly_mul(q, t1), Rat(-1)));
        r0 = r1;
        r1 = r2;
        t0 = t1;
        t1 = t2;
    }
    if (poly_deg(r1) < 0) return std::nullopt;  // common factor of positive degree
    return poly_mod(poly_scale(t1, Rat(1) / r1[0]), p);
}

// substitute s for the variable of a, reducing modulo p
inline RatPoly poly_compose_mod(const RatPoly& a, const RatPoly& s, const RatPoly& p) {
    RatPoly out;
    for (int i = poly_deg(a); i >= 0; --i) {
        out = poly_mod(poly_mul(out, s), p);
        out = poly_add(out, {a[static_cast<size_t>(i)]});
    }
    return out;
}

}  // namespace detail

// ---------------------------------------------------------------------------
// element operations
// ---------------------------------------------------------------------------

inline CMElt cm_from_rat(const CMAlgebra& alg, const Rat& r) {
    CMElt x(alg.f.size());
    for (size_t k = 0; k < alg.f.size(); ++k)
        if (!(r == 0)) x[k] = {r};
    return x;
}

inline CMElt cm_zero(const CMAlgebra& alg) { return cm_from_rat(alg, Rat(0)); }
inline CMElt cm_one(const CMAlgebra& alg) { return cm_from_rat(alg, Rat(1)); }

// the generator of one factor (zero in the others)
inline CMElt cm_generator(const CMAlgebra& alg, size_t which = 0) {
    CMElt x(alg.f.size());
    x[which] = {Rat(0), Rat(1)};
    return x;
}

inline bool cm_is_zero(const CMElt& x) {
    for (const auto& c : x)
        if (poly_deg(poly_trim(c)) >= 0) return false;
    return true;
}

inline bool cm_eq(const CMElt& a, const CMElt& b) {
    if (a.size() != b.size()) return false;
    for (size_t k = 0; k < a.size(); ++k) {
        const RatPoly d = poly_add(a[k], poly_scale(b[k], Rat(-1)));
        if (poly_deg(d) >= 0) return false;
    }
    return true;
}

inline CMElt cm_add(const CMAlgebra&, const CMElt& a, const CMElt& b) {
    CMElt out(a.size());
    for (size_t k = 0; k < a.size(); ++k) out[k] = poly_add(a[k], b[k]);
    return out;
}

inline CMElt cm_sub(const CMAlgebra&, const CMElt& a, const CMElt& b) {
    CMElt out(a.size());
    for (size_t k = 0; k < a.size(); ++k) out[k] = poly_add(a[k], poly_scale(b[k], Rat(-1)));
    return out;
}

inline CMElt cm_scale(const CMAlgebra&, const CMElt& a, const Rat& s) {
    CMElt out(a.size());
    for (size_t k = 0; k < a.size(); ++k) out[k] = poly_scale(a[k], s);
    return out;
}

inline CMElt cm_mul(const CMAlgebra& alg, const CMElt& a, const CMElt& b) {
    CMElt out(a.size());
    for (size_t k = 0; k < a.size(); ++k) out[k] = poly_mod(poly_mul(a[k], b[k]), alg.f[k].p);
    return out;
}

inline CMElt cm_conj(const CMAlgebra& alg, const CMElt& a) {
    CMElt out(a.size());
    for (size_t k = 0; k < a.size(); ++k)
        out[k] = detail::poly_compose_mod(a[k], alg.f[k].conj_x, alg.f[k].p);
    return out;
}

inline CMElt cm_inv(const CMAlgebra& alg, const CMElt& a) {
    CMElt out(a.size());
    for (size_t k = 0; k < a.size(); ++k) {
        auto inv = detail::poly_inverse_mod(a[k], alg.f[k].p);
        if (!inv) throw std::invalid_argument("cm_inv: element not invertible");
        out[k] = *inv;
    }
    return out;
}

inline CMElt cm_div(const CMAlgebra& alg, const CMElt& a, const CMElt& b) {
    return cm_mul(alg, a, cm_inv(alg, b));
}

inline std::optional<Rat> cm_as_rational(const CMElt& a) {
    Rat val(0);
    bool seen = false;
    for (const auto& c : a) {
        const RatPoly t = poly_trim(c);
        if (poly_deg(t) > 0) return std::nullopt;
        const Rat v = t.empty() ? Rat(0) : t[0];
        if (seen && !(v == val)) return std::nullopt;
        val = v;
        seen = true;
    }
    return val;
}

// ---------------------------------------------------------------------------
// coordinates, traces, norms
// ---------------------------------------------------------------------------

// stack the residue coefficients of all factors into one coordinate vector
inline std::vector<Rat> cm_coords(const CMAlgebra& alg, const CMElt& a) {
    std::vector<Rat> out;
    for (size_t k = 0; k < alg.f.size(); ++k) {
        const int d = poly_deg(alg.f[k].p);
        for (int i = 0; i < d; ++i)
            out.push_back(i < static_cast<int>(a[k].size()) ? a[k][static_cast<size_t>(i)]
                                                            : Rat(0));
    }
    return out;
}

inline CMElt cm_from_coords(const CMAlgebra& alg, const std::vector<Rat>& v) {
    CMElt out(alg.f.size());
    size_t pos = 0;
    for (size_t k = 0; k < alg.f.size(); ++k) {
        const int d = poly_deg(alg.f[k].p);
        RatPoly c(static_cast<size_t>(d));
        for (int i = 0; i < d; ++i) c[static_cast<size_t>(i)] = v.at(pos++);
        out[k] = poly_trim(c);
    }
    return out;
}

// multiplication matrix of a on the stacked power basis
inline RatMat cm_power_mult_matrix(const CMAlgebra& alg, const CMElt& a) {
    const int n = alg.degree();
    RatMat m(n, n);
    int off = 0;
    for (size_t k = 0; k < alg.f.size(); ++k) {
        const int d = poly_deg(alg.f[k].p);
        RatPoly col = a[k];
        for (int j = 0; j < d; ++j) {
            for (int i = 0; i < d; ++i)
                m(off + i, off + j) =
                    i < static_cast<int>(col.size()) ? col[static_cast<size_t>(i)] : Rat(0);
            // next column: multiply by the generator
            RatPoly shifted(col.size() + 1);
            for (size_t i = 0; i < col.size(); ++i) shifted[i + 1] = col[i];
            col = poly_mod(shifted, alg.f[k].p);
        }
        off += d;
    }
    return m;
}

inline Rat cm_trace(const CMAlgebra& alg, const CMElt& a) {
    const RatMat m = cm_power_mult_matrix(alg, a);
    Rat t(0);
    for (int i = 0; i < alg.degree(); ++i) t += m(i, i);
    return t;
}

inline Rat cm_norm(const CMAlgebra& alg, const CMElt& a) {
    return rdet(cm_power_mult_matrix(alg, a));
}

// ---------------------------------------------------------------------------
// the trace pairing omega(x, y) = Tr(x conj(y) / t0) and its Gram matrix
// ---------------------------------------------------------------------------

inline Rat cm_pairing(const CMAlgebra& alg, const CMElt& t0, const CMElt& x, const CMElt& y) {
    return cm_trace(alg, cm_div(alg, cm_mul(alg, x, cm_conj(alg, y)), t0));
}

inline RatMat cm_gram(const CMAlgebra& alg, const CMElt& t0, const std::vector<CMElt>& basis) {
    const int n = static_cast<int>(basis.size());
    RatMat g(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            g(i, j) = cm_pairing(alg, t0, basis[static_cast<size_t>(i)],
                                 basis[static_cast<size_t>(j)]);
    return g;
}

// coordinates of x in a given module basis (columns solved exactly)
inline std::vector<Rat> cm_coords_in_basis(const CMAlgebra& alg, const std::vector<CMElt>& basis,
                                           const CMElt& x) {
    const int n = alg.degree();
    if (static_cast<int>(basis.size()) != n)
        throw std::invalid_argument("cm_coords_in_basis: basis size must equal the degree");
    RatMat b(n, n);
    for (int j = 0; j < n; ++j) {
        const auto col = cm_coords(alg, basis[static_cast<size_t>(j)]);
        for (int i = 0; i < n; ++i) b(i, j) = col[static_cast<size_t>(i)];
    }
    const RatMat binv = rinverse(b);
    const auto xc = cm_coords(alg, x);
    std::vector<Rat> out(static_cast<size_t>(n), Rat(0));
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) out[static_cast<size_t>(i)] += binv(i, j) * xc[static_cast<size_t>(j)];
    return out;
}

// multiplication-by-nu matrix in an ordered lattice basis (column convention)
inline RatMat cm_mult_matrix(const CMAlgebra& alg, const std::vector<CMElt>& basis,
                             const CMElt& nu) {
    const int n = alg.degree();
    RatMat m(n, n);
    for (int j = 0; j < n; ++j) {
        const auto col =
            cm_coords_in_basis(alg, basis, cm_mul(alg, nu, basis[static_cast<size_t>(j)]));
        for (int i = 0; i < n; ++i) m(i, j) = col[static_cast<size_t>(i)];
    }
    return m;
}

// ---------------------------------------------------------------------------
// embedding types: the half of the embeddings where the purely imaginary
// pairing element lands in the upper half-plane
// ---------------------------------------------------------------------------

struct CMType {
    std::vector<std::vector<cplx<ld>>> roots;  // all roots of each factor
    std::vector<std::vector<int>> pick;        // chosen root indices per factor
    int count() const {
        int c = 0;
        for (const auto& v : pick) c += static_cast<int>(v.size());
        return c;
    }
};

namespace detail {

inline std::vector<cplx<ld>> factor_roots(const RatPoly& p) {
    std::vector<cplx<ld>> coeffs;
    for (const auto& c : p) coeffs.push_back(cplx<ld>(rat_to<ld>(c), 0));
    return poly_roots(coeffs);
}

}  // namespace detail

inline CMType cm_type_from(const CMAlgebra& alg, const CMElt& t0) {
    CMType type;
    type.roots.resize(alg.f.size());
    type.pick.resize(alg.f.size());
    for (size_t k = 0; k < alg.f.size(); ++k) {
        type.roots[k] = detail::factor_roots(alg.f[k].p);
        for (size_t r = 0; r < type.roots[k].size(); ++r) {
            const cplx<ld> v = poly_eval_cplx<ld>(t0[k], type.roots[k][r]);
            if (std::abs(v.imag()) < 1e-9L * (1 + std::abs(v)))
                throw std::runtime_error("cm_type_from: pairing element nearly real "
                                         "in some embedding");
            if (v.imag() > 0) type.pick[k].push_back(static_cast<int>(r));
        }
    }
    if (type.count() != alg.genus())
        throw std::runtime_error("cm_type_from: embedding count mismatch");
    return type;
}

// the g values of x under the chosen embeddings, in factor order
inline std::vector<cplx<ld>> cm_embed(const CMAlgebra& alg, const CMType& type, const CMElt& x) {
    std::vector<cplx<ld>> out;
    for (size_t k = 0; k < alg.f.size(); ++k)
        for (int r : type.pick[k])
            out.push_back(poly_eval_cplx<ld>(x[k], type.roots[k][static_cast<size_t>(r)]));
    return out;
}

// product of the chosen embedding values
inline cplx<ld> cm_reflex_norm(const CMAlgebra& alg, const CMType& type, const CMElt& nu) {
    cplx<ld> prod(1);
    for (const auto& v : cm_embed(alg, type, nu)) prod *= v;
    return prod;
}

// period matrix E^{-1} F with columns the embeddings of the two half-bases
inline CMat<ld> cm_period_matrix(const CMAlgebra& alg, const CMType& type,
                                 const std::vector<CMElt>& fbasis,
                                 const std::vector<CMElt>& ebasis) {
    const int g = alg.genus();
    if (static_cast<int>(fbasis.size()) != g || static_cast<int>(ebasis.size()) != g)
        throw std::invalid_argument("cm_period_matrix: need genus-many basis vectors per half");
    CMat<ld> e(g), f(g);
    for (int j = 0; j < g; ++j) {
        const auto ce = cm_embed(alg, type, ebasis[static_cast<size_t>(j)]);
        const auto cf = cm_embed(alg, type, fbasis[static_cast<size_t>(j)]);
        for (int i = 0; i < g; ++i) {
            e(i, j) = ce[static_cast<size_t>(i)];
            f(i, j) = cf[static_cast<size_t>(i)];
        }
    }
    return csolve(e, f);
}

// ---------------------------------------------------------------------------
// the finite quotient attached to a multiplier: invariant factors of
// Z^n / (Z^n intersect m Z^n)
// ---------------------------------------------------------------------------

inline std::vector<Int> quotient_invariants(const RatMat& m) {
    const int n = m.rows;
    Int q(1);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) q = q / gcd_int(q, m(i, j).get_den()) * m(i, j).get_den();
    IntMat a(n, n), qi(n, n);
    for (int i = 0; i < n; ++i) {
        qi(i, i) = q;
        for (int j = 0; j < n; ++j) {
            Rat scaled = m(i, j) * Rat(q);
            a(i, j) = scaled.get_num();
        }
    }
    if (idet(a) == 0) throw std::invalid_argument("quotient_invariants: singular multiplier");
    const IntMat inter = lattice_intersection(qi, a);
    IntMat basis(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (inter(i, j) % q != 0)
                throw std::logic_error("quotient_invariants: intersection not divisible");
            basis(i, j) = inter(i, j) / q;
        }
    auto sn = smith_normal_form(basis);
    std::vector<Int> out;
    for (int i = 0; i < n; ++i) {
        Int d = abs(sn.d(i, i));
        if (d == 0) throw std::logic_error("quotient_invariants: infinite quotient");
        if (d > 1) out.push_back(d);
    }
    return out;
}

// ---------------------------------------------------------------------------
// doubled-level membership for a unitary multiplier, straight from the
// definition: (nu - 1) maps the lattice into twice itself at 2, and the
// pairing of nu b with b is divisible by 4 at 2 on basis vectors
// ---------------------------------------------------------------------------

inline bool cm_unitary_doubled_level(const CMAlgebra& alg, const CMElt& t0,
                                     const std::vector<CMElt>& basis, const CMElt& nu) {
    const int n = alg.degree();
    const CMElt num1 = cm_sub(alg, nu, cm_one(alg));
    for (int j = 0; j < n; ++j) {
        const auto col =
            cm_coords_in_basis(alg, basis, cm_mul(alg, num1, basis[static_cast<size_t>(j)]));
        for (const auto& c : col)
            if (!is_2adic_integer(c / 2)) return false;
        const Rat w = cm_pairing(alg, t0, cm_mul(alg, nu, basis[static_cast<size_t>(j)]),
                                 basis[static_cast<size_t>(j)]);
        if (!is_2adic_integer(w / 4)) return false;
    }
    return true;
}

// ---------------------------------------------------------------------------
// cyclotomic constructions
// ---------------------------------------------------------------------------

inline RatPoly cyclotomic_poly(long n) {
    if (n < 1) throw std::invalid_argument("cyclotomic_poly: positive index required");
    // x^n - 1 divided by the product of the lower-order factors
    RatPoly num(static_cast<size_t>(n) + 1);
    num[0] = Rat(-1);
    num[static_cast<size_t>(n)] = Rat(1);
    for (long d = 1; d < n; ++d) {
        if (n % d != 0) continue;
        const RatPoly cd = cyclotomic_poly(d);
        auto [q, r] = poly_divmod(num, cd);
        if (poly_deg(r) >= 0) throw std::logic_error("cyclotomic_poly: division failure");
        num = q;
    }
    return num;
}

// the cyclotomic field of order n as a one-factor algebra; the involution
// sends the generator to its inverse power
inline CMAlgebra cyclotomic_algebra(long n) {
    if (n < 3) throw std::invalid_argument("cyclotomic_algebra: order must exceed 2");
    if (n % 2 == 0 && n % 4 != 0)
        throw std::invalid_argument("cyclotomic_algebra: order 2 mod 4 duplicates the odd order");
    CMFactor fac;
    fac.p = cyclotomic_poly(n);
    RatPoly xpow = {Rat(1)};
    RatPoly x = {Rat(0), Rat(1)};
    for (long i = 0; i < n - 1; ++i) xpow = poly_mod(poly_mul(xpow, x), fac.p);
    fac.conj_x = xpow;
    CMAlgebra alg;
    alg.f.push_back(fac);
    return alg;
}

// the k-th power of the root of unity, as an element
inline CMElt cyclotomic_power(const CMAlgebra& alg, long n, long k) {
    k %= n;
    if (k < 0) k += n;
    RatPoly xpow = {Rat(1)};
    RatPoly x = {Rat(0), Rat(1)};
    for (long i = 0; i < k; ++i) xpow = poly_mod(poly_mul(xpow, x), alg.f[0].p);
    CMElt out(alg.f.size());
    out[0] = xpow;
    return out;
}

// 1 + z - z^{-1} in the order-n cyclotomic field
inline CMElt lucas_kernel_element(const CMAlgebra& alg, long n) {
    const CMElt one = cm_one(alg);
    const CMElt z = cyclotomic_power(alg, n, 1);
    const CMElt zinv = cyclotomic_power(alg, n, n - 1);
    return cm_sub(alg, cm_add(alg, one, z), zinv);
}

// Lucas numbers 2, 1, 3, 4, 7, 11, ... by the exact recurrence
inline Int lucas_number(long n) {
    if (n < 0) throw std::invalid_argument("lucas_number: negative index");
    Int a = 2, b = 1;
    for (long i = 0; i < n; ++i) {
        Int next = a + b;
        a = b;
        b = next;
    }
    return a;
}

// Fibonacci numbers 0, 1, 1, 2, 3, 5, ... by the exact recurrence
inline Int fibonacci_number(long n) {
    if (n < 0) throw std::invalid_argument("fibonacci_number: negative index");
    Int a = 0, b = 1;
    for (long i = 0; i < n; ++i) {
        Int next = a + b;
        a = b;
        b = next;
    }
    return a;
}

// norm of 1 + z - z^{-1}: the primitive part of the Lucas number of order n
inline Int lucas_factor(long n) {
    if (n == 1) return 1;  // empty norm: the order-1 cyclotomic field is Q itself
    const CMAlgebra alg = cyclotomic_algebra(n);
    const Rat nrm = cm_norm(alg, lucas_kernel_element(alg, n));
    if (!(nrm.get_den() == 1)) throw std::logic_error("lucas_factor: non-integral norm");
    return abs(nrm.get_num());
}

// square root of the norm of 3 + z + z^{-1}: the primitive part of the
// Fibonacci number of order n
inline Int fibonacci_factor(long n) {
    if (n == 1) return 1;  // empty norm: the order-1 cyclotomic field is Q itself
    const CMAlgebra alg = cyclotomic_algebra(n);
    const CMElt x = cm_add(alg, cm_add(alg, cm_from_rat(alg, Rat(3)), cyclotomic_power(alg, n, 1)),
                           cyclotomic_power(alg, n, n - 1));
    const Rat nrm = cm_norm(alg, x);
    if (!(nrm.get_den() == 1)) throw std::logic_error("fibonacci_factor: non-integral norm");
    auto root = isqrt_checked(abs(nrm.get_num()));
    if (!root) throw std::logic_error("fibonacci_factor: norm is not a perfect square");
    return *root;
}

// invariant factors of Z[z] / (1 + z - z^{-1}) Z[z] on the power basis
inline std::vector<Int> lucas_quotient_structure(long n) {
    if (n < 5 || n % 2 == 0) throw std::invalid_argument("lucas_quotient_structure: need odd n >= 5");
    const CMAlgebra alg = cyclotomic_algebra(n);
    return quotient_invariants(cm_power_mult_matrix(alg, lucas_kernel_element(alg, n)));
}

namespace detail {

inline std::vector<long> prime_divisors(long n) {
    std::vector<long> out;
    long m = n;
    for (long p = 2; p * p <= m; ++p)
        if (m % p == 0) {
            out.push_back(p);
            while (m % p == 0) m /= p;
        }
    if (m > 1) out.push_back(m);
    return out;
}

inline long euler_phi(long n) {
    long out = n;
    for (long p : prime_divisors(n)) out = out / p * (p - 1);
    return out;
}

}  // namespace detail

// a purely imaginary generator of the different ideal of the order-n
// cyclotomic field: a root-of-unity (and, with an even number of prime
// divisors, unit) multiple of n / prod_p (1 - z_p), certified by exact
// imaginarity and the closed form for the norm
inline CMElt different_generator(long n) {
    const CMAlgebra alg = cyclotomic_algebra(n);
    const auto primes = detail::prime_divisors(n);
    CMElt xi = cm_one(alg);
    for (long p : primes)
        xi = cm_mul(alg, xi, cm_sub(alg, cm_one(alg), cyclotomic_power(alg, n, n / p)));
    const CMElt base = cm_div(alg, cm_from_rat(alg, Rat(n)), xi);
    // |norm| target: n^phi / prod p^{phi/(p-1)}
    const long phi = detail::euler_phi(n);
    Rat target(1);
    for (long i = 0; i < phi; ++i) target *= Rat(n);
    for (long p : primes) {
        const long e = phi / (p - 1);
        for (long i = 0; i < e; ++i) target /= Rat(p);
    }
    // unit candidates restoring imaginarity
    std::vector<CMElt> units = {cm_one(alg)};
    for (size_t i = 0; i < primes.size(); ++i)
        for (size_t j = i + 1; j < primes.size(); ++j) {
            const long m = primes[i] * primes[j];
            units.push_back(cm_sub(alg, cyclotomic_power(alg, n, n / m),
                                   cyclotomic_power(alg, n, n - n / m)));
        }
    for (const auto& u : units) {
        const CMElt cand0 = cm_mul(alg, base, u);
        for (long k = 0; k < n; ++k) {
            const CMElt cand = cm_mul(alg, cand0, cyclotomic_power(alg, n, k));
            if (!cm_eq(cm_conj(alg, cand), cm_scale(alg, cand, Rat(-1)))) continue;
            const Rat nrm = cm_norm(alg, cand);
            Rat anrm = nrm;
            if (anrm < 0) anrm = -anrm;
            if (!(anrm == target))
                throw std::logic_error("different_generator: imaginary candidate with "
                                       "unexpected norm");
            return cand;
        }
    }
    throw std::runtime_error("different_generator: no purely imaginary generator found");
}

// ---------------------------------------------------------------------------
// search for a pairing element on the full cyclotomic lattice: a unit
// multiple of the different generator that is purely imaginary, has an
// integral unimodular Gram matrix on the power basis, and induces the
// requested embedding type
// ---------------------------------------------------------------------------

inline std::optional<CMElt> find_principal_pairing(long n, const CMType& want,
                                                   int exponent_bound = 1,
                                                   long* scanned = nullptr) {
    if (scanned) *scanned = 0;
    const CMAlgebra alg = cyclotomic_algebra(n);
    const CMElt tn = different_generator(n);
    const int deg = alg.degree();
    std::vector<CMElt> basis;
    for (int i = 0; i < deg; ++i) basis.push_back(cyclotomic_power(alg, n, i));
    // cyclotomic units (1 - z^a) / (1 - z) for a prime to n
    std::vector<CMElt> gens;
    const CMElt one = cm_one(alg);
    const CMElt denom = cm_sub(alg, one, cyclotomic_power(alg, n, 1));
    for (long a = 2; a < n && static_cast<long>(gens.size()) < 3; ++a) {
        if (std::gcd(a, n) != 1) continue;
        gens.push_back(cm_div(alg, cm_sub(alg, one, cyclotomic_power(alg, n, a)), denom));
    }
    std::vector<int> e(gens.size(), -exponent_bound);
    while (true) {
        CMElt u = one;
        for (size_t i = 0; i < gens.size(); ++i) {
            const CMElt g = e[i] >= 0 ? gens[i] : cm_inv(alg, gens[i]);
            for (int r = 0; r < std::abs(e[i]); ++r) u = cm_mul(alg, u, g);
        }
        for (long j = 0; j < n; ++j) {
            const CMElt uj = cm_mul(alg, u, cyclotomic_power(alg, n, j));
            for (int sign = 0; sign < 2; ++sign) {
                if (scanned) ++*scanned;
                CMElt cand = cm_mul(alg, tn, uj);
                if (sign) cand = cm_scale(alg, cand, Rat(-1));
                if (!cm_eq(cm_conj(alg, cand), cm_scale(alg, cand, Rat(-1)))) continue;
                const RatMat gram = cm_gram(alg, cand, basis);
                bool ok = true;
                for (int r = 0; r < deg && ok; ++r)
                    for (int c = 0; c < deg && ok; ++c)
                        if (!(gram(r, c).get_den() == 1)) ok = false;
                if (!ok) continue;
                Rat det = rdet(gram);
                if (det < 0) det = -det;
                if (!(det == 1)) continue;
                CMType got;
                try {
                    got = cm_type_from(alg, cand);
                } catch (const std::runtime_error&) {
                    continue;
                }
                if (got.pick == want.pick) return cand;
            }
        }
        size_t k = 0;
        while (k < e.size() && e[k] == exponent_bound) e[k++] = -exponent_bound;
        if (k == e.size()) break;
        ++e[k];
    }
    return std::nullopt;
}

// (1 + x) / (1 - x)
inline CMElt cm_cayley(const CMAlgebra& alg, const CMElt& x) {
    const CMElt one = cm_one(alg);
    return cm_div(alg, cm_add(alg, one, x), cm_sub(alg, one, x));
}

// ---------------------------------------------------------------------------
// principal polarization data on the full cyclotomic lattice: the pairing
// element found by the unit scan together with a symplectic basis extracted
// from its power-basis Gram matrix.  A failed scan is reported, not thrown.
// ---------------------------------------------------------------------------

struct SymplecticCMData {
    bool found = false;
    CMElt t0;                    // pairing element; empty when not found
    std::vector<CMElt> fbasis;   // omega(f_i, e_j) = delta_ij
    std::vector<CMElt> ebasis;
    long scanned = 0;            // unit candidates examined by the scan
};

inline SymplecticCMData find_principal_polarization(long n, const CMType& want,
                                                    int exponent_bound = 1) {
    SymplecticCMData out;
    const auto t0 = find_principal_pairing(n, want, exponent_bound, &out.scanned);
    if (!t0) return out;
    const CMAlgebra alg = cyclotomic_algebra(n);
    const int deg = alg.degree(), g = deg / 2;
    std::vector<CMElt> basis;
    for (int i = 0; i < deg; ++i) basis.push_back(cyclotomic_power(alg, n, i));
    const IntMat change = symplectic_basis(to_int(cm_gram(alg, *t0, basis)));
    auto column_elt = [&](int j) {
        CMElt v = cm_zero(alg);
        for (int i = 0; i < deg; ++i)
            v = cm_add(alg, v, cm_scale(alg, basis[static_cast<size_t>(i)], Rat(change(i, j))));
        return v;
    };
    for (int j = 0; j < g; ++j) out.fbasis.push_back(column_elt(j));
    for (int j = g; j < deg; ++j) out.ebasis.push_back(column_elt(j));
    out.t0 = *t0;
    out.found = true;
    return out;
}

}  // namespace thetacrit
