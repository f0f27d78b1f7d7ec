#pragma once

// Shared helpers for the test binaries: deterministic random elements of the
// integral symplectic group and of its congruence-type subgroups.

#include <thetacrit/siegel.hpp>

namespace support {

using namespace thetacrit;

inline IntMat embed_gl(int g, const IntMat& a) {
    // [[A, 0], [0, tA^{-1}]] for unimodular A given together with its inverse
    RatMat ar = to_rat(a);
    RatMat inv_t = rtranspose(rinverse(ar));
    IntMat m(2 * g, 2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) {
            m(i, j) = a(i, j);
            m(g + i, g + j) = to_int(inv_t)(i, j);
        }
    return m;
}

inline IntMat full_rotation(int g) {
    IntMat m(2 * g, 2 * g);
    for (int i = 0; i < g; ++i) {
        m(i, g + i) = 1;
        m(g + i, i) = -1;
    }
    return m;
}

inline IntMat upper_shear(int g, const IntMat& b) {
    IntMat m = IntMat::identity(2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) m(i, g + j) = b(i, j);
    return m;
}

inline IntMat lower_shear(int g, const IntMat& c) {
    IntMat m = IntMat::identity(2 * g);
    for (int i = 0; i < g; ++i)
        for (int j = 0; j < g; ++j) m(g + i, j) = c(i, j);
    return m;
}

inline IntMat random_unimodular(int g, Rng& rng, int steps = 4) {
    IntMat a = IntMat::identity(g);
    for (int s = 0; s < steps; ++s) {
        IntMat e = IntMat::identity(g);
        if (g > 1) {
            int i = static_cast<int>(rng.integer(0, g - 1));
            int j = static_cast<int>(rng.integer(0, g - 1));
            if (i == j) j = (j + 1) % g;
            e(i, j) = Int(rng.integer(-2, 2));
        }
        if (rng.integer(0, 3) == 0) {
            int k = static_cast<int>(rng.integer(0, g - 1));
            e(k, k) = -1;
        }
        a = imul(a, e);
    }
    return a;
}

inline IntMat random_symmetric(int g, Rng& rng, int bound = 2) {
    IntMat b(g, g);
    for (int i = 0; i < g; ++i)
        for (int j = i; j < g; ++j) {
            b(i, j) = Int(rng.integer(-bound, bound));
            b(j, i) = b(i, j);
        }
    return b;
}

// random element of Sp(g, Z) as a product of standard generators
inline IntMat random_sp(int g, Rng& rng, int factors = 6) {
    IntMat m = IntMat::identity(2 * g);
    for (int f = 0; f < factors; ++f) {
        switch (rng.integer(0, 2)) {
            case 0: m = imul(m, full_rotation(g)); break;
            case 1: m = imul(m, upper_shear(g, random_symmetric(g, rng))); break;
            default: m = imul(m, embed_gl(g, random_unimodular(g, rng))); break;
        }
    }
    return m;
}

// random element of the subgroup preserving the even quadratic form:
// products of the rotation, basis changes, and shears with even diagonal
inline IntMat random_sp_theta(int g, Rng& rng, int factors = 5) {
    IntMat m = IntMat::identity(2 * g);
    for (int f = 0; f < factors; ++f) {
        switch (rng.integer(0, 3)) {
            case 0: m = imul(m, full_rotation(g)); break;
            case 1: m = imul(m, embed_gl(g, random_unimodular(g, rng))); break;
            case 2: {
                IntMat b = random_symmetric(g, rng);
                for (int i = 0; i < g; ++i) b(i, i) *= 2;
                m = imul(m, upper_shear(g, b));
                break;
            }
            default: {
                IntMat c = random_symmetric(g, rng);
                for (int i = 0; i < g; ++i) c(i, i) *= 2;
                m = imul(m, lower_shear(g, c));
                break;
            }
        }
    }
    return m;
}

// random element of the finest congruence-type subgroup: products of
// generators that visibly satisfy the defining congruences
inline IntMat random_sp_theta2(int g, Rng& rng, int factors = 6) {
    IntMat m = IntMat::identity(2 * g);
    for (int f = 0; f < factors; ++f) {
        switch (rng.integer(0, 2)) {
            case 0: {
                IntMat a = IntMat::identity(g);
                if (g > 1) {
                    int i = static_cast<int>(rng.integer(0, g - 1));
                    int j = static_cast<int>(rng.integer(0, g - 1));
                    if (i == j) j = (j + 1) % g;
                    a(i, j) = 2 * Int(rng.integer(-2, 2));
                }
                m = imul(m, embed_gl(g, a));
                break;
            }
            case 1: {
                IntMat b = random_symmetric(g, rng);
                for (int i = 0; i < g; ++i)
                    for (int j = 0; j < g; ++j) b(i, j) *= (i == j) ? 4 : 2;
                m = imul(m, upper_shear(g, b));
                break;
            }
            default: {
                IntMat c = random_symmetric(g, rng);
                for (int i = 0; i < g; ++i)
                    for (int j = 0; j < g; ++j) c(i, j) *= (i == j) ? 4 : 2;
                m = imul(m, lower_shear(g, c));
                break;
            }
        }
    }
    return m;
}

// random element congruent to the identity mod 2, via the order of the
// reduction in the finite group over F_2
inline IntMat random_sp2(int g, Rng& rng) {
    for (int attempt = 0; attempt < 20; ++attempt) {
        IntMat s = random_sp(g, rng, 4);
        auto mod2 = [&](const IntMat& x) {
            IntMat r(x.rows, x.cols);
            for (size_t i = 0; i < x.a.size(); ++i) {
                r.a[i] = x.a[i] % 2;
                if (r.a[i] < 0) r.a[i] += 2;
            }
            return r;
        };
        IntMat p = mod2(s);
        const IntMat id = IntMat::identity(2 * g);
        int order = 1;
        IntMat acc = p;
        while (!(acc == id) && order < 2000) {
            acc = mod2(imul(acc, p));
            ++order;
        }
        if (acc == id) {
            IntMat result = IntMat::identity(2 * g);
            for (int k = 0; k < order; ++k) result = imul(result, s);
            return result;
        }
    }
    throw std::runtime_error("random_sp2: could not build an element");
}

}  // namespace support
