#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thetacrit/siegel.hpp>

#include "support.hpp"

using namespace thetacrit;

namespace {

RatMat rat2x2(long a, long b, long c, long d, long den = 1) {
    RatMat m(2, 2);
    m(0, 0) = make_rat(a, den);
    m(0, 1) = make_rat(b, den);
    m(1, 0) = make_rat(c, den);
    m(1, 1) = make_rat(d, den);
    return m;
}

}  // namespace

TEST_CASE("congruence-type classification of fixed elements") {
    SUBCASE("unit shear is integral-symplectic only") {
        auto cl = classify_theta_level(rat2x2(1, 1, 0, 1));
        CHECK(cl.symplectic);
        CHECK(cl.integral);
        CHECK(!cl.theta);
        CHECK(!cl.mod2_unipotent);
        CHECK(cl.finest() == "sp_z");
    }
    SUBCASE("rotation lies in the theta group") {
        auto cl = classify_theta_level(rat2x2(0, 1, -1, 0));
        CHECK(cl.theta);
        CHECK(!cl.mod2_unipotent);
        CHECK(cl.finest() == "sp_theta");
    }
    SUBCASE("genus-1 degree-5 multiplier matrix is in the finest class") {
        auto cl = classify_theta_level(rat2x2(-31, -8, 4, 1));
        CHECK(cl.theta2);
        CHECK(cl.finest() == "sp_theta_2");
    }
    SUBCASE("non-symplectic input") {
        CHECK(classify_theta_level(rat2x2(1, 2, 3, 4)).finest() == "none");
    }
}

TEST_CASE("rational 2-adic theta level") {
    CHECK(rational_theta_level(rat2x2(-3, -4, 4, -3, 5)));
    CHECK(!rational_theta_level(rat2x2(-3, -8, 2, -3, 5)));
    // even denominators are excluded
    CHECK(!rational_theta_level(rat2x2(1, 1, 0, 2, 2)));
    // integral case agrees with the integral classification
    Rng rng(101);
    for (int t = 0; t < 15; ++t) {
        IntMat s = support::random_sp_theta2(2, rng);
        CHECK(rational_theta_level(to_rat(s)));
        CHECK(classify_theta_level(to_rat(s)).theta2);
    }
}

TEST_CASE("generated subgroup elements satisfy the defining congruences") {
    Rng rng(555);
    for (int t = 0; t < 15; ++t) {
        const int g = 1 + static_cast<int>(rng.integer(0, 1));
        IntMat s = support::random_sp(g, rng);
        CHECK(is_symplectic(to_rat(s)));
        IntMat s2 = support::random_sp2(g, rng);
        auto cl = classify_theta_level(to_rat(s2));
        CHECK(cl.mod2_unipotent);
        IntMat st = support::random_sp_theta2(g, rng);
        CHECK(classify_theta_level(to_rat(st)).theta2);
    }
}

TEST_CASE("for mod-2 unipotent elements the diagonal tests match the plain block diagonals") {
    Rng rng(737);
    for (int t = 0; t < 25; ++t) {
        const int g = 1 + static_cast<int>(rng.integer(0, 1));
        IntMat s = support::random_sp2(g, rng);
        auto cl = classify_theta_level(to_rat(s));
        REQUIRE(cl.mod2_unipotent);
        bool plain = true;
        for (int i = 0; i < g; ++i)
            if (s(i, g + i) % 4 != 0 || s(g + i, i) % 4 != 0) plain = false;
        CHECK(cl.theta2 == plain);
    }
}

TEST_CASE("symplectic inverse") {
    Rng rng(12);
    for (int t = 0; t < 10; ++t) {
        const int g = 1 + static_cast<int>(rng.integer(0, 1));
        RatMat s = to_rat(support::random_sp(g, rng));
        CHECK(rmul(s, sp_inverse(s)) == RatMat::identity(2 * g));
    }
}

TEST_CASE("action on the Siegel upper half space") {
    SUBCASE("the rotation fixes the standard point") {
        CMat<double> tau(1);
        tau(0, 0) = cplx<double>(0, 1);
        auto out = siegel_act(rat2x2(0, 1, -1, 0), tau);
        CHECK(std::abs(out(0, 0) - cplx<double>(0, 1)) < 1e-14);
    }
    SUBCASE("translations shift the real part") {
        CMat<double> tau(2);
        tau(0, 0) = cplx<double>(0.1, 2.0);
        tau(1, 1) = cplx<double>(-0.3, 1.5);
        tau(0, 1) = tau(1, 0) = cplx<double>(0.05, 0.2);
        RatMat shear = to_rat(support::upper_shear(2, IntMat(2, 2, {1, 2, 2, -1})));
        auto out = siegel_act(shear, tau);
        CHECK(std::abs(out(0, 0) - (tau(0, 0) + 1.0)) < 1e-14);
        CHECK(std::abs(out(0, 1) - (tau(0, 1) + 2.0)) < 1e-14);
        CHECK(std::abs(out(1, 1) - (tau(1, 1) - 1.0)) < 1e-14);
    }
    SUBCASE("degree-5 scaling relation at the quadratic fixed point") {
        CMat<double> tau(1);
        tau(0, 0) = cplx<double>(-7.0 / 25.0, 1.0 / 25.0);
        auto out = siegel_act(rat2x2(-31, -8, 4, 1), tau);
        CHECK(std::abs(out(0, 0) - cplx<double>(-7.0, 1.0)) < 1e-12);
    }
    SUBCASE("cocycle property of the action") {
        Rng rng(77);
        int valid = 0;
        for (int t = 0; t < 30 && valid < 10; ++t) {
            const int g = 2;
            RatMat s1 = to_rat(support::random_sp(g, rng, 4));
            RatMat s2 = to_rat(support::random_sp(g, rng, 4));
            CMat<double> tau(2);
            tau(0, 0) = cplx<double>(0.2, 1.1);
            tau(1, 1) = cplx<double>(-0.4, 0.9);
            tau(0, 1) = tau(1, 0) = cplx<double>(0.1, 0.3);
            // skip samples whose action denominators are badly conditioned
            auto den_ok = [&](const RatMat& s, const CMat<double>& at) {
                CMat<double> den = cadd(cmul(rat_to_cmat<double>(rblock_c(s, g)), at),
                                        rat_to_cmat<double>(rblock_d(s, g)));
                double scale = std::max(1.0, cmat_max_abs(den));
                return std::abs(cdet(den)) > 1e-2 * scale * scale;
            };
            auto mid = siegel_act(s2, tau);
            if (!den_ok(s2, tau) || !den_ok(s1, mid) || !den_ok(rmul(s1, s2), tau)) continue;
            auto lhs = siegel_act(rmul(s1, s2), tau);
            auto rhs = siegel_act(s1, mid);
            CHECK(cmat_max_abs(csub(lhs, rhs)) < 1e-9 * std::max(1.0, cmat_max_abs(lhs)));
            CHECK(is_riemann_matrix(symmetrize(lhs), 1e-9));
            ++valid;
        }
        CHECK(valid >= 6);
    }
}

TEST_CASE("riemann matrix predicates") {
    CMat<double> good(2);
    good(0, 0) = cplx<double>(0, 1);
    good(1, 1) = cplx<double>(0, 1);
    good(0, 1) = good(1, 0) = cplx<double>(2, 0.1);
    CHECK(is_riemann_matrix(good, 1e-12));
    CMat<double> indef(2);
    indef(0, 0) = cplx<double>(0, 1);
    indef(1, 1) = cplx<double>(0, -1);
    CHECK(!is_riemann_matrix(indef, 1e-12));
    CMat<double> asym = good;
    asym(0, 1) += cplx<double>(0.5, 0);
    CHECK(!is_riemann_matrix(asym, 1e-12));
}

TEST_CASE("adapted factorization") {
    SUBCASE("genus-1 multiplier of the degree-5 quadratic point") {
        RatMat h = rat2x2(-3, -4, 4, -3, 5);
        auto ab = adapted_basis(h);
        REQUIRE(ab.d.size() == 1);
        CHECK(ab.d[0] == 5);
        CHECK(classify_theta_level(to_rat(imul(ab.sigma2, ab.sigma1))).theta2);
    }
    SUBCASE("integral symplectic input gives a trivial divisor") {
        Rng rng(31);
        for (int t = 0; t < 8; ++t) {
            auto ab = adapted_basis(to_rat(support::random_sp(2, rng)));
            for (const auto& d : ab.d) CHECK(d == 1);
        }
    }
    SUBCASE("invariant divisors are recovered from scrambled products") {
        Rng rng(131);
        const std::vector<std::vector<long>> chains = {{1, 3}, {3, 3}, {1, 15}, {5, 15}, {3, 9}};
        for (const auto& chain : chains) {
            const int g = static_cast<int>(chain.size());
            RatMat dm(2 * g, 2 * g);
            for (int k = 0; k < g; ++k) {
                dm(k, k) = make_rat(1, chain[k]);
                dm(g + k, g + k) = Rat(static_cast<long>(chain[k]));
            }
            for (int t = 0; t < 4; ++t) {
                RatMat h = rmul(to_rat(support::random_sp(g, rng, 4)),
                                rmul(dm, to_rat(support::random_sp(g, rng, 4))));
                auto ab = adapted_basis(h);
                REQUIRE(static_cast<int>(ab.d.size()) == g);
                for (int k = 0; k < g; ++k) CHECK(ab.d[k] == chain[k]);
            }
        }
    }
    SUBCASE("theta-level of the product matches the rational theta level") {
        Rng rng(733);
        int tested = 0;
        for (int t = 0; t < 30 && tested < 8; ++t) {
            // odd-determinant divisor conjugated into a rational symplectic
            RatMat dm(2, 2);
            dm(0, 0) = make_rat(1, 5);
            dm(1, 1) = Rat(5);
            RatMat h = rmul(to_rat(support::random_sp(1, rng, 4)),
                            rmul(dm, to_rat(support::random_sp(1, rng, 4))));
            auto ab = adapted_basis(h);
            const bool lhs = rational_theta_level(h);
            const bool rhs = classify_theta_level(to_rat(imul(ab.sigma2, ab.sigma1))).theta2;
            CHECK(lhs == rhs);
            ++tested;
        }
    }
}

TEST_CASE("elliptic elements") {
    CHECK(is_elliptic(rat2x2(-3, -4, 4, -3, 5)));
    CHECK(is_elliptic(rat2x2(0, 1, -1, 0)));
    CHECK(!is_elliptic(rat2x2(1, 1, 0, 1)));   // parabolic shear
    CHECK(!is_elliptic(rat2x2(2, 0, 0, 1, 2)));  // hyperbolic diag(1, 1/4)... scaled
    CHECK(!is_elliptic(rat2x2(2, 0, 0, 2)));
}

TEST_CASE("exact characteristic polynomial and polynomial helpers") {
    RatPoly p = rat_char_poly(rat2x2(0, 1, -1, 0));
    REQUIRE(p.size() == 3);
    CHECK(p[0] == 1);
    CHECK(p[1] == 0);
    CHECK(p[2] == 1);
    // (x^2 - 1) and (x^2 + 2x + 1) share the factor (x + 1)
    RatPoly a = {Rat(-1), Rat(0), Rat(1)};
    RatPoly b = {Rat(1), Rat(2), Rat(1)};
    RatPoly g = poly_gcd(a, b);
    REQUIRE(g.size() == 2);
    CHECK(g[0] == 1);
    CHECK(g[1] == 1);
    auto [q, r] = poly_divmod(a, g);
    CHECK(r.empty());
    REQUIRE(q.size() == 2);
    CHECK(q[0] == -1);
    CHECK(q[1] == 1);
}

TEST_CASE("cayley transform") {
    Rng rng(2027);
    SUBCASE("maps the group into the Lie algebra and back") {
        int done = 0;
        for (int t = 0; t < 40 && done < 10; ++t) {
            const int g = 1 + static_cast<int>(rng.integer(0, 1));
            RatMat h = to_rat(support::random_sp(g, rng, 4));
            if (rdet(radd(h, RatMat::identity(2 * g))) == 0) continue;
            RatMat x = cayley_inv(h);
            CHECK(lie_is_sp(x));
            if (rdet(rsub(RatMat::identity(2 * g), x)) == 0) continue;
            CHECK(cayley(x) == h);
            ++done;
        }
        CHECK(done > 0);
    }
    SUBCASE("lie decomposition witnesses") {
        for (int t = 0; t < 10; ++t) {
            const int g = 2;
            // random Lie-algebra element [[a, b],[c, -ta]] with b, c symmetric
            RatMat x(2 * g, 2 * g);
            for (int i = 0; i < g; ++i)
                for (int j = 0; j < g; ++j) {
                    x(i, j) = Rat(rng.integer(-3, 3));
                    x(g + j, g + i) = -x(i, j);
                }
            IntMat b = support::random_symmetric(g, rng), c = support::random_symmetric(g, rng);
            for (int i = 0; i < g; ++i)
                for (int j = 0; j < g; ++j) {
                    x(i, g + j) = Rat(b(i, j));
                    x(g + i, j) = Rat(c(i, j));
                }
            REQUIRE(lie_is_sp(x));
            RatMat y = lie_decompose(x);
            CHECK(rsub(y, sp_star(y)) == x);
        }
    }
    SUBCASE("theta-level equivalence through the transform") {
        int done = 0;
        for (int t = 0; t < 60 && done < 12; ++t) {
            const int g = 1 + static_cast<int>(rng.integer(0, 1));
            IntMat s = (t % 2 == 0) ? support::random_sp_theta2(g, rng)
                                    : support::random_sp2(g, rng);
            RatMat h = to_rat(s);
            auto eq = cayley_theta_equivalence(h);
            if (!eq.has_value()) continue;
            CHECK(*eq == rational_theta_level(h));
            ++done;
        }
        CHECK(done >= 6);
    }
    SUBCASE("fixed example in the finest class") {
        auto eq = cayley_theta_equivalence(rat2x2(-31, -8, 4, 1));
        REQUIRE(eq.has_value());
        CHECK(*eq);
        auto eq5 = cayley_theta_equivalence(rat2x2(-3, -4, 4, -3, 5));
        REQUIRE(eq5.has_value());
        CHECK(*eq5);
    }
}
