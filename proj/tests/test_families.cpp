#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thetacrit/families.hpp>

#include <complex>

using namespace thetacrit;

namespace {

RatMat rmat(int n, std::vector<Rat> v) {
    RatMat m(n, n);
    m.a = std::move(v);
    return m;
}

bool close(const cplx<ld>& x, const cplx<ld>& y, ld tol = 1e-9L) {
    return std::abs(x - y) <= tol;
}

RatPoly ipoly(std::vector<long> v) {
    RatPoly p;
    for (long c : v) p.push_back(Rat(c));
    return p;
}

}  // namespace

TEST_CASE("quadratic constructor pins the value and its adapted factors") {
    const CriticalCandidate c = family_quadratic(1, 4);
    CHECK(c.family == "quadratic(1,4)");
    CHECK(exact_display(c.lambda) == "1 + 2i");
    CHECK(c.d == 5);
    CHECK(c.group == std::vector<Int>{Int(5)});
    CHECK(c.sign == SignStatus::pinned);
    CHECK(c.conjugate_also_critical);
    CHECK(c.half_integral);
    CHECK(close(c.approx, cplx<ld>(1, 2)));

    REQUIRE(c.payload.has_value());
    const VerificationPayload& p = *c.payload;
    CHECK(*p.sigma1 == IntMat(2, 2, {-3, -1, 4, 1}));
    CHECK(*p.sigma2 == IntMat(2, 2, {1, -7, 0, 1}));
    CHECK(imul(*p.sigma2, *p.sigma1) == IntMat(2, 2, {-31, -8, 4, 1}));
    CHECK(*p.dmat == IntMat(1, 1, {5}));
    CHECK(payload_mult_matrix(p) ==
          rmat(2, {Rat(-3, 5), Rat(-4, 5), Rat(4, 5), Rat(-3, 5)}));
    CHECK_FALSE(p.conjugated);

    const CriticalCandidate c2 = family_quadratic(9, 4);
    CHECK(exact_display(c2.lambda) == "3 + 2i");
    CHECK(c2.d == 13);
    CHECK(payload_mult_matrix(*c2.payload) ==
          rmat(2, {Rat(5, 13), Rat(-36, 13), Rat(4, 13), Rat(5, 13)}));

    // an order of 3 mod 4 still gets a positive divisor block
    const CriticalCandidate c3 = family_quadratic(4, 3);
    CHECK(c3.d == 7);
    CHECK(*c3.payload->dmat == IntMat(1, 1, {7}));
}

TEST_CASE("quadratic constructor rejects parameters off the congruence classes") {
    CHECK_THROWS_AS(family_quadratic(4, 5), std::invalid_argument);
    CHECK_THROWS_AS(family_quadratic(2, 1), std::invalid_argument);
    CHECK_THROWS_AS(family_quadratic(3, 2), std::invalid_argument);
    CHECK_THROWS_AS(family_quadratic(0, 5), std::invalid_argument);
    CHECK_THROWS_AS(family_quadratic(-1, 2), std::invalid_argument);
}

TEST_CASE("conjugate candidates mirror the value and mark the payload") {
    const CriticalCandidate c = family_quadratic(1, 4);
    const CriticalCandidate cc = candidate_conjugate(c);
    CHECK(cc.family == "quadratic(1,4)~");
    CHECK(exact_display(cc.lambda) == "1 - 2i");
    CHECK(close(cc.approx, std::conj(c.approx)));
    CHECK(cc.payload->conjugated);
    CHECK(candidate_conjugate(cc).payload->conjugated == false);
}

TEST_CASE("product constructor carries the two-factor block factorization") {
    const CriticalCandidate c = family_product(2, 1, +1, 3, 2, -1);
    CHECK(c.family == "product(2,1,+;3,2,-)");
    CHECK(exact_display(c.lambda) == "(√2 + i)(√3 - i√2)");
    CHECK(c.d == 15);
    CHECK(c.group == std::vector<Int>{Int(15)});
    CHECK(c.half_integral);
    CHECK(close(c.approx, cplx<ld>(std::sqrt(2.0L), 1) *
                              cplx<ld>(std::sqrt(3.0L), -std::sqrt(2.0L))));

    // mixed signs: the divisor block mixes the two signed factor orders
    REQUIRE(c.payload.has_value());
    const VerificationPayload& p = *c.payload;
    CHECK(*p.dmat == IntMat(2, 2, {1, -4, -4, 1}));
    // transported back to the unmixed basis, the adapted factors are diagonal
    // shears in each component
    const RatMat pinv = rinverse(*p.pchange);
    CHECK(rmul(*p.pchange, rmul(to_rat(*p.sigma1), pinv)) ==
          to_rat(IntMat(4, 4, {1, 0, 0, 0, 0, 1, 0, 0, 2, 0, 1, 0, 0, -2, 0, 1})));
    CHECK(rmul(*p.pchange, rmul(to_rat(*p.sigma2), pinv)) ==
          to_rat(IntMat(4, 4, {1, 0, -4, 0, 0, 1, 0, 12, 0, 0, 1, 0, 0, 0, 0, 1})));

    // equal signs use the sheared sublattice and keep the divisor diagonal
    const CriticalCandidate ce = family_product(2, 1, +1, 3, 2, +1);
    CHECK(*ce.payload->dmat == IntMat(2, 2, {-3, 0, 0, 5}));
    CHECK(*ce.payload->sigma2 ==
          IntMat(4, 4, {1, 0, -6, 8, 0, 1, 8, 6, 0, 0, 1, 0, 0, 0, 0, 1}));

    // the order-21 pair used by the sign-distinction example
    for (int e2 : {+1, -1}) {
        const CriticalCandidate c21 = family_product(2, 1, +1, 6, 1, e2);
        CHECK(c21.d == 21);
        CHECK(c21.payload.has_value());
        CHECK(std::abs(std::norm(c21.approx) - 21.0L) < 1e-9L);
    }
}

TEST_CASE("product constructor rejects bad factor pairs") {
    CHECK_THROWS_AS(family_product(2, 1, +1, 2, 1, +1), std::invalid_argument);
    CHECK_THROWS_AS(family_product(1, 4, +1, 3, 2, +1), std::invalid_argument);
    CHECK_THROWS_AS(family_product(2, 1, 0, 3, 2, +1), std::invalid_argument);
    CHECK_THROWS_AS(family_product(2, 1, +1, 5, 4, +1), std::invalid_argument);
}

TEST_CASE("product sign flips produce conjugate values") {
    const CriticalCandidate a = family_product(2, 1, +1, 3, 2, -1);
    const CriticalCandidate b = family_product(2, 1, -1, 3, 2, +1);
    CHECK(close(b.approx, std::conj(a.approx)));
    CHECK(exact_approx(exact_conjugate(a.lambda)) == b.approx);
}

TEST_CASE("quartic constructor handles both doubling shapes") {
    // odd middle coefficient
    const CriticalCandidate c = family_quartic(1, 5, 5);
    CHECK(c.family == "quartic(1,5,5)");
    CHECK(exact_display(c.lambda) == "1 + √5 - i√(5 - 2√5)");
    CHECK(c.d == 11);
    CHECK(c.group == std::vector<Int>{Int(11)});
    CHECK(c.half_integral);
    REQUIRE(c.payload.has_value());
    CHECK(*c.payload->dmat == IntMat(2, 2, {1, 0, 0, 11}));
    CHECK(*c.payload->sigma1 == IntMat(4, 4, {1, 22, 0, 0, -1, -1, 110, -5, 0, -4,
                                              -21, 1, 2, -2, -242, 11}));
    // the derived second factor matches the closed form
    //   [[1, -F, (f+1)^2 - c, -F/2], [-1, c + df/2, (b+c+1)(1-d)/2 - 1,
    //    (2c + df - 2)/4], [0, 2, 1, 1], [0, 2, 0, 1]]
    // with f = 2a - d - 3 = -12 and F = (b+c+1)f + 2c + 2 = -120
    CHECK(*c.payload->sigma2 == IntMat(4, 4, {1, 120, 116, 60, -1, -61, -56, -31,
                                              0, 2, 1, 1, 0, 2, 0, 1}));
    // lower blocks of the combined transformation
    const IntMat sigma = imul(*c.payload->sigma2, *c.payload->sigma1);
    CHECK(sigma(2, 0) == 0);
    CHECK(sigma(2, 1) == -8);
    CHECK(sigma(3, 0) == 0);
    CHECK(sigma(3, 1) == -4);
    CHECK(sigma(2, 2) == -43);
    CHECK(sigma(2, 3) == 2);
    CHECK(sigma(3, 2) == -22);
    CHECK(sigma(3, 3) == 1);

    // middle coefficient divisible by four
    const CriticalCandidate c8 = family_quartic(1, 8, 8);
    CHECK(exact_display(c8.lambda) == "1 + 2√2 - 2i√(2 - √2)");
    CHECK(c8.d == 17);
    CHECK(*c8.payload->sigma1 ==
          IntMat(4, 4, {1, 128, 0, 0, 0, 1, 0, 0, 0, 1, 1, 0, 1, 64, -128, 1}));
    // derived second factor; the (1,3) entry is (b+c)^2 - c, the unique value
    // keeping the matrix symplectic
    CHECK(*c8.payload->sigma2 == IntMat(4, 4, {-31, -8, 248, -32, 4, 1, -32, 4,
                                               0, 1, 1, 0, 1, 8, 0, 1}));
    const IntMat s8 = imul(*c8.payload->sigma2, *c8.payload->sigma1);
    CHECK(s8(2, 0) == 0);
    CHECK(s8(2, 1) == 2);
    CHECK(s8(3, 0) == 2);
    CHECK(s8(2, 2) == 1);
    CHECK(s8(2, 3) == 0);
    CHECK(s8(3, 3) == 1);
}

TEST_CASE("quartic multiplier matches its closed form on the doubled basis") {
    const long a = 1, b = 8, cc = 4, d = 13;
    const CriticalCandidate c = family_quartic(a, b, cc);
    CHECK(exact_display(c.lambda) == "3 - 2i");
    const RatMat m = payload_mult_matrix(*c.payload);
    const RatMat want = rmat(
        4, {Rat(2 * a - d, d), Rat(-a * cc, d), Rat(b * b + b * cc - a * cc, d),
            Rat(-2 * b - 2 * cc, d),
            Rat(4, d), Rat(d - 2 * cc, d), Rat(-2 * b - 2 * cc, d), Rat(4, d),
            Rat(4, d), Rat(2 * a + 2 * b, d), Rat(2 * a - d, d), Rat(4, d),
            Rat(2 * a + 2 * b, d), Rat(b * b + a * b - a * cc, d), Rat(-a * cc, d),
            Rat(d - 2 * cc, d)});
    CHECK(m == want);
}

TEST_CASE("quartic constructor splits reducible defining polynomials") {
    const CriticalCandidate c = family_quartic(3, 8, 4);
    CHECK(c.d == 15);
    CHECK(exact_display(c.lambda) == "2√(2 - √3) + i(√3 + 2)");
    CHECK(c.payload->alg.f.size() == 2);
    REQUIRE(c.notes.size() >= 1);
    CHECK(c.notes[0].find("reducible") != std::string::npos);

    const CriticalCandidate c2 = family_quartic(5, 12, 4);
    CHECK(c2.d == 21);
    CHECK(c2.payload->alg.f.size() == 2);

    const CriticalCandidate c3 = family_quartic(3, 11, 7);
    CHECK(c3.d == 21);
    CHECK(c3.payload->alg.f.size() == 1);
}

TEST_CASE("quartic orientation separates the two congruence cases") {
    // first kind: negative imaginary-to-real ratio
    for (auto [a, b, cc] : {std::array<long, 3>{1, 5, 5}, {1, 9, 5}, {1, 8, 8}, {1, 8, 4}}) {
        const CriticalCandidate c = family_quartic(a, b, cc);
        CHECK(c.approx.imag() / c.approx.real() < 0);
    }
    // second kind: positive ratio
    for (auto [a, b, cc] : {std::array<long, 3>{3, 8, 4}, {3, 11, 7}}) {
        const CriticalCandidate c = family_quartic(a, b, cc);
        CHECK(c.approx.imag() / c.approx.real() > 0);
    }
}

TEST_CASE("quartic constructor rejects invalid triples") {
    CHECK_THROWS_AS(family_quartic(1, 2, 2), std::invalid_argument);
    CHECK_THROWS_AS(family_quartic(2, 4, 4), std::invalid_argument);
    CHECK_THROWS_AS(family_quartic(1, 3, 3), std::invalid_argument);
    CHECK_THROWS_AS(family_quartic(0, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(family_quartic(1, 4, 4), std::invalid_argument);  // zero discriminant
}

TEST_CASE("cyclotomic candidates carry payloads and land in the quartic field") {
    const RatPoly quartic_minpoly = minimal_polynomial(family_quartic(1, 5, 5).lambda);
    CHECK(quartic_minpoly == ipoly({121, -44, 6, -4, 1}));

    for (int mask = 0; mask < 4; ++mask) {
        const std::vector<int> signs{mask & 1 ? -1 : +1, mask & 2 ? -1 : +1};
        const CriticalCandidate l = family_lucas(5, signs);
        CHECK(l.d == 11);
        CHECK(l.group == std::vector<Int>{Int(11)});
        CHECK(l.sign == SignStatus::ambiguous);
        CHECK(l.payload.has_value());
        // every sign choice is an algebraic conjugate of the quartic value
        CHECK(minimal_polynomial(l.lambda) == quartic_minpoly);
    }

    const CriticalCandidate l = family_lucas(5, {+1, +1});
    CHECK(l.family == "lucas(5;++)");
    CHECK(exact_display(l.lambda) == "(1 + 2i sin(π/5))(1 + 2i sin(2π/5))");
    const ld r5 = std::sqrt(5.0L);
    CHECK(close(l.approx, cplx<ld>(1 - r5, std::sqrt(5 + 2 * r5))));

    const CriticalCandidate l7 = family_lucas(7, {+1, +1, +1});
    CHECK(l7.d == 29);
    CHECK(l7.payload.has_value());

    const CriticalCandidate skip = family_lucas(5, {+1, +1}, false);
    CHECK_FALSE(skip.payload.has_value());
    REQUIRE(skip.notes.size() == 1);
    CHECK(skip.notes[0].find("skipped") != std::string::npos);
}

TEST_CASE("cyclotomic constructor rejects bad orders and sign vectors") {
    CHECK_THROWS_AS(family_lucas(3, {}), std::invalid_argument);
    CHECK_THROWS_AS(family_lucas(4, {+1}), std::invalid_argument);
    CHECK_THROWS_AS(family_lucas(5, {+1}), std::invalid_argument);
    CHECK_THROWS_AS(family_lucas(5, {+1, 2}), std::invalid_argument);
}

TEST_CASE("minimal polynomials come with exact division certificates") {
    CHECK(minimal_polynomial(QuadSurd{1, 4, +1}) == ipoly({5, -2, 1}));
    CHECK(minimal_polynomial(QuadSurd{2, 1, +1}) == ipoly({9, 0, -2, 0, 1}));
    CHECK(minimal_polynomial(IntegerVal{7}) == ipoly({-7, 1}));
    CHECK(minimal_polynomial(ProdSurd{QuadSurd{2, 1, +1}, QuadSurd{3, 2, -1}}) ==
          ipoly({50625, 0, -900, 0, -314, 0, -4, 0, 1}));
}

TEST_CASE("half-shift integrality certifies the shifted lattice condition") {
    CHECK(half_shift_polynomial(ipoly({5, -2, 1})) == ipoly({1, 0, 1}));
    CHECK(is_half_integral(ipoly({5, -2, 1})));
    // sqrt(2) + i has |.|^2 = 3 but fails the shifted integrality test
    CHECK_FALSE(is_half_integral(minimal_polynomial(QuadSurd{2, 1, +1})));
    // all pinned family values pass it
    for (const CriticalCandidate& c : enumerate_for_d(21))
        if (c.sign == SignStatus::pinned) CHECK(c.half_integral);
}

TEST_CASE("enumeration deduplicates candidates across families") {
    const auto unit = enumerate_for_d(1);
    REQUIRE(unit.size() == 1);
    CHECK(unit[0].family == "unit");
    CHECK(unit[0].d == 1);

    const auto five = enumerate_for_d(5);
    REQUIRE(five.size() == 2);
    CHECK(five[0].family == "quadratic(1,4)");
    CHECK(five[1].family == "quadratic(1,4)~");

    // 3 - 2i arises both as a quadratic and a quartic value; only the first
    // construction survives
    const auto thirteen = enumerate_for_d(13);
    CHECK(thirteen.size() == 6);
    for (const CriticalCandidate& c : thirteen)
        CHECK(c.family.rfind("quartic", 0) == std::string::npos);

    // the equal-orientation products certify the negated value, so they no
    // longer shadow the quartic(3,8,4) pair: 2*sqrt(2-sqrt(3)) = sqrt(6)-sqrt(2)
    // makes that quartic value equal the positive product, and the enumeration
    // keeps both signs as distinct candidates
    const auto fifteen = enumerate_for_d(15);
    CHECK(fifteen.size() == 14);
    bool has_quartic = false, has_product = false;
    std::optional<cplx<ld>> prod_pp, quart384;
    for (const CriticalCandidate& c : fifteen) {
        if (c.family == "quartic(1,9,5)") has_quartic = true;
        if (c.family == "product(2,1,+;3,2,-)") has_product = true;
        if (c.family == "product(2,1,+;3,2,+)") prod_pp = c.approx;
        if (c.family == "quartic(3,8,4)") quart384 = c.approx;
    }
    CHECK(has_quartic);
    CHECK(has_product);
    REQUIRE(prod_pp.has_value());
    REQUIRE(quart384.has_value());
    CHECK(close(*prod_pp, -*quart384));

    CHECK_THROWS_AS(enumerate_for_d(4), std::invalid_argument);
    CHECK_THROWS_AS(enumerate_for_d(-3), std::invalid_argument);
}

TEST_CASE("every enumerated candidate satisfies the shared invariants") {
    for (long d : {1L, 5L, 9L, 13L, 15L, 17L, 21L}) {
        for (const CriticalCandidate& c : enumerate_for_d(d)) {
            CHECK(std::abs(std::norm(c.approx) - static_cast<ld>(d)) <=
                  1e-9L * std::max<ld>(1, static_cast<ld>(d)));
            Int prod = 1;
            for (const Int& g : c.group) prod *= g;
            CHECK(prod == c.d);
            CHECK(close(exact_approx(c.lambda), c.approx, 1e-12L));
            if (!c.payload) continue;
            const RatMat m = payload_mult_matrix(*c.payload);
            CHECK(is_symplectic(m));
            CHECK(quotient_invariants(m) == c.group);
            if (c.payload->sigma1) {
                const IntMat s = imul(*c.payload->sigma2, *c.payload->sigma1);
                CHECK(classify_theta_level(to_rat(s)).theta2);
            }
        }
    }
}
