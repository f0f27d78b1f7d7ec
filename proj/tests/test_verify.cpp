#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <thetacrit/verify.hpp>

#include <complex>

using namespace thetacrit;

namespace {

bool close(const cplx<ld>& a, const cplx<ld>& b, ld tol = 1e-9L) {
    return std::abs(a - b) <= tol;
}

// the order-5 cyclic point: the one-variable period whose restriction to the
// fifth-division grid satisfies the convolution equation with ratio 1 + 2i
CMat<ld> tau_order5() {
    CMat<ld> tau(1);
    tau(0, 0) = cplx<ld>(-7.0L / 25, 1.0L / 25);
    return tau;
}

CriticalCandidate crafted(const std::string& family, ExactValue lambda, long d) {
    CriticalCandidate c;
    c.family = family;
    c.lambda = std::move(lambda);
    c.approx = exact_approx(c.lambda);
    c.d = d;
    c.group = {Int(d)};
    return c;
}

}  // namespace

TEST_CASE("functional equation holds exactly on hand-built critical functions") {
    // the constant function on a cyclic group: every k-sum collapses to the
    // group order, so the ratio is the order itself
    CriticalFunction<ld> ones;
    ones.dmat = IntMat(1, 1, {7});
    ones.values.assign(7, cplx<ld>(1));
    ones.z = {cplx<ld>(0)};
    CHECK(check_functional_equation(ones, cplx<ld>(7)) == 0);

    // the indicator of 0 on an odd-order group: for k = 0 only l = 0
    // contributes, for k != 0 the two arguments can never vanish together
    CriticalFunction<ld> ind;
    ind.dmat = IntMat(1, 1, {9});
    ind.values.assign(9, cplx<ld>(0));
    ind.values[0] = 1;
    ind.z = {cplx<ld>(0)};
    CHECK(check_functional_equation(ind, cplx<ld>(1)) == 0);
    // and the constant ratio is wrong for the indicator
    CHECK(check_functional_equation(ind, cplx<ld>(9)) == 8);
}

TEST_CASE("functional equation rejects even orders and size mismatches") {
    CriticalFunction<ld> f;
    f.dmat = IntMat(1, 1, {4});
    f.values.assign(4, cplx<ld>(1));
    CHECK_THROWS_AS(check_functional_equation(f, cplx<ld>(4)), std::invalid_argument);

    f.dmat = IntMat(1, 1, {5});
    CHECK_THROWS_AS(check_functional_equation(f, cplx<ld>(5)), std::invalid_argument);

    // non-diagonal or non-positive grids are rejected outright
    CriticalFunction<ld> g;
    g.dmat = IntMat(2, 2, {1, 1, 0, 1});
    g.values.assign(1, cplx<ld>(1));
    CHECK_THROWS_AS(check_functional_equation(g, cplx<ld>(1)), std::invalid_argument);
}

TEST_CASE("theta restriction at the order-5 point satisfies the equation at 1+2i") {
    const CMat<ld> tau = tau_order5();
    const IntMat five(1, 1, {5});
    const std::vector<cplx<ld>> zero = {cplx<ld>(0)};
    const CriticalFunction<ld> f = restrict_theta(tau, five, zero, ld(1e-14L));
    REQUIRE(f.values.size() == 5);

    const cplx<ld> lam(1, 2);
    CHECK(check_functional_equation(f, lam) < 1e-10L);
    // the wrong ratio leaves a visible residual
    CHECK(check_functional_equation(f, std::conj(lam)) > 1e-3L);

    // evenness of the base restriction: indices 1<->4 and 2<->3
    CHECK(close(f.values[1], f.values[4], 1e-13L));
    CHECK(close(f.values[2], f.values[3], 1e-13L));
}

TEST_CASE("theta restriction matches the plain series and is representative-independent") {
    const CMat<ld> tau = tau_order5();

    // identity grid: the restriction is the single theta value itself
    const std::vector<cplx<ld>> z = {cplx<ld>(0.31L, 0.017L)};
    const CriticalFunction<ld> one =
        restrict_theta(tau, IntMat(1, 1, {1}), z, ld(1e-14L));
    REQUIRE(one.values.size() == 1);
    CHECK(close(one.values[0], theta(tau, z, ld(1e-14L)), 1e-12L));

    // the recentering frame agrees with the plain series far outside the
    // fundamental cell, where quasi-periodic bookkeeping carries the value
    std::vector<cplx<ld>> far = {cplx<ld>(3.7L, 0) + tau(0, 0) * cplx<ld>(2.5L, 0)};
    const CriticalFunction<ld> f_far =
        restrict_theta(tau, IntMat(1, 1, {1}), far, ld(1e-14L));
    CHECK(close(f_far.values[0], theta(tau, far, ld(1e-14L)), 1e-10L));

    // shifting the base point by a lattice integer leaves every value unchanged
    const IntMat five(1, 1, {5});
    const CriticalFunction<ld> base = restrict_theta(tau, five, z, ld(1e-14L));
    std::vector<cplx<ld>> shifted = {z[0] + cplx<ld>(2, 0)};
    const CriticalFunction<ld> moved = restrict_theta(tau, five, shifted, ld(1e-14L));
    for (size_t i = 0; i < 5; ++i) CHECK(close(base.values[i], moved.values[i], 1e-12L));
}

TEST_CASE("measurement recovers the order-5 ratio independently of the seed") {
    const CMat<ld> tau = tau_order5();
    const IntMat five(1, 1, {5});
    const auto m1 = measure_lambda(tau, five, ld(1e-13L), 12345UL, 6);
    CHECK(close(m1.lambda, cplx<ld>(1, 2), 1e-9L));
    CHECK(m1.spread < 1e-9L);

    const auto m2 = measure_lambda(tau, five, ld(1e-13L), 67890UL, 6);
    CHECK(close(m1.lambda, m2.lambda, 1e-9L));
}

TEST_CASE("measurement on the identity grid returns the trivial ratio") {
    const CMat<ld> tau = tau_order5();
    const auto m = measure_lambda(tau, IntMat(1, 1, {1}), ld(1e-13L), 5UL, 4);
    CHECK(close(m.lambda, cplx<ld>(1), 1e-14L));
    CHECK(m.spread < 1e-14L);
}

TEST_CASE("measurement at a generic period spreads instead of faking a constant") {
    CMat<ld> tau(1);
    tau(0, 0) = cplx<ld>(0, 0.7L);
    const auto m = measure_lambda(tau, IntMat(1, 1, {5}), ld(1e-13L), 5UL, 6);
    CHECK(m.spread > 1e-3L);
}

TEST_CASE("parity-constant ratios at the order-5 point agree with the measurement") {
    const CMat<ld> tau = tau_order5();
    const auto crit = criterion_ratios(tau, IntMat(1, 1, {5}), ld(1e-13L));
    REQUIRE_FALSE(crit.degenerate);
    CHECK(close(crit.lambda, cplx<ld>(1, 2), 1e-9L));
    CHECK(crit.spread < 1e-9L);
    for (bool v : crit.valid) CHECK(v);
}

TEST_CASE("full pipeline passes the order-5 quadratic pair") {
    for (const CriticalCandidate& c : enumerate_for_d(5)) {
        const VerificationReport r = verify_candidate(c);
        CAPTURE(c.family);
        CAPTURE(r.failed_stage);
        CAPTURE(r.detail);
        REQUIRE(r.pass);
        CHECK(r.failed_stage.empty());
        CHECK(close(r.lambda_empirical, c.approx, 1e-8L));
        CHECK(close(r.lambda_cocycle, r.lambda_empirical, 1e-8L));
        CHECK(std::abs(std::norm(r.lambda_empirical) - 5.0L) < 1e-7L);
        CHECK(r.residual >= 0);
        CHECK(r.residual < 1e-8L);
        CHECK(r.spread < 1e-8L);
        CHECK(r.criterion_spread < 1e-8L);
        CHECK(r.evenness < 1e-10L);
        CHECK(r.sign_resolution == "claimed");
        CHECK(r.precision == "double");
        CHECK(r.half_integral);
        CHECK(!r.cocycle_route.empty());
        REQUIRE(r.divisors.size() == 1);
        CHECK(r.divisors[0] == 5);
    }
}

TEST_CASE("full pipeline passes a genus-2 nested-radical candidate in extended precision") {
    const VerificationReport r = verify_candidate(family_quartic(1, 5, 5));
    CAPTURE(r.failed_stage);
    CAPTURE(r.detail);
    REQUIRE(r.pass);
    CHECK(close(r.lambda_empirical, r.lambda_claimed, 1e-8L));
    CHECK(std::abs(std::norm(r.lambda_empirical) - 11.0L) < 1e-7L);
    CHECK(r.precision == "extended");
    CHECK(r.sign_resolution == "claimed");
}

TEST_CASE("full pipeline passes both two-factor orientations including the negated one") {
    // mixed orientations: plain product of the factors
    const VerificationReport rm = verify_candidate(family_product(2, 1, +1, 3, 2, -1));
    CAPTURE(rm.failed_stage);
    CAPTURE(rm.detail);
    REQUIRE(rm.pass);
    CHECK(close(rm.lambda_empirical, rm.lambda_claimed, 1e-8L));
    CHECK(rm.sign_resolution == "claimed");

    // equal orientations: the sheared sublattice certifies the negated product,
    // and one even theta constant genuinely vanishes on this surface
    const CriticalCandidate ce = family_product(2, 1, +1, 3, 2, +1);
    const VerificationReport re = verify_candidate(ce);
    CAPTURE(re.failed_stage);
    CAPTURE(re.detail);
    REQUIRE(re.pass);
    CHECK(ce.approx.real() < 0);
    CHECK(close(re.lambda_empirical, ce.approx, 1e-8L));
    CHECK(re.sign_resolution == "claimed");
    CHECK(re.detail.find("mutually vanishing") != std::string::npos);
    CHECK(std::abs(std::norm(re.lambda_empirical) - 15.0L) < 1e-7L);
}

TEST_CASE("full pipeline passes a cyclotomic-unit candidate through the fallback basis") {
    const VerificationReport r = verify_candidate(family_lucas(5, {+1, +1}));
    CAPTURE(r.failed_stage);
    CAPTURE(r.detail);
    REQUIRE(r.pass);
    CHECK(close(r.lambda_empirical, r.lambda_claimed, 1e-8L));
    CHECK(std::abs(std::norm(r.lambda_empirical) - 11.0L) < 1e-7L);
}

TEST_CASE("failures name the stage that broke") {
    // a candidate that never received a payload
    const CriticalCandidate bare = family_lucas(5, {+1, +1}, false);
    const VerificationReport r0 = verify_candidate(bare);
    CHECK_FALSE(r0.pass);
    CHECK(r0.failed_stage == "payload");

    // a tampered claim with the right modulus but the wrong value: every
    // closed form still yields the true ratio, so reconciliation must object
    CriticalCandidate fake = family_quadratic(1, 4);
    fake.lambda = QuadSurd{4, 1, +1};  // 2 + i, also of squared modulus 5
    fake.approx = exact_approx(fake.lambda);
    const VerificationReport r1 = verify_candidate(fake);
    CHECK_FALSE(r1.pass);
    CHECK(r1.failed_stage == "reconcile");
    CHECK(close(r1.lambda_empirical, cplx<ld>(1, 2), 1e-8L));

    // a tampered pairing element breaks the very first exact stage
    CriticalCandidate warped = family_quadratic(1, 4);
    warped.payload->t0 = cm_scale(warped.payload->alg, warped.payload->t0, Rat(3));
    const VerificationReport r2 = verify_candidate(warped);
    CHECK_FALSE(r2.pass);
    CHECK(r2.failed_stage == "lattice");
}

TEST_CASE("precision can be forced up by configuration") {
    RunConfig cfg;
    cfg.prec = Precision::extended;
    const VerificationReport r = verify_candidate(family_quadratic(1, 4), cfg);
    REQUIRE(r.pass);
    CHECK(r.precision == "extended");
}

TEST_CASE("property suite certifies the shared critical-value laws") {
    // a passing pair: the order-5 value and its conjugate close under d/lambda
    const auto five = enumerate_for_d(5);
    const auto verdicts = prop11_suite(five);
    REQUIRE(verdicts.size() == 3 * five.size());
    for (const auto& v : verdicts) {
        CAPTURE(v.name);
        CAPTURE(v.detail);
        CHECK(v.pass);
    }
}

TEST_CASE("property suite flags violations instead of hiding them") {
    // equality case: the order itself saturates the modulus bound
    const auto eq = prop11_suite({crafted("order-itself", IntegerVal{5}, 5)});
    REQUIRE(eq.size() == 3);
    CHECK(eq[0].pass);
    CHECK(eq[0].detail == "equality at the order");
    CHECK(eq[1].pass);  // real value is its own conjugate
    CHECK(eq[2].pass);

    // modulus violation: a value larger than the order
    const auto big = prop11_suite({crafted("too-big", IntegerVal{6}, 5)});
    CHECK_FALSE(big[0].pass);

    // integrality violation: sqrt(2) + i has the right modulus for order 3
    // but its half-shifted value is not an algebraic integer
    const auto bad = prop11_suite({crafted("bad-shift", QuadSurd{2, 1, +1}, 3)});
    CHECK(bad[0].pass);
    CHECK(bad[1].detail == "conjugate not present in the set");
    CHECK_FALSE(bad[1].pass);
    CHECK_FALSE(bad[2].pass);
}
