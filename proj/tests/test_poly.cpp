#include "piekit/poly.hpp"

#include <random>

#include "doctest.h"
#include "test_util.hpp"

using namespace piekit;
using piekit::testutil::Quadrature;
using piekit::testutil::random_poly;

namespace {
const Domain unit(0.0, 1.0);
}

TEST_CASE("additive inverse gives canonical zero") {
    PolyMatrix s = PolyMatrix::monomial(1.0, 1, 0, unit);
    PolyMatrix sum = s + (-s);
    CHECK(sum.is_zero());
    CHECK(sum.coeffs().empty());
}

TEST_CASE("additive identity") {
    PolyMatrix p = PolyMatrix::monomial(1.0, 2, 0, unit) + PolyMatrix::monomial(0.2, 0, 0, unit);
    PolyMatrix z = PolyMatrix::zero(1, 1, unit);
    CHECK(p + z == p);
}

TEST_CASE("bivariate addition bookkeeping vs evaluation") {
    PolyMatrix a = PolyMatrix::monomial(-1.0, 0, 1, unit);  // -theta
    PolyMatrix b = PolyMatrix::monomial(-1.0, 1, 0, unit);  // -s
    PolyMatrix sum = a + b;
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        double s = u(rng), th = u(rng);
        CHECK(sum.eval(s, th)(0, 0) == doctest::Approx(-(s + th)).epsilon(1e-14));
    }
}

TEST_CASE("multiplication basics") {
    PolyMatrix s = PolyMatrix::monomial(1.0, 1, 0, unit);
    CHECK((s * s) == PolyMatrix::monomial(1.0, 2, 0, unit));

    std::mt19937 rng(3);
    PolyMatrix A = random_poly(rng, 2, 3, 3, 0, unit);
    PolyMatrix I = PolyMatrix::constant(Matrix::Identity(2, 2), unit);
    CHECK(I * A == A);

    PolyMatrix sm = PolyMatrix::monomial(1.0, 1, 0, unit) - PolyMatrix::monomial(1.0, 0, 1, unit);
    PolyMatrix sp = PolyMatrix::monomial(1.0, 1, 0, unit) + PolyMatrix::monomial(1.0, 0, 1, unit);
    PolyMatrix prod = sm * sp;  // s^2 - theta^2
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int k = 0; k < 20; ++k) {
        double s_ = u(rng), th = u(rng);
        CHECK(prod.eval(s_, th)(0, 0) == doctest::Approx(s_ * s_ - th * th).epsilon(1e-14));
    }
}

TEST_CASE("dimension and domain mismatches rejected") {
    PolyMatrix a = PolyMatrix::zero(2, 2, unit);
    PolyMatrix b = PolyMatrix::zero(3, 2, unit);
    CHECK_THROWS(a + b);
    CHECK_THROWS(a * PolyMatrix::zero(3, 1, unit));
    PolyMatrix c = PolyMatrix::zero(2, 2, Domain(0.0, 2.0));
    CHECK_THROWS(a + c);
}

TEST_CASE("definite integration in theta") {
    PolyMatrix one = PolyMatrix::constant(Matrix::Ones(1, 1), unit);
    CHECK(one.integrate(IntKind::ThetaFromAToS) == PolyMatrix::monomial(1.0, 1, 0, unit));

    // int_0^s (s - theta) dtheta = s^2/2
    PolyMatrix k = PolyMatrix::monomial(1.0, 1, 0, unit) - PolyMatrix::monomial(1.0, 0, 1, unit);
    CHECK(k.integrate(IntKind::ThetaFromAToS) == PolyMatrix::monomial(0.5, 2, 0, unit));

    // int_0^1 theta dtheta = 1/2
    PolyMatrix th = PolyMatrix::monomial(1.0, 0, 1, unit);
    CHECK(th.integrate(IntKind::ThetaFromAToB) == PolyMatrix::monomial(0.5, 0, 0, unit));
}

TEST_CASE("integration agrees with adaptive quadrature on random polynomials") {
    std::mt19937 rng(11);
    Quadrature q(64, unit);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 25; ++trial) {
        PolyMatrix p = random_poly(rng, 1, 1, 8, 8, unit);
        PolyMatrix lo = p.integrate(IntKind::ThetaFromAToS);
        PolyMatrix hi = p.integrate(IntKind::ThetaFromSToB);
        double s = u(rng);
        double ref_lo = Quadrature(48, Domain(0.0, std::max(s, 1e-9)))
                            .integrate([&](double th) { return p.eval(s, th)(0, 0); });
        double ref_hi = Quadrature(48, Domain(std::min(s, 1.0 - 1e-9), 1.0))
                            .integrate([&](double th) { return p.eval(s, th)(0, 0); });
        CHECK(lo.eval(s)(0, 0) == doctest::Approx(ref_lo).epsilon(1e-10));
        CHECK(hi.eval(s)(0, 0) == doctest::Approx(ref_hi).epsilon(1e-10));
    }
}

TEST_CASE("substitution and transpose") {
    // substitute theta -> s in (s - theta) gives 0
    PolyMatrix k = PolyMatrix::monomial(1.0, 1, 0, unit) - PolyMatrix::monomial(1.0, 0, 1, unit);
    CHECK(k.substitute_theta(0.0, 1.0, 0.0).is_zero());

    Matrix s0(2, 2);
    s0 << 0.0, -0.1, 1.0, 0.0;
    Matrix s0t(2, 2);
    s0t << 0.0, 1.0, -0.1, 0.0;
    CHECK(PolyMatrix::constant(s0, unit).transpose() == PolyMatrix::constant(s0t, unit));

    PolyMatrix p = PolyMatrix::monomial(1.0, 2, 0, unit) + PolyMatrix::monomial(0.2, 0, 0, unit);
    CHECK(p.eval(1.0)(0, 0) == doctest::Approx(1.2));
    CHECK_THROWS(p.eval(2.0));
}

TEST_CASE("property: eval distributes over add and mul") {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 50; ++trial) {
        PolyMatrix A = random_poly(rng, 2, 2, 3, 2, unit);
        PolyMatrix B = random_poly(rng, 2, 2, 2, 3, unit);
        double s = u(rng), th = u(rng);
        Matrix sum = (A + B).eval(s, th);
        Matrix prod = (A * B).eval(s, th);
        CHECK((sum - (A.eval(s, th) + B.eval(s, th))).norm() < 1e-12 * (1 + sum.norm()));
        CHECK((prod - A.eval(s, th) * B.eval(s, th)).norm() < 1e-12 * (1 + prod.norm()));
    }
}

TEST_CASE("degree cap enforced") {
    PolyMatrix big = PolyMatrix::monomial(1.0, PolyMatrix::kDegreeCap / 2 + 1, 0, unit);
    CHECK_THROWS((big * big).check_degree_cap());
}

TEST_CASE("convolution helper against quadrature") {
    std::mt19937 rng(5);
    Quadrature q(48, unit);
    std::uniform_real_distribution<double> u(0.05, 0.95);
    for (int trial = 0; trial < 10; ++trial) {
        PolyMatrix A = random_poly(rng, 1, 1, 3, 3, unit);
        PolyMatrix B = random_poly(rng, 1, 1, 3, 3, unit);
        PolyMatrix C = convolve(A, B, Bound::Theta, Bound::S);
        double s = u(rng), th = u(rng);
        double ref = Quadrature(48, Domain(std::min(th, s), std::max(th, s)))
                         .integrate([&](double e) { return A.eval(s, e)(0, 0) * B.eval(e, th)(0, 0); });
        if (th > s) ref = -ref;
        CHECK(C.eval(s, th)(0, 0) == doctest::Approx(ref).epsilon(1e-10));
    }
}
