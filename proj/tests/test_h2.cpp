#include "doctest.h"

#include <cmath>
#include <random>

#include "piekit/h2.hpp"
#include "piekit/pie_system.hpp"
#include "test_util.hpp"

using namespace piekit;

namespace {

// Dense Lyapunov solve A'P + PA + Q = 0 via the Kronecker-product system.
Matrix lyap(const Matrix& A, const Matrix& Q) {
    const int n = static_cast<int>(A.rows());
    Matrix K = Matrix::Zero(n * n, n * n);
    Vector q(n * n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            q(i * n + j) = -Q(i, j);
            for (int k = 0; k < n; ++k) {
                K(i * n + j, k * n + j) += A(k, i);
                K(i * n + j, i * n + k) += A(k, j);
            }
        }
    Vector p = K.fullPivLu().solve(q);
    Matrix P(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) P(i, j) = p(i * n + j);
    return P;
}

PIESystem matrix_system(const Matrix& A, const Matrix& B, const Matrix& C, Domain dom) {
    PIESystem sys;
    const int m = static_cast<int>(A.rows());
    sys.T = PIOperator::identity(m, 0, dom);
    sys.A = PIOperator::from_matrix(A, dom);
    sys.B1 = PIOperator::from_matrix(B, dom);
    sys.C1 = PIOperator::from_matrix(C, dom);
    sys.C2 = PIOperator::zero(m, 0, 1, 0, dom);
    sys.D21 = Matrix::Zero(1, static_cast<int>(B.cols()));
    return sys;
}

}  // namespace

TEST_CASE("gramian bound matches the Lyapunov oracle on the scalar system") {
    PIESystem sys = example_scalar_ode();
    NormCertificate cert = h2_bound_gramian(sys);
    REQUIRE(cert.status == SDPStatus::Optimal);
    // A'P + PA + C'C = 0 with A=-1, C=1 gives P=1/2, trace(B'PB) = 1/2.
    CHECK(cert.gamma == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
    CHECK(min_eigenvalue_estimate(cert.P, 6) >= 0.5 * cert.eps);
}

TEST_CASE("schur-form bound agrees with the gramian bound on the scalar system") {
    PIESystem sys = example_scalar_ode();
    NormCertificate cert = h2_bound_schur(sys);
    REQUIRE(cert.status == SDPStatus::Optimal);
    CHECK(cert.gamma == doctest::Approx(std::sqrt(0.5)).epsilon(0.02));
    CHECK(cert.W.rows() == 1);
    CHECK(cert.W.trace() <= cert.gamma + 1e-6);

    NormCertificate gram = h2_bound_gramian(sys);
    CHECK(cert.gamma == doctest::Approx(gram.gamma).epsilon(0.05));
}

TEST_CASE("gramian bound tracks the Lyapunov trace on random stable matrix systems") {
    std::mt19937 rng(7);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Domain dom(0.0, 1.0);
    for (int trial = 0; trial < 5; ++trial) {
        Matrix M(2, 2), B(2, 1), C(1, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) M(i, j) = u(rng);
        Matrix A = M - (M.eigenvalues().real().maxCoeff() + 1.0) * Matrix::Identity(2, 2);
        B << u(rng), u(rng);
        C << u(rng), u(rng);

        Matrix P0 = lyap(A, C.transpose() * C);
        const double oracle = std::sqrt((B.transpose() * P0 * B).trace());

        NormCertificate cert = h2_bound_gramian(matrix_system(A, B, C, dom));
        REQUIRE(cert.status == SDPStatus::Optimal);
        CHECK(cert.gamma == doctest::Approx(oracle).epsilon(0.02));
    }
}

TEST_CASE("bounds are stable across the operator-variable degree") {
    PIESystem sys = example_scalar_ode();
    double prev = 1e100;
    for (int d = 1; d <= 3; ++d) {
        H2Options opts;
        opts.degree = d;
        opts.max_degree = d;
        NormCertificate cert = h2_bound_schur(sys, opts);
        REQUIRE(cert.status == SDPStatus::Optimal);
        CHECK(cert.gamma <= prev * (1.0 + 1e-6));
        prev = cert.gamma;
    }
}

TEST_CASE("zero output map drives the bound to the coercivity floor") {
    Domain dom(0.0, 1.0);
    Matrix A(1, 1), B(1, 1), C(1, 1);
    A << -1.0;
    B << 1.0;
    C << 0.0;
    NormCertificate cert = h2_bound_gramian(matrix_system(A, B, C, dom));
    REQUIRE(cert.status == SDPStatus::Optimal);
    CHECK(cert.gamma <= 10.0 * std::sqrt(cert.eps));
}

TEST_CASE("estimator synthesis recovers the scalar oracle gain") {
    PIESystem sys = example_scalar_estimation();
    SynthesisResult out = synthesize_estimator(sys);
    REQUIRE(out.status == SDPStatus::Optimal);
    // Error dynamics e' = (1+L)e - Lw: the bound L^2 / (-2(1+L)) is
    // minimized at L = -2 with value 2.
    CHECK(out.gamma == doctest::Approx(std::sqrt(2.0)).epsilon(0.05));
    REQUIRE(out.L.L1.rows() == 1);
    CHECK(out.L.L1(0, 0) == doctest::Approx(-2.0).epsilon(0.10));
    CHECK_FALSE(out.residual_warning);

    // the certified bound holds for the closed-loop error system
    PIESystem err = error_system(sys, out.L);
    NormCertificate check = h2_bound_gramian(err);
    REQUIRE(check.status == SDPStatus::Optimal);
    CHECK(check.gamma <= out.gamma * (1.0 + 0.05));
}

TEST_CASE("estimation cannot improve on a plant with a dead measurement channel") {
    Domain dom(0.0, 1.0);
    Matrix A(1, 1), B(1, 1), C(1, 1);
    A << -1.0;
    B << 1.0;
    C << 1.0;
    PIESystem sys = matrix_system(A, B, C, dom);  // C2 = 0, D21 = 0
    SynthesisResult out = synthesize_estimator(sys);
    REQUIRE(out.status == SDPStatus::Optimal);
    NormCertificate plant = h2_bound_schur(sys);
    REQUIRE(plant.status == SDPStatus::Optimal);
    // No gain can beat the plant bound; decay refinement may trade up to
    // its budget of bound for transient speed, never down.
    CHECK(out.gamma >= plant.gamma * (1.0 - 0.02));
    CHECK(out.gamma <= plant.gamma * 1.05);
}

TEST_CASE("gain reconstruction is exact for scaled identities") {
    Domain dom(0.0, 1.0);
    std::mt19937 rng(11);
    Matrix Z1(2, 1);
    Z1 << 0.7, -0.3;
    PolyMatrix Z2 = testutil::random_poly(rng, 2, 1, 2, 0, dom);
    PIOperator Z(Z1, PolyMatrix::zero(2, 0, dom), Z2, PolyMatrix::zero(2, 0, dom),
                 PolyMatrix::zero(2, 0, dom), PolyMatrix::zero(2, 0, dom), dom);

    double resid = 0.0;
    ObserverGain g1 = reconstruct_gain(PIOperator::identity(2, 2, dom), Z, 1e-6, &resid);
    CHECK((g1.L1 - Z1).norm() <= 1e-6);
    CHECK((g1.L2 - Z2).eval(0.37).cwiseAbs().maxCoeff() <= 1e-6);
    CHECK(resid <= 1e-6);

    ObserverGain g2 = reconstruct_gain(PIOperator::identity(2, 2, dom) * 2.0, Z, 1e-6, &resid);
    CHECK((g2.L1 - Z1 * 0.5).norm() <= 1e-6);
    CHECK((g2.L2 - Z2 * 0.5).eval(0.37).cwiseAbs().maxCoeff() <= 1e-6);
}

TEST_CASE("gain reconstruction matches the composition oracle for a multiplier") {
    Domain dom(0.0, 1.0);
    // P = multiplier(2 + s^2) on L2^1 plus identity finite part
    PolyMatrix r0 = PolyMatrix::monomial(2.0, 0, 0, dom) + PolyMatrix::monomial(1.0, 2, 0, dom);
    PIOperator P(Matrix::Identity(1, 1), PolyMatrix::zero(1, 1, dom),
                 PolyMatrix::zero(1, 1, dom), r0, PolyMatrix::zero(1, 1, dom),
                 PolyMatrix::zero(1, 1, dom), dom);
    Matrix Z1(1, 1);
    Z1 << 1.0;
    PolyMatrix Z2 = PolyMatrix::monomial(1.0, 1, 0, dom);  // s
    PIOperator Z(Z1, PolyMatrix::zero(1, 0, dom), Z2, PolyMatrix::zero(1, 0, dom),
                 PolyMatrix::zero(1, 0, dom), PolyMatrix::zero(1, 0, dom), dom);

    double resid = 0.0;
    ObserverGain g = reconstruct_gain(P, Z, 1e-3, &resid);
    CHECK(resid <= 1e-3);
    CHECK(g.L1(0, 0) == doctest::Approx(1.0).epsilon(1e-6));
    // L2(s) must satisfy (2 + s^2) L2(s) = s on [0,1]
    for (double s : {0.1, 0.4, 0.9})
        CHECK(g.L2.eval(s)(0, 0) == doctest::Approx(s / (2.0 + s * s)).epsilon(1e-3));
}

TEST_CASE("schur consistency: identity triple") {
    Domain dom(0.0, 1.0);
    PIOperator I = PIOperator::identity(1, 1, dom);
    PIOperator Zero = PIOperator::zero(1, 1, 1, 1, dom);
    SchurReport rep = schur_consistency_check(I, Zero, I, 1e-6);
    CHECK(rep.block_psd);
    CHECK(rep.p_coercive);
    CHECK(rep.complement_psd);
    CHECK(rep.consistent);
}

TEST_CASE("schur consistency agrees with the dense eigenvalue oracle") {
    std::mt19937 rng(3);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Domain dom(0.0, 1.0);
    int agreements = 0;
    const int trials = 40;
    for (int t = 0; t < trials; ++t) {
        Matrix Pm(2, 2), Qm(2, 2), Rm(2, 2);
        for (int i = 0; i < 2; ++i)
            for (int j = 0; j < 2; ++j) {
                Pm(i, j) = u(rng);
                Qm(i, j) = u(rng);
                Rm(i, j) = u(rng);
            }
        Pm = Matrix(Pm * Pm.transpose()) + 0.3 * Matrix::Identity(2, 2);
        Rm = Matrix(0.5 * (Rm + Rm.transpose())) + Matrix::Identity(2, 2);

        Matrix blk(4, 4);
        blk << Pm, Qm.transpose(), Qm, Rm;
        Eigen::SelfAdjointEigenSolver<Matrix> es(blk, Eigen::EigenvaluesOnly);
        const bool oracle = es.eigenvalues().minCoeff() >= 1e-6;

        SchurReport rep = schur_consistency_check(
            PIOperator::from_matrix(Pm, dom), PIOperator::from_matrix(Qm, dom),
            PIOperator::from_matrix(Rm, dom), 1e-6);
        CHECK(rep.consistent);
        if (rep.block_psd == oracle) ++agreements;
    }
    CHECK(agreements == trials);
}

TEST_CASE("schur consistency for a Volterra coupling block") {
    Domain dom(0.0, 1.0);
    PIOperator I = PIOperator::identity(0, 1, dom);
    // Q = integral operator with kernel 1 (theta < s)
    PIOperator Q(Matrix(0, 0), PolyMatrix::zero(0, 1, dom), PolyMatrix::zero(1, 0, dom),
                 PolyMatrix::zero(1, 1, dom), PolyMatrix::monomial(1.0, 0, 0, dom),
                 PolyMatrix::zero(1, 1, dom), dom);
    // ||Q|| = 2/pi < 1, so [I Q*; Q I] is PD and I - Q Q* is PD.
    SchurReport rep = schur_consistency_check(I, Q, I, 1e-6);
    CHECK(rep.block_psd);
    CHECK(rep.complement_psd);
    CHECK(rep.consistent);

    // scaling the coupling by 3 breaks positivity on both sides
    SchurReport rep2 = schur_consistency_check(I, Q * 3.0, I, 1e-6);
    CHECK_FALSE(rep2.block_psd);
    CHECK_FALSE(rep2.complement_psd);
    CHECK(rep2.consistent);
}
