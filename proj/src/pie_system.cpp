#include "piekit/pie_system.hpp"

#include <stdexcept>

namespace piekit {

void PIESystem::validate() const {
    const int m_ = m(), n_ = n();
    auto square = [&](const PIOperator& op) {
        return op.m1() == m_ && op.n1() == n_ && op.m2() == m_ && op.n2() == n_;
    };
    if (!square(T) || !square(A))
        throw std::invalid_argument("PIESystem: T/A must map state to state");
    if (B1.n1() != 0 || B1.m2() != m_ || B1.n2() != n_)
        throw std::invalid_argument("PIESystem: B1 must map R^nw to state");
    if (C1.m1() != m_ || C1.n1() != n_ || C1.n2() != 0)
        throw std::invalid_argument("PIESystem: C1 must map state to R^nz");
    if (C2.m1() != m_ || C2.n1() != n_ || C2.n2() != 0)
        throw std::invalid_argument("PIESystem: C2 must map state to R^ny");
    if (D21.rows() != ny() || D21.cols() != nw())
        throw std::invalid_argument("PIESystem: D21 shape mismatch");
    const Domain dom = domain();
    for (const PIOperator* op : {&T, &A, &B1, &C1, &C2})
        if (op->domain() != dom) throw std::invalid_argument("PIESystem: mixed domains");
}

PIOperator ObserverGain::as_operator(Domain dom) const {
    const int m = static_cast<int>(L1.rows());
    const int n = L2.rows();
    return PIOperator(L1, PolyMatrix(m, 0, VarSet::None, dom), L2,
                      PolyMatrix(n, 0, VarSet::None, dom),
                      PolyMatrix(n, 0, VarSet::None, dom),
                      PolyMatrix(n, 0, VarSet::None, dom), dom);
}

ObserverGain ObserverGain::zero(int m, int n, int ny, Domain dom) {
    return ObserverGain{Matrix::Zero(m, ny), PolyMatrix(n, ny, VarSet::None, dom)};
}

PIESystem error_system(const PIESystem& plant, const ObserverGain& L) {
    plant.validate();
    const Domain dom = plant.domain();
    PIOperator Lop = L.as_operator(dom);
    if (Lop.m1() != plant.ny())
        throw std::invalid_argument("error_system: gain width != ny");
    PIESystem err;
    err.T = plant.T;
    err.A = plant.A + Lop.compose(plant.C2);
    err.B1 = -(plant.B1 + Lop.compose(PIOperator::from_matrix(plant.D21, dom)));
    err.C1 = plant.C1;
    err.C2 = PIOperator::zero(plant.m(), plant.n(), 0, 0, dom);
    err.D21 = Matrix::Zero(0, plant.nw());
    return err;
}

AuxiliarySystem auxiliary_system(const PIESystem& sys) {
    return AuxiliarySystem{sys.T, sys.A, sys.C1, sys.B1};
}

namespace {

// Operator R^1 -> RL2^{0,n} given the distributed injection column.
PIOperator injector(const PolyMatrix& q2) {
    const Domain dom = q2.domain();
    const int n = q2.rows();
    return PIOperator(Matrix::Zero(0, q2.cols()), PolyMatrix(0, 0, VarSet::None, dom), q2,
                      PolyMatrix(n, 0, VarSet::None, dom), PolyMatrix(n, 0, VarSet::None, dom),
                      PolyMatrix(n, 0, VarSet::None, dom), dom);
}

// Operator RL2^{0,n} -> R^1 given the integral output kernel row.
PIOperator integral_output(const PolyMatrix& q1) {
    const Domain dom = q1.domain();
    const int n = q1.cols();
    return PIOperator(Matrix::Zero(q1.rows(), 0), q1, PolyMatrix(0, 0, VarSet::None, dom),
                      PolyMatrix(0, n, VarSet::None, dom), PolyMatrix(0, n, VarSet::None, dom),
                      PolyMatrix(0, n, VarSet::None, dom), dom);
}

PIOperator volterra_pair(const PolyMatrix& r0, const PolyMatrix& r1, const PolyMatrix& r2) {
    const Domain dom = r0.domain();
    const int n = r0.rows();
    return PIOperator(Matrix::Zero(0, 0), PolyMatrix(0, n, VarSet::None, dom),
                      PolyMatrix(n, 0, VarSet::None, dom), r0, r1, r2, dom);
}

}  // namespace

PIESystem example_reaction_diffusion() {
    const Domain dom(0.0, 1.0);
    auto mono = [&](double c, int i, int j) { return PolyMatrix::monomial(c, i, j, dom); };

    PIESystem sys;
    // T: R0 = 0, R1 = -theta, R2 = -s
    sys.T = volterra_pair(PolyMatrix::zero(1, 1, dom), mono(-1.0, 0, 1), mono(-1.0, 1, 0));
    // A: S0 = s^2 + 0.2, S1 = -2 theta, S2 = -3 s
    sys.A = volterra_pair(mono(1.0, 2, 0) + mono(0.2, 0, 0), mono(-2.0, 0, 1), mono(-3.0, 1, 0));
    sys.B1 = injector(mono(-0.5, 2, 0));
    sys.C1 = integral_output(mono(0.5, 2, 0) - mono(1.0, 1, 0));
    sys.C2 = integral_output(mono(-1.0, 1, 0));
    sys.D21 = Matrix::Ones(1, 1);
    sys.validate();
    return sys;
}

PIESystem example_euler_bernoulli() {
    const Domain dom(0.0, 1.0);
    PIESystem sys;

    PolyMatrix r1(2, 2, VarSet::None, dom);
    Matrix e11 = Matrix::Zero(2, 2);
    e11(0, 0) = 1.0;
    r1.add_coeff(1, 0, e11);   // s in (1,1)
    r1.add_coeff(0, 1, -e11);  // -theta in (1,1)
    PolyMatrix r2(2, 2, VarSet::None, dom);
    Matrix e22 = Matrix::Zero(2, 2);
    e22(1, 1) = 1.0;
    r2.add_coeff(1, 0, -e22);  // -s in (2,2)
    r2.add_coeff(0, 1, e22);   // theta in (2,2)
    sys.T = volterra_pair(PolyMatrix::zero(2, 2, dom), r1, r2);

    Matrix s0(2, 2);
    s0 << 0.0, -0.1, 1.0, 0.0;
    sys.A = volterra_pair(PolyMatrix::constant(s0, dom), PolyMatrix::zero(2, 2, dom),
                          PolyMatrix::zero(2, 2, dom));

    PolyMatrix b(2, 1, VarSet::None, dom);
    Matrix bc = Matrix::Zero(2, 1);
    bc(0, 0) = 0.5;
    b.add_coeff(2, 0, bc);  // s^2/2 into the first channel
    sys.B1 = injector(b);

    PolyMatrix c1(1, 2, VarSet::None, dom);
    Matrix c1a = Matrix::Zero(1, 2), c1b = Matrix::Zero(1, 2);
    c1a(0, 0) = 0.5;
    c1b(0, 0) = -1.0;
    c1.add_coeff(2, 0, c1a);
    c1.add_coeff(1, 0, c1b);  // 0.5 s^2 - s against the first channel
    sys.C1 = integral_output(c1);

    PolyMatrix c2(1, 2, VarSet::None, dom);
    Matrix c2a = Matrix::Zero(1, 2);
    c2a(0, 0) = -1.0;
    c2.add_coeff(1, 0, c2a);  // -s against the first channel
    sys.C2 = integral_output(c2);

    sys.D21 = Matrix::Ones(1, 1);
    sys.validate();
    return sys;
}

PIESystem example_scalar_ode() {
    const Domain dom(0.0, 1.0);
    PIESystem sys;
    sys.T = PIOperator::identity(1, 0, dom);
    sys.A = PIOperator::from_matrix(-Matrix::Ones(1, 1), dom);
    sys.B1 = PIOperator::from_matrix(Matrix::Ones(1, 1), dom);
    sys.C1 = PIOperator::from_matrix(Matrix::Ones(1, 1), dom);
    sys.C2 = PIOperator::zero(1, 0, 0, 0, dom);
    sys.D21 = Matrix::Zero(0, 1);
    sys.validate();
    return sys;
}

PIESystem example_scalar_estimation() {
    const Domain dom(0.0, 1.0);
    PIESystem sys;
    sys.T = PIOperator::identity(1, 0, dom);
    sys.A = PIOperator::from_matrix(Matrix::Ones(1, 1), dom);
    sys.B1 = PIOperator::from_matrix(Matrix::Zero(1, 1), dom);
    sys.C1 = PIOperator::from_matrix(Matrix::Ones(1, 1), dom);
    sys.C2 = PIOperator::from_matrix(Matrix::Ones(1, 1), dom);
    sys.D21 = Matrix::Ones(1, 1);
    sys.validate();
    return sys;
}

PIESystem preset_system(const std::string& name) {
    if (name == "reaction-diffusion") return example_reaction_diffusion();
    if (name == "beam" || name == "euler-bernoulli") return example_euler_bernoulli();
    if (name == "ode-test") return example_scalar_ode();
    if (name == "ode-estimation") return example_scalar_estimation();
    throw std::invalid_argument("unknown preset: " + name);
}

}  // namespace piekit
