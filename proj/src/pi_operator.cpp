#include "piekit/pi_operator.hpp"

#include <cstdio>
#include <cstdlib>
#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <vector>

namespace piekit {

double inner_product(const RL2Function& f, const RL2Function& g) {
    if (f.m() != g.m() || f.n() != g.n())
        throw std::invalid_argument("inner_product: dimension mismatch");
    double acc = 0.0;
    if (f.m() > 0) acc += f.finite.dot(g.finite);
    if (f.n() > 0) acc += integral_of_product(f.dist.transpose(), g.dist)(0, 0);
    return acc;
}

double rl2_norm(const RL2Function& f) { return std::sqrt(std::max(0.0, inner_product(f, f))); }

PIOperator::PIOperator(int m1, int n1, int m2, int n2, Domain dom)
    : m1_(m1), n1_(n1), m2_(m2), n2_(n2), dom_(dom),
      P_(Matrix::Zero(m2, m1)),
      Q1_(m2, n1, VarSet::None, dom),
      Q2_(n2, m1, VarSet::None, dom),
      R0_(n2, n1, VarSet::None, dom),
      R1_(n2, n1, VarSet::None, dom),
      R2_(n2, n1, VarSet::None, dom) {}

PIOperator::PIOperator(Matrix P, PolyMatrix Q1, PolyMatrix Q2, PolyMatrix R0,
                       PolyMatrix R1, PolyMatrix R2, Domain dom)
    : dom_(dom), P_(std::move(P)), Q1_(std::move(Q1)), Q2_(std::move(Q2)),
      R0_(std::move(R0)), R1_(std::move(R1)), R2_(std::move(R2)) {
    m1_ = static_cast<int>(P_.cols());
    m2_ = static_cast<int>(P_.rows());
    n1_ = R0_.cols();
    n2_ = R0_.rows();
    check_shapes();
}

void PIOperator::check_shapes() const {
    bool ok = Q1_.rows() == m2_ && Q1_.cols() == n1_ && Q2_.rows() == n2_ &&
              Q2_.cols() == m1_ && R0_.rows() == n2_ && R0_.cols() == n1_ &&
              R1_.rows() == n2_ && R1_.cols() == n1_ && R2_.rows() == n2_ &&
              R2_.cols() == n1_;
    ok = ok && Q1_.domain() == dom_ && Q2_.domain() == dom_ && R0_.domain() == dom_ &&
         R1_.domain() == dom_ && R2_.domain() == dom_;
    ok = ok && Q1_.degree_theta() == 0 && Q2_.degree_theta() == 0 && R0_.degree_theta() == 0;
    if (!ok) throw std::invalid_argument("PIOperator: inconsistent blocks");
}

PIOperator PIOperator::identity(int m, int n, Domain dom) {
    PIOperator op(m, n, m, n, dom);
    op.P_ = Matrix::Identity(m, m);
    if (n > 0) op.R0_.set_coeff(0, 0, Matrix::Identity(n, n));
    return op;
}

PIOperator PIOperator::zero(int m1, int n1, int m2, int n2, Domain dom) {
    return PIOperator(m1, n1, m2, n2, dom);
}

PIOperator PIOperator::from_matrix(const Matrix& P, Domain dom) {
    PIOperator op(static_cast<int>(P.cols()), 0, static_cast<int>(P.rows()), 0, dom);
    op.P_ = P;
    return op;
}

PIOperator PIOperator::multiplier(const PolyMatrix& R0) {
    PIOperator op(0, R0.cols(), 0, R0.rows(), R0.domain());
    op.R0_ = R0;
    return op;
}

bool PIOperator::is_zero() const {
    return P_.isZero(0.0) && Q1_.is_zero() && Q2_.is_zero() && R0_.is_zero() &&
           R1_.is_zero() && R2_.is_zero();
}

RL2Function PIOperator::apply(const RL2Function& f) const {
    if (f.m() != m1_ || f.n() != n1_)
        throw std::invalid_argument("PIOperator::apply: dimension mismatch");
    Vector finite = Vector::Zero(m2_);
    if (m2_ > 0) {
        if (m1_ > 0) finite += P_ * f.finite;
        if (n1_ > 0) finite += integral_of_product(Q1_, f.dist).col(0);
    }
    PolyMatrix dist(n2_, 1, VarSet::None, dom_);
    if (n2_ > 0) {
        if (m1_ > 0) {
            Matrix xf(m1_, 1);
            xf.col(0) = f.finite;
            dist = dist + Q2_ * PolyMatrix::constant(xf, dom_);
        }
        if (n1_ > 0) {
            dist = dist + R0_ * f.dist;
            const PolyMatrix f_th = f.dist.swap_vars();
            if (!R1_.is_zero()) dist = dist + (R1_ * f_th).integrate(IntKind::ThetaFromAToS);
            if (!R2_.is_zero()) dist = dist + (R2_ * f_th).integrate(IntKind::ThetaFromSToB);
        }
    }
    return RL2Function(finite, dist);
}

PIOperator PIOperator::operator+(const PIOperator& o) const {
    if (m1_ != o.m1_ || n1_ != o.n1_ || m2_ != o.m2_ || n2_ != o.n2_)
        throw std::invalid_argument("PIOperator::add: dimension mismatch");
    if (dom_ != o.dom_) throw std::invalid_argument("PIOperator::add: domain mismatch");
    PIOperator r(m1_, n1_, m2_, n2_, dom_);
    r.P_ = P_ + o.P_;
    r.Q1_ = Q1_ + o.Q1_;
    r.Q2_ = Q2_ + o.Q2_;
    r.R0_ = R0_ + o.R0_;
    r.R1_ = R1_ + o.R1_;
    r.R2_ = R2_ + o.R2_;
    return r;
}

PIOperator PIOperator::operator-(const PIOperator& o) const { return *this + (-o); }

PIOperator PIOperator::operator-() const { return *this * (-1.0); }

PIOperator PIOperator::operator*(double c) const {
    PIOperator r(m1_, n1_, m2_, n2_, dom_);
    r.P_ = c * P_;
    r.Q1_ = Q1_ * c;
    r.Q2_ = Q2_ * c;
    r.R0_ = R0_ * c;
    r.R1_ = R1_ * c;
    r.R2_ = R2_ * c;
    return r;
}

bool PIOperator::operator==(const PIOperator& o) const {
    return m1_ == o.m1_ && n1_ == o.n1_ && m2_ == o.m2_ && n2_ == o.n2_ &&
           dom_ == o.dom_ && P_ == o.P_ && Q1_ == o.Q1_ && Q2_ == o.Q2_ &&
           R0_ == o.R0_ && R1_ == o.R1_ && R2_ == o.R2_;
}

PIOperator PIOperator::compose(const PIOperator& B) const {
    const PIOperator& A = *this;
    if (A.m1_ != B.m2_ || A.n1_ != B.n2_)
        throw std::invalid_argument("PIOperator::compose: dimension mismatch");
    if (A.dom_ != B.dom_) throw std::invalid_argument("PIOperator::compose: domain mismatch");
    const Domain dom = dom_;
    PIOperator C(B.m1_, B.n1_, A.m2_, A.n2_, dom);

    const PolyMatrix PA = PolyMatrix::constant(A.P_, dom);
    const PolyMatrix PB = PolyMatrix::constant(B.P_, dom);
    const PolyMatrix Q1A_eta = A.Q1_.swap_vars();  // Q1A as a function of eta
    const PolyMatrix Q1B_th = B.Q1_.swap_vars();
    const PolyMatrix R0B_th = B.R0_.swap_vars();

    // finite -> finite
    C.P_ = A.P_ * B.P_;
    if (A.n1_ > 0) C.P_ += (A.Q1_ * B.Q2_).integrate_s_full();

    // distributed input -> finite output
    if (C.m2_ > 0 && C.n1_ > 0) {
        PolyMatrix q1 = PA * B.Q1_;
        if (A.n1_ > 0) {
            q1 = q1 + A.Q1_ * B.R0_;
            q1 = q1 + convolve(Q1A_eta, B.R1_, Bound::Theta, Bound::DomainHi).swap_vars();
            q1 = q1 + convolve(Q1A_eta, B.R2_, Bound::DomainLo, Bound::Theta).swap_vars();
        }
        C.Q1_ = q1;
    }

    // finite input -> distributed output
    if (C.n2_ > 0 && C.m1_ > 0) {
        PolyMatrix q2 = A.Q2_ * PB;
        if (A.n1_ > 0) {
            q2 = q2 + A.R0_ * B.Q2_;
            q2 = q2 + convolve(A.R1_, B.Q2_, Bound::DomainLo, Bound::S);
            q2 = q2 + convolve(A.R2_, B.Q2_, Bound::S, Bound::DomainHi);
        }
        C.Q2_ = q2;
    }

    // distributed -> distributed
    if (C.n2_ > 0 && C.n1_ > 0 && A.n1_ > 0) {
        C.R0_ = A.R0_ * B.R0_;
        PolyMatrix cross(C.n2_, C.n1_, VarSet::None, dom);
        if (A.m1_ > 0) cross = A.Q2_ * Q1B_th;
        PolyMatrix r1 = cross + A.R0_ * B.R1_ + A.R1_ * R0B_th;
        r1 = r1 + convolve(A.R1_, B.R1_, Bound::Theta, Bound::S);
        r1 = r1 + convolve(A.R1_, B.R2_, Bound::DomainLo, Bound::Theta);
        r1 = r1 + convolve(A.R2_, B.R1_, Bound::S, Bound::DomainHi);
        C.R1_ = r1;
        PolyMatrix r2 = cross + A.R0_ * B.R2_ + A.R2_ * R0B_th;
        r2 = r2 + convolve(A.R1_, B.R2_, Bound::DomainLo, Bound::S);
        r2 = r2 + convolve(A.R2_, B.R1_, Bound::Theta, Bound::DomainHi);
        r2 = r2 + convolve(A.R2_, B.R2_, Bound::S, Bound::Theta);
        C.R2_ = r2;
    } else if (C.n2_ > 0 && C.n1_ > 0 && A.m1_ > 0) {
        // the only path is through the finite channel of B's output
        C.R1_ = A.Q2_ * Q1B_th;
        C.R2_ = C.R1_;
    }
    C.Q1_.check_degree_cap();
    C.Q2_.check_degree_cap();
    C.R0_.check_degree_cap();
    C.R1_.check_degree_cap();
    C.R2_.check_degree_cap();
    return C;
}

PIOperator PIOperator::adjoint() const {
    PIOperator r(m2_, n2_, m1_, n1_, dom_);
    r.P_ = P_.transpose();
    r.Q1_ = Q2_.transpose();
    r.Q2_ = Q1_.transpose();
    r.R0_ = R0_.transpose();
    r.R1_ = R2_.swap_vars().transpose();
    r.R2_ = R1_.swap_vars().transpose();
    return r;
}

double PIOperator::max_coeff() const {
    double m = P_.size() > 0 ? P_.cwiseAbs().maxCoeff() : 0.0;
    for (const PolyMatrix* p : {&Q1_, &Q2_, &R0_, &R1_, &R2_})
        for (const auto& [k, c] : p->coeffs()) m = std::max(m, c.cwiseAbs().maxCoeff());
    return m;
}

PIOperator PIOperator::truncated(double eps) const {
    PIOperator r = *this;
    for (int i = 0; i < r.P_.rows(); ++i)
        for (int j = 0; j < r.P_.cols(); ++j)
            if (std::abs(r.P_(i, j)) <= eps) r.P_(i, j) = 0.0;
    r.Q1_ = Q1_.truncated(eps);
    r.Q2_ = Q2_.truncated(eps);
    r.R0_ = R0_.truncated(eps);
    r.R1_ = R1_.truncated(eps);
    r.R2_ = R2_.truncated(eps);
    return r;
}

int PIOperator::degree() const {
    int d = 0;
    for (const PolyMatrix* p : {&Q1_, &Q2_, &R0_, &R1_, &R2_}) d = std::max(d, p->degree());
    return d;
}

PIOperator vcat(const PIOperator& A, const PIOperator& B) {
    if (A.m1() != B.m1() || A.n1() != B.n1())
        throw std::invalid_argument("vcat: input dimension mismatch");
    if (A.domain() != B.domain()) throw std::invalid_argument("vcat: domain mismatch");
    Matrix P(A.m2() + B.m2(), A.m1());
    P << A.P(), B.P();
    return PIOperator(P, vstack(A.Q1(), B.Q1()), vstack(A.Q2(), B.Q2()),
                      vstack(A.R0(), B.R0()), vstack(A.R1(), B.R1()),
                      vstack(A.R2(), B.R2()), A.domain());
}

PIOperator hcat(const PIOperator& A, const PIOperator& B) {
    if (A.m2() != B.m2() || A.n2() != B.n2())
        throw std::invalid_argument("hcat: output dimension mismatch");
    if (A.domain() != B.domain()) throw std::invalid_argument("hcat: domain mismatch");
    Matrix P(A.m2(), A.m1() + B.m1());
    P << A.P(), B.P();
    return PIOperator(P, hstack(A.Q1(), B.Q1()), hstack(A.Q2(), B.Q2()),
                      hstack(A.R0(), B.R0()), hstack(A.R1(), B.R1()),
                      hstack(A.R2(), B.R2()), A.domain());
}

PIOperator blockdiag(const PIOperator& A, const PIOperator& B) {
    const Domain dom = A.domain();
    PIOperator ztop = PIOperator::zero(B.m1(), B.n1(), A.m2(), A.n2(), dom);
    PIOperator zbot = PIOperator::zero(A.m1(), A.n1(), B.m2(), B.n2(), dom);
    return vcat(hcat(A, ztop), hcat(zbot, B));
}

// ---------------------------------------------------------------------------
// Inversion by Legendre-Galerkin projection + kernel least squares.
// ---------------------------------------------------------------------------

namespace {

// Orthonormal Legendre polynomials on [a, b], degrees 0..N, as 1x1 polys in s.
std::vector<PolyMatrix> legendre_basis(int N, Domain dom) {
    // classic recurrence on [-1, 1] in monomial coefficients
    std::vector<std::vector<double>> c(N + 1);
    c[0] = {1.0};
    if (N >= 1) c[1] = {0.0, 1.0};
    for (int k = 1; k < N; ++k) {
        std::vector<double> next(k + 2, 0.0);
        for (size_t i = 0; i < c[k].size(); ++i) next[i + 1] += (2.0 * k + 1.0) * c[k][i];
        for (size_t i = 0; i < c[k - 1].size(); ++i) next[i] -= k * c[k - 1][i];
        for (double& v : next) v /= (k + 1.0);
        c[k + 1] = next;
    }
    // map x = (2s - a - b)/(b - a), normalize by sqrt((2k+1)/(b-a))
    std::vector<PolyMatrix> out;
    const double alpha = -(dom.a + dom.b) / dom.length();
    const double beta = 2.0 / dom.length();
    for (int k = 0; k <= N; ++k) {
        PolyMatrix px(1, 1, VarSet::S, dom);
        for (size_t i = 0; i < c[k].size(); ++i) {
            Matrix m(1, 1);
            m(0, 0) = c[k][i];
            if (c[k][i] != 0.0) px.add_coeff(static_cast<int>(i), 0, m);
        }
        PolyMatrix ps = px.substitute_s(alpha, beta, 0.0);
        out.push_back(ps * std::sqrt((2.0 * k + 1.0) / dom.length()));
    }
    return out;
}

std::vector<RL2Function> rl2_basis(int m, int n, int N, Domain dom,
                                   const std::vector<PolyMatrix>& leg) {
    std::vector<RL2Function> basis;
    for (int i = 0; i < m; ++i) {
        Vector e = Vector::Zero(m);
        e(i) = 1.0;
        basis.emplace_back(e, PolyMatrix(n, 1, VarSet::None, dom));
    }
    for (int c = 0; c < n; ++c) {
        for (int k = 0; k <= N; ++k) {
            PolyMatrix d(n, 1, VarSet::None, dom);
            for (const auto& [key, mat] : leg[k].coeffs()) {
                Matrix col = Matrix::Zero(n, 1);
                col(c, 0) = mat(0, 0);
                d.add_coeff(key.first, key.second, col);
            }
            basis.emplace_back(Vector::Zero(m), d);
        }
    }
    return basis;
}

// Elementary symmetric operator templates for the inverse fit: each atom is
// one free coefficient together with its symmetry-tied mirror entries.
struct Atom {
    PIOperator op;
};

std::vector<Atom> make_atoms(int m, int n, int d, Domain dom) {
    std::vector<Atom> atoms;
    auto mk = [&](auto&& fill) {
        PIOperator base(m, n, m, n, dom);
        fill(base);
        atoms.push_back({base});
    };
    // P block, upper triangle
    for (int i = 0; i < m; ++i)
        for (int j = i; j < m; ++j)
            mk([&](PIOperator& op) {
                Matrix P = Matrix::Zero(m, m);
                P(i, j) = 1.0;
                P(j, i) = 1.0;
                op = PIOperator(P, PolyMatrix(m, n, VarSet::None, dom),
                                PolyMatrix(n, m, VarSet::None, dom),
                                PolyMatrix(n, n, VarSet::None, dom),
                                PolyMatrix(n, n, VarSet::None, dom),
                                PolyMatrix(n, n, VarSet::None, dom), dom);
            });
    // Q block: Q1 = Q, Q2 = Q^T
    for (int i = 0; i < m; ++i)
        for (int j = 0; j < n; ++j)
            for (int k = 0; k <= d; ++k)
                mk([&](PIOperator& op) {
                    Matrix E = Matrix::Zero(m, n);
                    E(i, j) = 1.0;
                    PolyMatrix q1 = PolyMatrix::monomial(E, k, 0, dom);
                    op = PIOperator(Matrix::Zero(m, m), q1, q1.transpose(),
                                    PolyMatrix(n, n, VarSet::None, dom),
                                    PolyMatrix(n, n, VarSet::None, dom),
                                    PolyMatrix(n, n, VarSet::None, dom), dom);
                });
    // R0 block: symmetric matrix polynomial
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j)
            for (int k = 0; k <= d; ++k)
                mk([&](PIOperator& op) {
                    Matrix E = Matrix::Zero(n, n);
                    E(i, j) = 1.0;
                    E(j, i) = 1.0;
                    PolyMatrix r0 = PolyMatrix::monomial(E, k, 0, dom);
                    op = PIOperator(Matrix::Zero(m, m), PolyMatrix(m, n, VarSet::None, dom),
                                    PolyMatrix(n, m, VarSet::None, dom), r0,
                                    PolyMatrix(n, n, VarSet::None, dom),
                                    PolyMatrix(n, n, VarSet::None, dom), dom);
                });
    // R1 free, R2 tied: R2(s,th) = R1(th,s)^T
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
            for (int ks = 0; ks <= d; ++ks)
                for (int kt = 0; kt <= d; ++kt)
                    mk([&](PIOperator& op) {
                        Matrix E = Matrix::Zero(n, n);
                        E(i, j) = 1.0;
                        PolyMatrix r1 = PolyMatrix::monomial(E, ks, kt, dom);
                        op = PIOperator(Matrix::Zero(m, m),
                                        PolyMatrix(m, n, VarSet::None, dom),
                                        PolyMatrix(n, m, VarSet::None, dom),
                                        PolyMatrix(n, n, VarSet::None, dom), r1,
                                        r1.swap_vars().transpose(), dom);
                    });
    return atoms;
}

}  // namespace

InversionResult invert_pi(const PIOperator& op, int basis_degree, double tol) {
    if (!op.is_square()) throw std::invalid_argument("invert_pi: operator not square");
    const int m = op.m1(), n = op.n1();
    const Domain dom = op.domain();

    if (n == 0) {
        Eigen::FullPivLU<Matrix> lu(op.P());
        if (!lu.isInvertible()) throw std::runtime_error("invert_pi: singular matrix part");
        InversionResult res;
        res.inverse = PIOperator::from_matrix(lu.inverse(), dom);
        res.residual = (op.P() * res.inverse.P() - Matrix::Identity(m, m)).norm();
        res.degree = 0;
        return res;
    }

    const int N = std::max(basis_degree, 4);
    // Fit kernels up to degree 12, clamped so atom-times-output products
    // stay inside the PolyMatrix degree cap.
    int op_deg = 0;
    for (const PolyMatrix* p : {&op.Q1(), &op.Q2(), &op.R0(), &op.R1(), &op.R2()})
        for (const auto& [k, mm] : p->coeffs()) op_deg = std::max({op_deg, k.first, k.second});
    const int max_fit_degree =
        std::max(2, std::min(12, PolyMatrix::kDegreeCap - N - op_deg - 3));

    auto leg = legendre_basis(N, dom);
    auto basis = rl2_basis(m, n, N, dom, leg);
    const int Nb = static_cast<int>(basis.size());

    // Galerkin matrix of op in the orthonormal basis
    Matrix M(Nb, Nb);
    std::vector<RL2Function> op_basis;
    op_basis.reserve(Nb);
    for (int j = 0; j < Nb; ++j) op_basis.push_back(op.apply(basis[j]));
    for (int i = 0; i < Nb; ++i)
        for (int j = 0; j < Nb; ++j) M(i, j) = inner_product(basis[i], op_basis[j]);

    Eigen::LDLT<Matrix> ldlt(M);
    if (ldlt.info() != Eigen::Success || ldlt.isNegative())
        throw std::runtime_error("invert_pi: projected operator not positive definite");

    // probe set for the residual contract
    std::vector<RL2Function> probes;
    for (int k = 0; k <= std::min(basis_degree, N); ++k) {
        for (int c = 0; c < n; ++c) {
            PolyMatrix d(n, 1, VarSet::None, dom);
            Matrix col = Matrix::Zero(n, 1);
            col(c, 0) = 1.0;
            d.add_coeff(k, 0, col);
            Vector fv = Vector::Zero(m);
            probes.emplace_back(fv, d);
        }
    }
    for (int i = 0; i < m; ++i) {
        Vector fv = Vector::Zero(m);
        fv(i) = 1.0;
        probes.emplace_back(fv, PolyMatrix(n, 1, VarSet::None, dom));
    }

    InversionResult best;
    best.residual = std::numeric_limits<double>::infinity();
    // Pointwise collocation grid for the fit: evaluating the (exactly
    // computed) polynomial outputs at Chebyshev nodes stays well conditioned
    // at degrees where Legendre-coefficient expansion is already destroyed
    // by cancellation.
    const int Np = 4 * (N + max_fit_degree + 4);
    std::vector<double> pts(Np);
    for (int p = 0; p < Np; ++p)
        pts[p] = 0.5 * (dom.a + dom.b) +
                 0.5 * (dom.b - dom.a) * std::cos(M_PI * (p + 0.5) / Np);
    const double wq = std::sqrt((dom.b - dom.a) / Np);
    const int rows_per_col = m + n * Np;
    auto sample = [&](const RL2Function& f) {
        Vector v(rows_per_col);
        if (m > 0) v.head(m) = f.finite;
        for (int p = 0; p < Np; ++p)
            v.segment(m + p * n, n) = wq * f.dist.eval(pts[p]).col(0);
        return v;
    };

    for (int d = std::min(basis_degree, max_fit_degree);; d = max_fit_degree) {
        auto atoms = make_atoms(m, n, d, dom);
        const int na = static_cast<int>(atoms.size());

        // Fit the inverse by requiring inv(op(b_j)) ~= b_j on the basis.
        // This never forms the projected-inverse matrix, whose high-order
        // columns carry truncation artifacts that poison the fit.
        Matrix A(rows_per_col * Nb, na);
        Vector bvec(rows_per_col * Nb);
        for (int j = 0; j < Nb; ++j) {
            bvec.segment(j * rows_per_col, rows_per_col) = sample(basis[j]);
            for (int a = 0; a < na; ++a) {
                RL2Function out = atoms[a].op.apply(op_basis[j]);
                A.block(j * rows_per_col, a, rows_per_col, 1) = sample(out);
            }
        }
        // equilibrate columns: monomial atoms of high degree are otherwise
        // wildly out of scale and poison the least-squares solve
        Vector colnorm(na);
        for (int a = 0; a < na; ++a) {
            const double nn = A.col(a).norm();
            colnorm(a) = nn > 0.0 ? nn : 1.0;
            A.col(a) /= colnorm(a);
        }
        // truncated SVD keeps the coefficient vector bounded along
        // near-collinear atom directions
        Eigen::BDCSVD<Matrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
        svd.setThreshold(1e-10);
        Vector x = svd.solve(bvec);
        if (std::getenv("PIEKIT_DEBUG_INVERT"))
            std::fprintf(stderr, "invert_pi fit d=%d: na=%d rows=%d lsres=%.3e |x|=%.3e\n", d,
                         na, static_cast<int>(A.rows()), (A * x - bvec).norm(), x.norm());
        x = x.cwiseQuotient(colnorm);

        PIOperator inv(m, n, m, n, dom);
        for (int a = 0; a < na; ++a)
            if (x(a) != 0.0) inv = inv + atoms[a].op * x(a);
        inv = inv.truncated(1e-14);

        double worst = 0.0;
        for (const auto& f : probes) {
            RL2Function rf = inv.apply(op.apply(f));
            RL2Function diff(rf.finite - f.finite, rf.dist - f.dist);
            worst = std::max(worst, rl2_norm(diff) / std::max(1e-300, rl2_norm(f)));
        }
        if (worst < best.residual) {
            best.inverse = inv;
            best.residual = worst;
            best.degree = d;
        }
        if (best.residual <= tol || d >= max_fit_degree) break;
    }
    if (best.residual > tol)
        throw std::runtime_error("invert_pi: residual " + std::to_string(best.residual) +
                                 " exceeds tolerance after degree escalation");
    return best;
}

double min_eigenvalue_estimate(const PIOperator& op, int basis_degree) {
    if (!op.is_square())
        throw std::invalid_argument("min_eigenvalue_estimate: operator not square");
    const int m = op.m1(), n = op.n1();
    const Domain dom = op.domain();
    if (m == 0 && n == 0) return 0.0;
    if (n == 0) {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (op.P() + op.P().transpose()),
                                                 Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }
    const int N = std::max(basis_degree, 2);
    auto leg = legendre_basis(N, dom);
    auto basis = rl2_basis(m, n, N, dom, leg);
    const int Nb = static_cast<int>(basis.size());
    Matrix M(Nb, Nb);
    std::vector<RL2Function> op_basis;
    op_basis.reserve(Nb);
    for (int j = 0; j < Nb; ++j) op_basis.push_back(op.apply(basis[j]));
    for (int i = 0; i < Nb; ++i)
        for (int j = 0; j < Nb; ++j) M(i, j) = inner_product(basis[i], op_basis[j]);
    Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (M + M.transpose()),
                                             Eigen::EigenvaluesOnly);
    return es.eigenvalues().minCoeff();
}

}  // namespace piekit
