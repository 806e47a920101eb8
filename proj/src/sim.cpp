#include "piekit/sim.hpp"

#include <Eigen/Dense>
#include <unsupported/Eigen/KroneckerProduct>
#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace piekit {

namespace {

// Chebyshev polynomials of the first kind mapped to [a,b], degrees 0..N,
// as 1x1 polynomials in s.
std::vector<PolyMatrix> chebyshev_basis(int N, Domain dom) {
    std::vector<std::vector<double>> c(N + 1);
    c[0] = {1.0};
    if (N >= 1) c[1] = {0.0, 1.0};
    for (int k = 1; k < N; ++k) {
        std::vector<double> next(k + 2, 0.0);
        for (size_t i = 0; i < c[k].size(); ++i) next[i + 1] += 2.0 * c[k][i];
        for (size_t i = 0; i < c[k - 1].size(); ++i) next[i] -= c[k - 1][i];
        c[k + 1] = next;
    }
    // x = (2s - a - b)/(b - a)
    const double alpha = -(dom.a + dom.b) / dom.length();
    const double beta = 2.0 / dom.length();
    std::vector<PolyMatrix> out;
    for (int k = 0; k <= N; ++k) {
        PolyMatrix px(1, 1, VarSet::S, dom);
        for (size_t i = 0; i < c[k].size(); ++i)
            if (c[k][i] != 0.0)
                px.add_coeff(static_cast<int>(i), 0, Matrix::Constant(1, 1, c[k][i]));
        out.push_back(px.substitute_s(alpha, beta, 0.0));
    }
    return out;
}

std::vector<RL2Function> projection_basis(int m, int n, int N, Domain dom) {
    auto cheb = chebyshev_basis(N, dom);
    std::vector<RL2Function> basis;
    for (int i = 0; i < m; ++i) {
        Vector e = Vector::Zero(m);
        e(i) = 1.0;
        basis.emplace_back(e, PolyMatrix(n, 1, VarSet::None, dom));
    }
    for (int ch = 0; ch < n; ++ch) {
        for (int k = 0; k <= N; ++k) {
            PolyMatrix d(n, 1, VarSet::None, dom);
            for (const auto& [key, mat] : cheb[k].coeffs()) {
                Matrix col = Matrix::Zero(n, 1);
                col(ch, 0) = mat(0, 0);
                d.add_coeff(key.first, key.second, col);
            }
            basis.emplace_back(Vector::Zero(m), d);
        }
    }
    return basis;
}

// Gauss-Legendre nodes/weights on [a, b] by Newton iteration.
struct Quad {
    std::vector<double> nodes, weights;

    Quad(int nq, Domain dom) {
        nodes.resize(nq);
        weights.resize(nq);
        for (int i = 0; i < nq; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (nq + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= nq; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = nq * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = dom.a + 0.5 * (dom.b - dom.a) * (1.0 - x);
            weights[i] = (dom.b - dom.a) / ((1.0 - x * x) * dp * dp);
        }
    }
};

double cheb_eval(int k, double s, Domain dom) {
    const double x = (2.0 * s - dom.a - dom.b) / dom.length();
    if (k == 0) return 1.0;
    double p0 = 1.0, p1 = x;
    for (int i = 1; i < k; ++i) {
        double p2 = 2.0 * x * p1 - p0;
        p0 = p1;
        p1 = p2;
    }
    return p1;
}

// Inner products <phi_i, g> for every basis element, by Gauss quadrature.
// The monomial-coefficient form of high-degree Chebyshev polynomials carries
// coefficients ~2^(2N); symbolic products of two such polynomials cancel
// catastrophically in double precision, so the test function phi_i is
// evaluated by the stable three-term recurrence instead. The quadrature is
// exact for the polynomial integrands (degree <= deg(g) + N).
Vector basis_inner(const RL2Function& g, int m, int n, int N, const Quad& q, Domain dom) {
    const int d = m + n * (N + 1);
    Vector out = Vector::Zero(d);
    if (m > 0) out.head(m) = g.finite;
    if (n == 0) return out;
    const int nq = static_cast<int>(q.nodes.size());
    Matrix gv(n, nq);
    for (int p = 0; p < nq; ++p) gv.col(p) = g.dist.eval(q.nodes[p]);
    for (int ch = 0; ch < n; ++ch)
        for (int k = 0; k <= N; ++k) {
            double acc = 0.0;
            for (int p = 0; p < nq; ++p)
                acc += q.weights[p] * cheb_eval(k, q.nodes[p], dom) * gv(ch, p);
            out(m + ch * (N + 1) + k) = acc;
        }
    return out;
}

Matrix galerkin(const PIOperator& op, const std::vector<RL2Function>& basis, int m,
                int n, int N, const Quad& q, Domain dom) {
    const int d = static_cast<int>(basis.size());
    Matrix M(d, d);
    for (int j = 0; j < d; ++j) M.col(j) = basis_inner(op.apply(basis[j]), m, n, N, q, dom);
    return M;
}

Eigen::PartialPivLU<Matrix> checked_lu(const Matrix& MT) {
    Eigen::JacobiSVD<Matrix> svd(MT);
    const double smin = svd.singularValues().minCoeff();
    const double smax = svd.singularValues().maxCoeff();
    if (smin <= 0.0 || smax / smin > 1e12) {
        std::ostringstream os;
        os << "simulate: projected mass matrix is singular or ill-conditioned "
              "(condition number "
           << (smin > 0.0 ? smax / smin : std::numeric_limits<double>::infinity())
           << " > 1e12)";
        throw std::runtime_error(os.str());
    }
    return Eigen::PartialPivLU<Matrix>(MT);
}

// Classical RK4 is only stable for |lambda| dt inside its stability region
// (about 2.83 on the imaginary axis). The Chebyshev-Galerkin pencil carries
// unresolved modes whose magnitude grows like N^4; at the step sizes the
// physical dynamics call for, those modes sit far outside the envelope and
// any explicit scheme diverges on them. Before integrating we therefore
// restrict the linear dynamics x' = K x + F w once per run to the invariant
// subspace of modes with |lambda| dt <= kStabilityEnvelope, the standard
// spectral filtering of unresolved modes. Resolved physics is unaffected.
constexpr double kStabilityEnvelope = 2.7;

struct FilteredLinear {
    Matrix U;   // d x r, orthonormal basis of the kept invariant subspace
    Matrix W;   // r x d, spectral coordinate map (W U = I, W K = Ar W)
    Matrix Ar;  // r x r reduced dynamics
    Matrix Fr;  // r x nw reduced forcing

    Vector rhs(double t, const Vector& y, const Signal& w) const {
        Vector v = Ar * y;
        if (Fr.cols() > 0) v += Fr * w(t);
        return v;
    }
};

FilteredLinear filter_dynamics(const Matrix& K, const Matrix& F, double dt) {
    const int d = static_cast<int>(K.rows());
    Eigen::EigenSolver<Matrix> es(K);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("simulate: eigendecomposition of the reduced dynamics failed");

    std::vector<int> kept;
    for (int i = 0; i < d; ++i)
        if (std::abs(es.eigenvalues()(i)) * dt <= kStabilityEnvelope) kept.push_back(i);

    FilteredLinear fl;
    if (static_cast<int>(kept.size()) == d) {
        fl.U = Matrix::Identity(d, d);
        fl.W = fl.U;
        fl.Ar = K;
        fl.Fr = F;
        return fl;
    }

    // Real basis of the kept eigenspace: Re/Im pairs for complex eigenvalues.
    Matrix span(d, 0);
    for (int i : kept) {
        const double im = es.eigenvalues()(i).imag();
        if (im < 0.0) continue;  // conjugate partner already contributes
        span.conservativeResize(Eigen::NoChange, span.cols() + (im > 0.0 ? 2 : 1));
        span.col(span.cols() - (im > 0.0 ? 2 : 1)) = es.eigenvectors().col(i).real();
        if (im > 0.0) span.col(span.cols() - 1) = es.eigenvectors().col(i).imag();
    }
    Eigen::ColPivHouseholderQR<Matrix> qr(span);
    qr.setThreshold(1e-10);
    const int r = static_cast<int>(qr.rank());
    Matrix U = Matrix(qr.householderQ()).leftCols(r);

    // Eigenvectors of the strongly nonnormal K give the kept subspace only
    // approximately; the leaked component shifts neutrally stable modes off
    // the imaginary axis and shows up as slow artificial energy drift. A few
    // Newton corrections (block Sylvester solves) drive the off-diagonal
    // coupling A21 = V^T K U to roundoff.
    const double knorm = std::max(K.norm(), 1e-300);
    for (int it = 0; it < 8; ++it) {
        Eigen::HouseholderQR<Matrix> full(U);
        Matrix Q = full.householderQ();
        U = Q.leftCols(r);
        Matrix V = Q.rightCols(d - r);
        Matrix A11 = U.transpose() * K * U;
        Matrix A21 = V.transpose() * K * U;
        if (A21.norm() <= 1e-13 * knorm) break;
        Matrix A22 = V.transpose() * K * V;
        // vec(A22 X - X A11) = -vec(A21)
        const int p = d - r;
        Matrix S = Eigen::kroneckerProduct(Matrix::Identity(r, r), A22) -
                   Eigen::kroneckerProduct(A11.transpose(), Matrix::Identity(p, p));
        Eigen::Map<const Vector> a21v(A21.data(), p * r);
        Vector xv = S.partialPivLu().solve(-a21v);
        U = U + V * Eigen::Map<Matrix>(xv.data(), p, r);
    }
    Eigen::HouseholderQR<Matrix> reorth(U);
    Matrix Q = reorth.householderQ();
    fl.U = Q.leftCols(r);
    Matrix V = Q.rightCols(d - r);
    Matrix A11 = fl.U.transpose() * K * fl.U;
    Matrix A12 = fl.U.transpose() * K * V;
    Matrix A22 = V.transpose() * K * V;

    // Orthogonal projection onto the kept subspace would leak the discarded
    // modes' content into the kept modal amplitudes (the two invariant
    // subspaces are not orthogonal). The spectral projector needs
    // X solving A11 X - X A22 = A12; then W = U^T + X V^T maps states to
    // kept-mode coordinates without cross-talk.
    const int p = d - r;
    Matrix S = Eigen::kroneckerProduct(Matrix::Identity(p, p), A11) -
               Eigen::kroneckerProduct(A22.transpose(), Matrix::Identity(r, r));
    Eigen::Map<const Vector> a12v(A12.data(), r * p);
    Vector xv = S.partialPivLu().solve(a12v);
    fl.W = fl.U.transpose() + Eigen::Map<Matrix>(xv.data(), r, p) * V.transpose();
    fl.Ar = A11;
    fl.Fr = fl.W * F;
    return fl;
}

template <typename F>
Vector rk4_step(const F& f, double t, double dt, const Vector& c) {
    Vector k1 = f(t, c);
    Vector k2 = f(t + 0.5 * dt, c + 0.5 * dt * k1);
    Vector k3 = f(t + 0.5 * dt, c + 0.5 * dt * k2);
    Vector k4 = f(t + dt, c + dt * k3);
    return c + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

void check_overflow(const Vector& c, double t) {
    if (!c.allFinite() || c.norm() > 1e12) {
        std::ostringstream os;
        os << "simulate: state blow-up at t = " << t;
        throw std::runtime_error(os.str());
    }
}

Vector project_ic(const ProjectedSystem& proj, const RL2Function& x0) {
    int xdeg = 0;
    for (const auto& [key, mat] : x0.dist.coeffs()) xdeg = std::max(xdeg, key.first);
    Quad q(proj.N + xdeg / 2 + 4, proj.dom);
    Vector rhs = basis_inner(x0, proj.m, proj.n, proj.N, q, proj.dom);
    return proj.gram.ldlt().solve(rhs);
}

int steps_for(double dt, double t_final) {
    if (dt <= 0.0 || t_final < 0.0)
        throw std::invalid_argument("simulate: dt must be positive and t_final >= 0");
    return static_cast<int>(std::llround(t_final / dt));
}

}  // namespace

ProjectedSystem project(const PIESystem& sys, int N) {
    if (N < 1) throw std::invalid_argument("project: basis order must be >= 1");
    sys.validate();

    ProjectedSystem proj;
    proj.N = N;
    proj.m = sys.m();
    proj.n = sys.n();
    proj.dom = sys.domain();
    proj.basis = projection_basis(proj.m, proj.n, N, proj.dom);
    const int d = proj.dim();

    int kdeg = 0;
    for (const PIOperator* op : {&sys.T, &sys.A, &sys.B1})
        for (const PolyMatrix* p : {&op->Q1(), &op->Q2(), &op->R0(), &op->R1(), &op->R2()})
            for (const auto& [key, mat] : p->coeffs())
                kdeg = std::max({kdeg, key.first, key.second});
    const Quad q(2 * N + kdeg + 4, proj.dom);

    proj.gram = galerkin(PIOperator::identity(proj.m, proj.n, proj.dom), proj.basis,
                         proj.m, proj.n, N, q, proj.dom);
    proj.gram = 0.5 * (proj.gram + proj.gram.transpose()).eval();  // exactly symmetric
    proj.MT = galerkin(sys.T, proj.basis, proj.m, proj.n, N, q, proj.dom);
    proj.MA = galerkin(sys.A, proj.basis, proj.m, proj.n, N, q, proj.dom);

    const int nw = sys.nw();
    proj.MB = Matrix(d, nw);
    for (int k = 0; k < nw; ++k) {
        Vector e = Vector::Zero(nw);
        e(k) = 1.0;
        RL2Function g = sys.B1.apply(RL2Function(e, PolyMatrix(0, 1, VarSet::None, proj.dom)));
        proj.MB.col(k) = basis_inner(g, proj.m, proj.n, N, q, proj.dom);
    }

    proj.MC1 = Matrix(sys.nz(), d);
    proj.MC2 = Matrix(sys.ny(), d);
    for (int j = 0; j < d; ++j) {
        proj.MC1.col(j) = sys.C1.apply(proj.basis[j]).finite;
        proj.MC2.col(j) = sys.C2.apply(proj.basis[j]).finite;
    }
    proj.D21 = sys.D21;

    // Chebyshev-Gauss-Lobatto nodes, ascending.
    proj.grid.resize(N + 1);
    const double mid = 0.5 * (proj.dom.a + proj.dom.b);
    const double half = 0.5 * proj.dom.length();
    for (int p = 0; p <= N; ++p)
        proj.grid[p] = mid - half * std::cos(M_PI * p / N);

    const int ns = static_cast<int>(proj.grid.size());
    proj.recon = Matrix::Zero(ns * proj.n, d);
    for (int j = 0; j < d; ++j) {
        RL2Function g = sys.T.apply(proj.basis[j]);
        for (int p = 0; p < ns; ++p)
            if (proj.n > 0)
                proj.recon.block(p * proj.n, j, proj.n, 1) = g.dist.eval(proj.grid[p]);
    }
    return proj;
}

Trajectory simulate(const ProjectedSystem& proj, const Signal& w,
                    const RL2Function& x0, double dt, double t_final) {
    const int steps = steps_for(dt, t_final);
    const int d = proj.dim();
    const int nz = static_cast<int>(proj.MC1.rows());
    const int ny = static_cast<int>(proj.MC2.rows());
    const int nf = static_cast<int>(proj.recon.rows());

    auto lu = checked_lu(proj.MT);
    FilteredLinear fl = filter_dynamics(lu.solve(proj.MA), lu.solve(proj.MB), dt);
    auto f = [&](double t, const Vector& y) { return fl.rhs(t, y, w); };

    Trajectory traj;
    traj.stations = proj.grid;
    traj.n_channels = proj.n;
    traj.t.resize(steps + 1);
    traj.coeffs = Matrix(steps + 1, d);
    traj.z = Matrix(steps + 1, nz);
    traj.y = Matrix(steps + 1, ny);
    traj.field = Matrix(steps + 1, nf);

    Vector yred = fl.W * project_ic(proj, x0);
    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        check_overflow(yred, t);
        Vector c = fl.U * yred;
        traj.t[k] = t;
        traj.coeffs.row(k) = c.transpose();
        traj.z.row(k) = (proj.MC1 * c).transpose();
        Vector yk = proj.MC2 * c;
        if (proj.MB.cols() > 0) yk += proj.D21 * w(t);
        traj.y.row(k) = yk.transpose();
        traj.field.row(k) = (proj.recon * c).transpose();
        if (k < steps) yred = rk4_step(f, t, dt, yred);
    }
    return traj;
}

Trajectory simulate_observer(const PIESystem& plant, const ObserverGain& L,
                             const Signal& w, const RL2Function& plant_ic,
                             int N, double dt, double t_final) {
    ProjectedSystem proj = project(plant, N);
    const int steps = steps_for(dt, t_final);
    const int d = proj.dim();
    const int ny = static_cast<int>(proj.MC2.rows());
    const int nz = static_cast<int>(proj.MC1.rows());
    const int nf = static_cast<int>(proj.recon.rows());

    // Projected injection <phi_i, L e_k>, R^{ny} -> coefficient space.
    PIOperator Lop = L.as_operator(proj.dom);
    int ldeg = 0;
    for (const auto& [key, mat] : L.L2.coeffs()) ldeg = std::max(ldeg, key.first);
    const Quad q(N + ldeg / 2 + 4, proj.dom);
    Matrix ML(d, ny);
    for (int k = 0; k < ny; ++k) {
        Vector e = Vector::Zero(ny);
        e(k) = 1.0;
        RL2Function g = Lop.apply(RL2Function(e, PolyMatrix(0, 1, VarSet::None, proj.dom)));
        ML.col(k) = basis_inner(g, proj.m, proj.n, N, q, proj.dom);
    }

    auto lu = checked_lu(proj.MT);
    // Stacked state [c; c_hat]:
    //   MT c'     = MA c + MB w
    //   MT c_hat' = MA c_hat + ML (MC2 c_hat - y),  y = MC2 c + D21 w.
    const Matrix K = lu.solve(proj.MA);
    const Matrix G = lu.solve(ML);
    Matrix Ks = Matrix::Zero(2 * d, 2 * d);
    Ks.topLeftCorner(d, d) = K;
    Ks.bottomLeftCorner(d, d) = -G * proj.MC2;
    Ks.bottomRightCorner(d, d) = K + G * proj.MC2;
    Matrix Fs(2 * d, proj.MB.cols());
    Fs.topRows(d) = lu.solve(proj.MB);
    Fs.bottomRows(d) = -G * proj.D21;
    FilteredLinear fl = filter_dynamics(Ks, Fs, dt);
    auto f = [&](double t, const Vector& y) { return fl.rhs(t, y, w); };

    Trajectory traj;
    traj.stations = proj.grid;
    traj.n_channels = proj.n;
    traj.has_observer = true;
    traj.t.resize(steps + 1);
    traj.coeffs = Matrix(steps + 1, d);
    traj.z = Matrix(steps + 1, nz);
    traj.y = Matrix(steps + 1, ny);
    traj.field = Matrix(steps + 1, nf);
    traj.z_hat = Matrix(steps + 1, nz);
    traj.e_z = Matrix(steps + 1, nz);
    traj.error_field = Matrix(steps + 1, nf);

    Vector x0 = Vector::Zero(2 * d);
    x0.head(d) = project_ic(proj, plant_ic);
    Vector yred = fl.W * x0;
    for (int k = 0; k <= steps; ++k) {
        const double t = k * dt;
        check_overflow(yred, t);
        Vector x = fl.U * yred;
        Vector c = x.head(d), ch = x.tail(d);
        traj.t[k] = t;
        traj.coeffs.row(k) = c.transpose();
        traj.z.row(k) = (proj.MC1 * c).transpose();
        Vector yk = proj.MC2 * c;
        if (proj.MB.cols() > 0) yk += proj.D21 * w(t);
        traj.y.row(k) = yk.transpose();
        traj.field.row(k) = (proj.recon * c).transpose();
        traj.z_hat.row(k) = (proj.MC1 * ch).transpose();
        traj.e_z.row(k) = traj.z_hat.row(k) - traj.z.row(k);
        traj.error_field.row(k) = (proj.recon * (ch - c)).transpose();
        if (k < steps) yred = rk4_step(f, t, dt, yred);
    }
    return traj;
}

namespace {

void write_row(std::ofstream& os, const std::vector<std::string>& cells) {
    for (size_t i = 0; i < cells.size(); ++i) {
        if (i) os << ',';
        os << cells[i];
    }
    os << "\r\n";
}

std::string num(double v) {
    std::ostringstream os;
    os.precision(10);
    os << v;
    return os.str();
}

}  // namespace

void emit_csv(const Trajectory& traj, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_csv: cannot open " + path);

    const int nz = static_cast<int>(traj.z.cols());
    const int ns = static_cast<int>(traj.stations.size());
    const int nch = std::max(traj.n_channels, 1);

    std::vector<std::string> header{"t"};
    auto push_cols = [&](const std::string& base, int count) {
        for (int i = 0; i < count; ++i)
            header.push_back(count == 1 ? base : base + "_" + std::to_string(i + 1));
    };
    push_cols("e_z", nz);
    push_cols("z", nz);
    push_cols("z_hat", nz);
    const Matrix& fld = traj.has_observer ? traj.error_field : traj.field;
    for (int p = 0; p < ns; ++p)
        for (int ch = 0; ch < traj.n_channels; ++ch) {
            std::string name = "field@" + num(traj.stations[p]);
            if (nch > 1) name += "_" + std::to_string(ch + 1);
            header.push_back(name);
        }
    write_row(os, header);

    for (size_t k = 0; k < traj.t.size(); ++k) {
        std::vector<std::string> row{num(traj.t[k])};
        for (int i = 0; i < nz; ++i)
            row.push_back(num(traj.has_observer ? traj.e_z(k, i) : 0.0));
        for (int i = 0; i < nz; ++i) row.push_back(num(traj.z(k, i)));
        for (int i = 0; i < nz; ++i)
            row.push_back(num(traj.has_observer ? traj.z_hat(k, i) : traj.z(k, i)));
        for (int j = 0; j < fld.cols(); ++j) row.push_back(num(fld(k, j)));
        write_row(os, row);
    }
    if (!os) throw std::runtime_error("emit_csv: write failure on " + path);
}

namespace {

// Minimal SVG line chart: one polyline per series over a shared time axis.
void svg_chart(const std::string& path, const std::string& title,
               const std::vector<double>& t,
               const std::vector<std::pair<std::string, std::vector<double>>>& series) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("emit_plots: cannot open " + path);

    const double W = 720, H = 420, L = 60, R = 20, T = 40, B = 40;
    double tmin = 0, tmax = 1, vmin = 0, vmax = 1;
    if (!t.empty()) {
        tmin = t.front();
        tmax = t.back() > tmin ? t.back() : tmin + 1.0;
        vmin = 1e300;
        vmax = -1e300;
        for (const auto& [name, v] : series)
            for (double x : v) {
                vmin = std::min(vmin, x);
                vmax = std::max(vmax, x);
            }
        if (!(vmin < vmax)) {
            vmin -= 1.0;
            vmax += 1.0;
        }
    }
    auto px = [&](double x) { return L + (x - tmin) / (tmax - tmin) * (W - L - R); };
    auto py = [&](double v) { return H - B - (v - vmin) / (vmax - vmin) * (H - T - B); };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b", "#e377c2", "#7f7f7f"};
    os << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << W << "\" height=\""
       << H << "\" viewBox=\"0 0 " << W << " " << H << "\">\n"
       << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n"
       << "<text x=\"" << W / 2 << "\" y=\"24\" text-anchor=\"middle\" font-size=\"16\">"
       << title << "</text>\n"
       << "<line x1=\"" << L << "\" y1=\"" << H - B << "\" x2=\"" << W - R << "\" y2=\""
       << H - B << "\" stroke=\"black\"/>\n"
       << "<line x1=\"" << L << "\" y1=\"" << T << "\" x2=\"" << L << "\" y2=\"" << H - B
       << "\" stroke=\"black\"/>\n"
       << "<text x=\"" << L << "\" y=\"" << H - B + 16 << "\" font-size=\"11\">"
       << num(tmin) << "</text>\n"
       << "<text x=\"" << W - R << "\" y=\"" << H - B + 16
       << "\" text-anchor=\"end\" font-size=\"11\">" << num(tmax) << "</text>\n"
       << "<text x=\"" << L - 4 << "\" y=\"" << H - B
       << "\" text-anchor=\"end\" font-size=\"11\">" << num(vmin) << "</text>\n"
       << "<text x=\"" << L - 4 << "\" y=\"" << T + 4
       << "\" text-anchor=\"end\" font-size=\"11\">" << num(vmax) << "</text>\n";
    int ci = 0;
    for (const auto& [name, v] : series) {
        const char* col = colors[ci % 8];
        os << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.2\" points=\"";
        // subsample long series to keep files small
        const size_t stride = std::max<size_t>(1, t.size() / 2000);
        for (size_t k = 0; k < t.size(); k += stride)
            os << px(t[k]) << ',' << py(v[k]) << ' ';
        if (!t.empty()) os << px(t.back()) << ',' << py(v.back());
        os << "\"/>\n"
           << "<text x=\"" << W - R - 8 << "\" y=\"" << T + 16 + 14 * ci
           << "\" text-anchor=\"end\" font-size=\"12\" fill=\"" << col << "\">" << name
           << "</text>\n";
        ++ci;
    }
    os << "</svg>\n";
    if (!os) throw std::runtime_error("emit_plots: write failure on " + path);
}

std::vector<double> column(const Matrix& M, int j) {
    std::vector<double> v(M.rows());
    for (int k = 0; k < M.rows(); ++k) v[k] = M(k, j);
    return v;
}

}  // namespace

void emit_plots(const Trajectory& traj, const std::string& prefix) {
    const Matrix& fld = traj.has_observer ? traj.error_field : traj.field;
    std::vector<std::pair<std::string, std::vector<double>>> fseries;
    for (size_t p = 0; p < traj.stations.size(); ++p)
        for (int ch = 0; ch < traj.n_channels; ++ch) {
            std::string name = "s=" + num(traj.stations[p]);
            if (traj.n_channels > 1) name += " (" + std::to_string(ch + 1) + ")";
            fseries.emplace_back(name,
                                 column(fld, static_cast<int>(p) * traj.n_channels + ch));
        }
    svg_chart(prefix + "_field.svg",
              traj.has_observer ? "Estimation error field at spatial stations"
                                : "State field at spatial stations",
              traj.t, fseries);

    std::vector<std::pair<std::string, std::vector<double>>> oseries;
    for (int i = 0; i < traj.z.cols(); ++i)
        oseries.emplace_back(traj.z.cols() > 1 ? "z_" + std::to_string(i + 1) : "z",
                             column(traj.z, i));
    if (traj.has_observer) {
        for (int i = 0; i < traj.z_hat.cols(); ++i)
            oseries.emplace_back(
                traj.z_hat.cols() > 1 ? "z_hat_" + std::to_string(i + 1) : "z_hat",
                column(traj.z_hat, i));
    } else {
        for (int i = 0; i < traj.y.cols(); ++i)
            oseries.emplace_back(traj.y.cols() > 1 ? "y_" + std::to_string(i + 1) : "y",
                                 column(traj.y, i));
    }
    svg_chart(prefix + "_outputs.svg",
              traj.has_observer ? "Regulated output vs observer estimate"
                                : "Regulated and measured outputs",
              traj.t, oseries);
}

}  // namespace piekit
