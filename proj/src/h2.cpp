#include "piekit/h2.hpp"

#include <cmath>
#include <stdexcept>

#include "piekit/sdpa_io.hpp"

namespace piekit {

namespace {

// Inclusion R^k -> R^{k+m} x L2^n (leading finite slots).
PIOperator embed_finite(int k, int m, int n, Domain dom) {
    Matrix P = Matrix::Zero(k + m, k);
    P.topLeftCorner(k, k).setIdentity();
    return PIOperator(P, PolyMatrix::zero(k + m, 0, dom), PolyMatrix::zero(n, k, dom),
                      PolyMatrix::zero(n, 0, dom), PolyMatrix::zero(n, 0, dom),
                      PolyMatrix::zero(n, 0, dom), dom);
}

// Inclusion RL2^{m,n} -> R^{k+m} x L2^n (trailing finite slots, full
// distributed part).
PIOperator embed_state(int k, int m, int n, Domain dom) {
    Matrix P = Matrix::Zero(k + m, m);
    P.bottomLeftCorner(m, m).setIdentity();
    return PIOperator(P, PolyMatrix::zero(k + m, n, dom), PolyMatrix::zero(n, m, dom),
                      PolyMatrix::constant(Matrix::Identity(n, n), dom),
                      PolyMatrix::zero(n, n, dom), PolyMatrix::zero(n, n, dom), dom);
}

// Symmetric matrix variable W built from scalar variables; returns the list
// of (i, j, scalar_id) and appends the scaled basis terms to the given
// expressions: `embedded` gets F o E_ij o F* and `plain` gets E_ij itself.
struct SymMatrixVar {
    int dim = 0;
    std::vector<std::tuple<int, int, int>> ids;

    Matrix value(const std::vector<double>& scalars) const {
        Matrix W = Matrix::Zero(dim, dim);
        for (const auto& [i, j, id] : ids) {
            W(i, j) = scalars[id];
            W(j, i) = scalars[id];
        }
        return W;
    }
};

SymMatrixVar make_sym_var(LPIProgram& prog, int dim, const PIOperator& F, PIExpr& embedded,
                          PIExpr& plain, Domain dom) {
    SymMatrixVar sv;
    sv.dim = dim;
    for (int i = 0; i < dim; ++i)
        for (int j = i; j < dim; ++j) {
            const int id = prog.scalar();
            sv.ids.emplace_back(i, j, id);
            Matrix E = Matrix::Zero(dim, dim);
            E(i, j) = 1.0;
            E(j, i) = 1.0;
            PIOperator Eop = PIOperator::from_matrix(E, dom);
            embedded = std::move(embedded) + prog.scaled(id, F.compose(Eop).compose(F.adjoint()));
            plain = std::move(plain) + prog.scaled(id, Eop);
        }
    return sv;
}

PIExpr zero_expr(int m1, int n1, int m2, int n2, Domain dom) {
    return expr_const(PIOperator::zero(m1, n1, m2, n2, dom));
}

bool solved(SDPStatus s) { return s == SDPStatus::Optimal; }

}  // namespace

NormCertificate h2_bound_gramian(const PIESystem& sys, const H2Options& opts) {
    sys.validate();
    const Domain dom = sys.domain();
    NormCertificate cert;
    cert.eps = opts.eps;
    for (int d = opts.degree; d <= opts.max_degree; ++d) {
        LPIProgram prog(dom);
        prog.slack_degree_boost = d - opts.degree;
        prog.eq_relax = opts.eq_relax;
        prog.trace_reg = opts.trace_reg;
        const int g2 = prog.scalar();
        LPIVar P = prog.pos_pi(sys.m(), sys.n(), d, d);

        // Strictness is weighted by T*T: every Lyapunov term carries a factor
        // of the (compact) map T, so its spectrum accumulates at zero and a
        // plain -eps I margin is unattainable on distributed states.
        PIExpr lyap = lcompose(sys.A.adjoint(), rcompose(prog.var(P), sys.T)) +
                      lcompose(sys.T.adjoint(), rcompose(prog.var(P), sys.A)) +
                      expr_const(sys.C1.adjoint().compose(sys.C1) +
                                 sys.T.adjoint().compose(sys.T) * opts.eps);
        prog.require_nsd(lyap, 0.0);
        prog.require_psd(prog.var(P), opts.eps);
        prog.require_trace_le(lcompose(sys.B1.adjoint(), rcompose(prog.var(P), sys.B1)), g2);
        prog.minimize({{g2, 1.0}});

        LPIResult res = prog.solve(opts.sdp);
        if (!opts.export_sdpa.empty()) write_sdpa_sparse(opts.export_sdpa, prog.last_problem);
        cert.status = res.status;
        cert.iterations = res.iterations;
        cert.degree = d;
        if (solved(res.status)) {
            cert.gamma = std::sqrt(std::max(0.0, res.scalars[g2]));
            cert.P = res.operators[P.id];
            return cert;
        }
    }
    return cert;
}

NormCertificate h2_bound_schur(const PIESystem& sys, const H2Options& opts) {
    sys.validate();
    const Domain dom = sys.domain();
    const int m = sys.m(), n = sys.n(), nw = sys.nw(), nz = sys.nz();
    NormCertificate cert;
    cert.eps = opts.eps;
    for (int d = opts.degree; d <= opts.max_degree; ++d) {
        LPIProgram prog(dom);
        prog.slack_degree_boost = d - opts.degree;
        prog.eq_relax = opts.eq_relax;
        prog.trace_reg = opts.trace_reg;
        const int g = prog.scalar();
        LPIVar P = prog.pos_pi(m, n, d, d);

        // [-gamma I, C1; C1*, T*PA + A*PT] <= -eps I on R^{nz} x RL2^{m,n}
        const PIOperator Ez = embed_finite(nz, m, n, dom);
        const PIOperator Es = embed_state(nz, m, n, dom);
        const PIOperator Czs = Ez.compose(sys.C1).compose(Es.adjoint());
        PIExpr blk1 = prog.scaled(g, -Ez.compose(Ez.adjoint())) +
                      expr_const(Czs + Czs.adjoint()) +
                      lcompose(Es.compose(sys.T.adjoint()),
                               rcompose(prog.var(P), sys.A.compose(Es.adjoint()))) +
                      lcompose(Es.compose(sys.A.adjoint()),
                               rcompose(prog.var(P), sys.T.compose(Es.adjoint())));
        // eps margin on the gamma corner; T*T-weighted margin on the state
        // block, where the compact factor T rules out a uniform -eps I.
        blk1 = std::move(blk1) +
               expr_const((Ez.compose(Ez.adjoint()) +
                           Es.compose(sys.T.adjoint()).compose(sys.T).compose(Es.adjoint())) *
                          opts.eps);
        prog.require_nsd(blk1, 0.0);

        // [W, B1*P; P B1, P] >= eps I on R^{nw} x RL2^{m,n}
        const PIOperator Fw = embed_finite(nw, m, n, dom);
        const PIOperator Fs = embed_state(nw, m, n, dom);
        PIExpr blk2 = zero_expr(nw + m, n, nw + m, n, dom);
        PIExpr wtr = zero_expr(nw, 0, nw, 0, dom);
        SymMatrixVar W = make_sym_var(prog, nw, Fw, blk2, wtr, dom);
        blk2 = std::move(blk2) +
               lcompose(Fw.compose(sys.B1.adjoint()),
                        rcompose(prog.var(P), Fs.adjoint())) +
               lcompose(Fs, rcompose(prog.var(P), sys.B1.compose(Fw.adjoint()))) +
               lcompose(Fs, rcompose(prog.var(P), Fs.adjoint()));
        prog.require_psd(blk2, opts.eps);

        prog.require_psd(prog.var(P), opts.eps);
        prog.require_trace_le(wtr, g);
        prog.minimize({{g, 1.0}});

        LPIResult res = prog.solve(opts.sdp);
        if (!opts.export_sdpa.empty()) write_sdpa_sparse(opts.export_sdpa, prog.last_problem);
        cert.status = res.status;
        cert.iterations = res.iterations;
        cert.degree = d;
        if (solved(res.status)) {
            cert.gamma = res.scalars[g];
            cert.P = res.operators[P.id];
            cert.W = W.value(res.scalars);
            return cert;
        }
    }
    return cert;
}

SchurReport schur_consistency_check(const PIOperator& P, const PIOperator& Q,
                                    const PIOperator& R, double eps, int basis_degree) {
    if (!P.is_square() || !R.is_square() || Q.m1() != P.m1() || Q.n1() != P.n1() ||
        Q.m2() != R.m2() || Q.n2() != R.n2())
        throw std::invalid_argument("schur_consistency_check: incompatible shapes");

    SchurReport rep;
    const PIOperator blk = vcat(hcat(P, Q.adjoint()), hcat(Q, R));
    rep.block_min = min_eigenvalue_estimate(blk, basis_degree);
    rep.p_min = min_eigenvalue_estimate(P, basis_degree);
    rep.block_psd = rep.block_min >= eps;
    rep.p_coercive = rep.p_min >= eps;

    if (rep.p_coercive) {
        InversionResult inv = invert_pi(P, basis_degree, 1e-6);
        rep.inversion_residual = inv.residual;
        const PIOperator S = R - Q.compose(inv.inverse).compose(Q.adjoint());
        rep.complement_min = min_eigenvalue_estimate(S, basis_degree);
    } else {
        rep.complement_min = rep.block_min;
    }
    rep.complement_psd = rep.p_coercive && rep.complement_min >= eps;
    rep.consistent = rep.block_psd == (rep.p_coercive && rep.complement_psd);
    return rep;
}

namespace {

SynthesisResult synthesize_estimator_core(const PIESystem& sys, const H2Options& opts);

}  // namespace

SynthesisResult synthesize_estimator(const PIESystem& sys, const H2Options& opts) {
    SynthesisResult out = synthesize_estimator_core(sys, opts);
    if (!solved(out.status) || !opts.decay_refine) return out;

    // The H2 optimum is typically degenerate in the closed-loop decay rate:
    // many gains share the optimal bound but differ in how fast the error
    // transient dies.  Re-solving with the plant dynamics shifted to
    // A + alpha T selects, among near-optimal gains, one whose error decays
    // at rate alpha in the certified norm.  A certificate for the shifted
    // plant is also a certificate for the original one (the shift only
    // subtracts the PSD term 2 alpha T*PT from the state block), so the
    // refined bound remains valid; it is accepted when it stays within
    // decay_budget of the true optimum.
    H2Options ropts = opts;
    ropts.export_sdpa.clear();  // the exported SDP stays the optimal-bound program
    for (double alpha : {0.4, 0.2, 0.1, 0.05}) {
        PIESystem shifted = sys;
        shifted.A = sys.A + sys.T * alpha;
        ropts.degree = out.degree;
        ropts.max_degree = out.degree;
        SynthesisResult refined = synthesize_estimator_core(shifted, ropts);
        if (solved(refined.status) && refined.gamma <= opts.decay_budget * out.gamma)
            return refined;
    }
    return out;
}

namespace {

SynthesisResult synthesize_estimator_core(const PIESystem& sys, const H2Options& opts) {
    sys.validate();
    if (sys.ny() < 1)
        throw std::invalid_argument("synthesize_estimator: system has no measurement channel");
    const Domain dom = sys.domain();
    const int m = sys.m(), n = sys.n(), nw = sys.nw(), nz = sys.nz(), ny = sys.ny();
    SynthesisResult out;
    out.eps = opts.eps;
    const PIOperator D21op = PIOperator::from_matrix(sys.D21, dom);
    for (int d = opts.degree; d <= opts.max_degree; ++d) {
        LPIProgram prog(dom);
        prog.slack_degree_boost = d - opts.degree;
        prog.eq_relax = opts.eq_relax;
        prog.trace_reg = opts.trace_reg;
        const int g = prog.scalar();
        LPIVar P = prog.pos_pi(m, n, d, d);
        LPIVar Z = prog.free_pi(ny, 0, m, n, d);

        // [-gamma I, C1; C1*, T*PA + A*PT + T*ZC2 + C2*Z*T] <= -eps I
        const PIOperator Ez = embed_finite(nz, m, n, dom);
        const PIOperator Es = embed_state(nz, m, n, dom);
        const PIOperator Czs = Ez.compose(sys.C1).compose(Es.adjoint());
        PIExpr blk1 = prog.scaled(g, -Ez.compose(Ez.adjoint())) +
                      expr_const(Czs + Czs.adjoint()) +
                      lcompose(Es.compose(sys.T.adjoint()),
                               rcompose(prog.var(P), sys.A.compose(Es.adjoint()))) +
                      lcompose(Es.compose(sys.A.adjoint()),
                               rcompose(prog.var(P), sys.T.compose(Es.adjoint()))) +
                      lcompose(Es.compose(sys.T.adjoint()),
                               rcompose(prog.var(Z), sys.C2.compose(Es.adjoint()))) +
                      lcompose(Es.compose(sys.C2.adjoint()),
                               rcompose(prog.var_adjoint(Z), sys.T.compose(Es.adjoint())));
        // eps margin on the gamma corner; T*T-weighted margin on the state
        // block, where the compact factor T rules out a uniform -eps I.
        blk1 = std::move(blk1) +
               expr_const((Ez.compose(Ez.adjoint()) +
                           Es.compose(sys.T.adjoint()).compose(sys.T).compose(Es.adjoint())) *
                          opts.eps);
        prog.require_nsd(blk1, 0.0);

        // [W, B1*P + D21' Z*; P B1 + Z D21, P] >= eps I
        const PIOperator Fw = embed_finite(nw, m, n, dom);
        const PIOperator Fs = embed_state(nw, m, n, dom);
        PIExpr blk2 = zero_expr(nw + m, n, nw + m, n, dom);
        PIExpr wtr = zero_expr(nw, 0, nw, 0, dom);
        SymMatrixVar W = make_sym_var(prog, nw, Fw, blk2, wtr, dom);
        blk2 = std::move(blk2) +
               lcompose(Fw.compose(sys.B1.adjoint()),
                        rcompose(prog.var(P), Fs.adjoint())) +
               lcompose(Fs, rcompose(prog.var(P), sys.B1.compose(Fw.adjoint()))) +
               lcompose(Fw.compose(D21op.adjoint()),
                        rcompose(prog.var_adjoint(Z), Fs.adjoint())) +
               lcompose(Fs, rcompose(prog.var(Z), D21op.compose(Fw.adjoint()))) +
               lcompose(Fs, rcompose(prog.var(P), Fs.adjoint()));
        prog.require_psd(blk2, opts.eps);

        prog.require_psd(prog.var(P), opts.eps);
        prog.require_trace_le(wtr, g);
        prog.minimize({{g, 1.0}});

        LPIResult res = prog.solve(opts.sdp);
        if (!opts.export_sdpa.empty()) write_sdpa_sparse(opts.export_sdpa, prog.last_problem);
        out.status = res.status;
        out.iterations = res.iterations;
        out.degree = d;
        if (solved(res.status)) {
            out.gamma = res.scalars[g];
            out.P = res.operators[P.id];
            out.Z = res.operators[Z.id];
            out.W = W.value(res.scalars);
            double resid = 0.0;
            out.L = reconstruct_gain(out.P, out.Z, opts.inversion_tol, &resid);
            out.inversion_residual = resid;
            out.residual_warning = resid > opts.inversion_tol;
            return out;
        }
    }
    return out;
}

}  // namespace

ObserverGain reconstruct_gain(const PIOperator& P, const PIOperator& Z, double tol,
                              double* residual) {
    if (Z.n1() != 0)
        throw std::invalid_argument("reconstruct_gain: Z must map a finite input space");
    if (P.m1() != Z.m2() || P.n1() != Z.n2())
        throw std::invalid_argument("reconstruct_gain: P and Z shapes incompatible");
    InversionResult inv = invert_pi(P, 8, tol);
    const PIOperator L = inv.inverse.compose(Z);

    if (residual) {
        const PIOperator err = P.compose(L) - Z;
        const Domain dom = P.domain();
        double worst = 0.0;
        for (int k = 0; k < Z.m1(); ++k) {
            Vector e = Vector::Zero(Z.m1());
            e(k) = 1.0;
            RL2Function probe(e, PolyMatrix::zero(0, 1, dom));
            const double en = rl2_norm(err.apply(probe));
            const double zn = rl2_norm(Z.apply(probe));
            worst = std::max(worst, en / std::max(zn, 1e-12));
        }
        *residual = worst;
    }

    ObserverGain g;
    g.L1 = L.P();
    g.L2 = L.Q2();
    return g;
}

}  // namespace piekit
