#include "piekit/lpi.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

namespace piekit {

namespace {

void check_same_shape(const PIExpr& a, const PIExpr& b) {
    if (a.m1 != b.m1 || a.n1 != b.n1 || a.m2 != b.m2 || a.n2 != b.n2 || a.dom != b.dom)
        throw std::invalid_argument("PIExpr: shape mismatch");
}

}  // namespace

PIExpr expr_const(const PIOperator& op) {
    PIExpr e;
    e.dom = op.domain();
    e.m1 = op.m1();
    e.n1 = op.n1();
    e.m2 = op.m2();
    e.n2 = op.n2();
    e.has_constant = true;
    e.constant = op;
    return e;
}

PIExpr operator+(PIExpr a, const PIExpr& b) {
    check_same_shape(a, b);
    if (b.has_constant) {
        a.constant = a.has_constant ? a.constant + b.constant : b.constant;
        a.has_constant = true;
    }
    a.terms.insert(a.terms.end(), b.terms.begin(), b.terms.end());
    a.scalar_ops.insert(a.scalar_ops.end(), b.scalar_ops.begin(), b.scalar_ops.end());
    return a;
}

PIExpr operator*(double c, PIExpr e) {
    if (e.has_constant) e.constant = e.constant * c;
    for (PIExprTerm& t : e.terms) t.coef *= c;
    for (auto& [id, op] : e.scalar_ops) op = op * c;
    return e;
}

PIExpr operator-(const PIExpr& e) { return -1.0 * PIExpr(e); }

PIExpr operator-(PIExpr a, const PIExpr& b) { return std::move(a) + (-b); }

PIExpr lcompose(const PIOperator& L, PIExpr e) {
    if (L.m1() != e.m2 || L.n1() != e.n2 || L.domain() != e.dom)
        throw std::invalid_argument("lcompose: shape mismatch");
    if (e.has_constant) e.constant = L.compose(e.constant);
    for (PIExprTerm& t : e.terms) {
        t.left = t.has_left ? L.compose(t.left) : L;
        t.has_left = true;
    }
    for (auto& [id, op] : e.scalar_ops) op = L.compose(op);
    e.m2 = L.m2();
    e.n2 = L.n2();
    return e;
}

PIExpr rcompose(PIExpr e, const PIOperator& R) {
    if (e.m1 != R.m2() || e.n1 != R.n2() || R.domain() != e.dom)
        throw std::invalid_argument("rcompose: shape mismatch");
    if (e.has_constant) e.constant = e.constant.compose(R);
    for (PIExprTerm& t : e.terms) {
        t.right = t.has_right ? t.right.compose(R) : R;
        t.has_right = true;
    }
    for (auto& [id, op] : e.scalar_ops) op = op.compose(R);
    e.m1 = R.m1();
    e.n1 = R.n1();
    return e;
}

PIExpr adjoint(PIExpr e) {
    if (e.has_constant) e.constant = e.constant.adjoint();
    for (PIExprTerm& t : e.terms) {
        PIOperator new_left = t.has_right ? t.right.adjoint() : PIOperator();
        PIOperator new_right = t.has_left ? t.left.adjoint() : PIOperator();
        std::swap(t.has_left, t.has_right);
        t.left = new_left;
        t.right = new_right;
        t.adjoint = !t.adjoint;
    }
    for (auto& [id, op] : e.scalar_ops) op = op.adjoint();
    std::swap(e.m1, e.m2);
    std::swap(e.n1, e.n2);
    return e;
}

int LPIProgram::scalar() { return num_scalars_++; }

LPIVar LPIProgram::pos_pi(int m, int n, int d1, int d2) {
    PosVar pv{m, n, d1, d2, {}, -1};
    const double invsq = 1.0 / std::sqrt(dom_.length());
    auto thin = [&](const Matrix& P, const PolyMatrix& q2, const PolyMatrix& r0,
                    const PolyMatrix& r1, const PolyMatrix& r2) {
        return PIOperator(P, PolyMatrix(0, n, VarSet::None, dom_), q2, r0, r1, r2, dom_);
    };
    PolyMatrix zq2(1, m, VarSet::None, dom_), zrow(1, n, VarSet::None, dom_);
    for (int k = 0; k < m; ++k) {
        PolyMatrix q2 = zq2;
        Matrix e = Matrix::Zero(1, m);
        e(0, k) = invsq;
        q2.add_coeff(0, 0, e);
        pv.rows.push_back(thin(Matrix::Zero(0, m), q2, zrow, zrow, zrow));
    }
    for (int c = 0; c < n; ++c) {
        Matrix e = Matrix::Zero(1, n);
        e(0, c) = 1.0;
        for (int p = 0; p <= d1; ++p) {
            PolyMatrix r0 = zrow;
            r0.add_coeff(p, 0, e);
            pv.rows.push_back(thin(Matrix::Zero(0, m), zq2, r0, zrow, zrow));
        }
        for (int p = 0; p <= d2; ++p)
            for (int q = 0; q <= d2; ++q) {
                PolyMatrix ker = zrow;
                ker.add_coeff(p, q, e);
                pv.rows.push_back(thin(Matrix::Zero(0, m), zq2, zrow, ker, zrow));
                pv.rows.push_back(thin(Matrix::Zero(0, m), zq2, zrow, zrow, ker));
            }
    }
    vars_.push_back({true, static_cast<int>(pos_.size())});
    pos_.push_back(std::move(pv));
    return LPIVar{static_cast<int>(vars_.size()) - 1};
}

LPIVar LPIProgram::free_pi(int m1, int n1, int m2, int n2, int d) {
    FreeVar fv{m1, n1, m2, n2, d, {}, -1};
    for (int r = 0; r < m2; ++r)
        for (int c = 0; c < m1; ++c) fv.coeffs.push_back({0, r, c, 0, 0});
    for (int r = 0; r < m2; ++r)
        for (int c = 0; c < n1; ++c)
            for (int i = 0; i <= d; ++i) fv.coeffs.push_back({1, r, c, i, 0});
    for (int r = 0; r < n2; ++r)
        for (int c = 0; c < m1; ++c)
            for (int i = 0; i <= d; ++i) fv.coeffs.push_back({2, r, c, i, 0});
    for (int r = 0; r < n2; ++r)
        for (int c = 0; c < n1; ++c)
            for (int i = 0; i <= d; ++i) fv.coeffs.push_back({3, r, c, i, 0});
    for (int r = 0; r < n2; ++r)
        for (int c = 0; c < n1; ++c)
            for (int i = 0; i <= d; ++i)
                for (int j = 0; j <= d; ++j) {
                    fv.coeffs.push_back({4, r, c, i, j});
                    fv.coeffs.push_back({5, r, c, i, j});
                }
    vars_.push_back({false, static_cast<int>(free_.size())});
    free_.push_back(std::move(fv));
    return LPIVar{static_cast<int>(vars_.size()) - 1};
}

PIOperator LPIProgram::free_coeff_op(const FreeVar& v, const FreeCoeff& c) const {
    Matrix P = Matrix::Zero(v.m2, v.m1);
    PolyMatrix Q1(v.m2, v.n1, VarSet::None, dom_), Q2(v.n2, v.m1, VarSet::None, dom_);
    PolyMatrix R0(v.n2, v.n1, VarSet::None, dom_), R1 = R0, R2 = R0;
    auto unit = [&](PolyMatrix& p, int rows, int cols) {
        Matrix e = Matrix::Zero(rows, cols);
        e(c.r, c.c) = 1.0;
        p.add_coeff(c.i, c.j, e);
    };
    switch (c.blk) {
        case 0: P(c.r, c.c) = 1.0; break;
        case 1: unit(Q1, v.m2, v.n1); break;
        case 2: unit(Q2, v.n2, v.m1); break;
        case 3: unit(R0, v.n2, v.n1); break;
        case 4: unit(R1, v.n2, v.n1); break;
        case 5: unit(R2, v.n2, v.n1); break;
    }
    return PIOperator(P, Q1, Q2, R0, R1, R2, dom_);
}

PIExpr LPIProgram::var(LPIVar v) const {
    if (v.id < 0 || v.id >= static_cast<int>(vars_.size()))
        throw std::invalid_argument("LPIProgram::var: bad handle");
    PIExpr e;
    e.dom = dom_;
    const VarSlot& slot = vars_[v.id];
    if (slot.positive) {
        const PosVar& pv = pos_[slot.index];
        e.m1 = e.m2 = pv.m;
        e.n1 = e.n2 = pv.n;
    } else {
        const FreeVar& fv = free_[slot.index];
        e.m1 = fv.m1;
        e.n1 = fv.n1;
        e.m2 = fv.m2;
        e.n2 = fv.n2;
    }
    PIExprTerm t;
    t.var = v.id;
    e.terms.push_back(t);
    return e;
}

PIExpr LPIProgram::var_adjoint(LPIVar v) const { return piekit::adjoint(var(v)); }

PIExpr LPIProgram::scaled(int scalar_id, const PIOperator& op) const {
    if (scalar_id < 0 || scalar_id >= num_scalars_)
        throw std::invalid_argument("LPIProgram::scaled: bad scalar id");
    PIExpr e = expr_const(op);
    e.has_constant = false;
    e.constant = PIOperator();
    e.scalar_ops.emplace_back(scalar_id, op);
    return e;
}

void LPIProgram::require_zero(const PIExpr& e) { equalities_.push_back(e); }

void LPIProgram::require_nsd(const PIExpr& e, double eps) {
    if (e.m1 != e.m2 || e.n1 != e.n2)
        throw std::invalid_argument("require_nsd: expression must be square");
    inequalities_.push_back({e, eps});
}

void LPIProgram::require_psd(const PIExpr& e, double eps) { require_nsd(-e, eps); }

void LPIProgram::require_trace_le(const PIExpr& e, int scalar_id) {
    if (e.n1 != 0 || e.n2 != 0 || e.m1 != e.m2)
        throw std::invalid_argument("require_trace_le: need a square finite-block map");
    traces_.push_back({e, scalar_id});
}

void LPIProgram::minimize(std::vector<std::pair<int, double>> objective) {
    objective_ = std::move(objective);
}

namespace {

// Row identity: constraint instance + block kind + entry + monomial.
struct RowKey {
    int con, blk, r, c, i, j;
    bool operator<(const RowKey& o) const {
        return std::tie(con, blk, r, c, i, j) < std::tie(o.con, o.blk, o.r, o.c, o.i, o.j);
    }
};

// Column identity: free (u) column, or entry (i <= j) of a PSD block.
struct ColKey {
    int type;  // 0 = free column, 1 = PSD matrix entry
    int u = 0, block = 0, i = 0, j = 0;
    bool operator<(const ColKey& o) const {
        return std::tie(type, u, block, i, j) < std::tie(o.type, o.u, o.block, o.i, o.j);
    }
};

using RowMap = std::map<RowKey, std::map<ColKey, double>>;

struct Assembler {
    RowMap rows;
    std::map<RowKey, double> rhs;

    void add(const RowKey& rk, const ColKey* col, double v) {
        if (col)
            rows[rk][*col] += v;
        else {
            rows[rk];  // materialize the row
            rhs[rk] += v;
        }
    }

    void scatter_poly(int con, int blk, const PolyMatrix& p, const ColKey* col, double w,
                      bool upper_only) {
        for (const auto& [key, mat] : p.coeffs())
            for (int r = 0; r < p.rows(); ++r)
                for (int c = 0; c < p.cols(); ++c) {
                    if (mat(r, c) == 0.0 || (upper_only && r > c)) continue;
                    add(RowKey{con, blk, r, c, key.first, key.second}, col, w * mat(r, c));
                }
    }

    // For self-adjoint constraints the lower triangle of P and R0, all of
    // Q2, and all of R2 mirror rows that are already emitted, so they are
    // skipped to keep the constraint set full-rank.
    void scatter(int con, const PIOperator& op, const ColKey* col, double w,
                 bool self_adjoint) {
        for (int r = 0; r < op.m2(); ++r)
            for (int c = 0; c < op.m1(); ++c) {
                if (op.P()(r, c) == 0.0 || (self_adjoint && r > c)) continue;
                add(RowKey{con, 0, r, c, 0, 0}, col, w * op.P()(r, c));
            }
        scatter_poly(con, 1, op.Q1(), col, w, false);
        if (!self_adjoint) scatter_poly(con, 2, op.Q2(), col, w, false);
        scatter_poly(con, 3, op.R0(), col, w, self_adjoint);
        scatter_poly(con, 4, op.R1(), col, w, false);
        if (!self_adjoint) scatter_poly(con, 5, op.R2(), col, w, false);
    }
};

int max_kernel_degree(const PIOperator& op) {
    int d = 0;
    for (const PolyMatrix* p : {&op.Q1(), &op.Q2(), &op.R0(), &op.R1(), &op.R2()})
        for (const auto& [k, m] : p->coeffs()) d = std::max({d, k.first, k.second});
    return d;
}

// Degree of the multiplier part, or -1 when the operator has none.
int r0_degree(const PIOperator& op) {
    int d = -1;
    for (const auto& [k, m] : op.R0().coeffs()) d = std::max(d, k.first);
    return d;
}

// Slack degrees for an inequality.  Match positive-variable terms by basis
// structure (a slack sharing the variable's row basis yields a strictly
// feasible interior point); fall back to inverting the kernel-degree bounds
// for everything else.  The multiplier degree is tracked separately via the
// reachable R0 degree: multiplier parts multiply under composition, so a
// term contributes R0 only when every factor has one.  A slack multiplier
// row the expression can never reach is forced to a zero Gram row, which
// pins the slack to the PSD boundary and destroys the interior; when no
// term reaches R0 at all the slack gets no multiplier rows (r0max = -1
// maps to d1 = -1, an empty multiplier loop).
struct Degrees {
    int r0max = -1, d2 = 0;
    void absorb_basis(int vd1, int vd2, const PIOperator* left, const PIOperator* right) {
        int extra = 0;
        if (left) extra = std::max(extra, max_kernel_degree(*left));
        if (right) extra = std::max(extra, max_kernel_degree(*right));
        d2 = std::max(d2, vd2 + extra);
        int r0 = 2 * vd1;
        if (left) {
            const int dl = r0_degree(*left);
            if (dl < 0) return;
            r0 += dl;
        }
        if (right) {
            const int dr = r0_degree(*right);
            if (dr < 0) return;
            r0 += dr;
        }
        r0max = std::max(r0max, r0);
    }
    void absorb_kernels(const PIOperator& op) {
        int bi = 0;
        for (const PolyMatrix* p : {&op.Q1(), &op.Q2(), &op.R1(), &op.R2()})
            for (const auto& [k, m] : p->coeffs()) bi = std::max({bi, k.first, k.second});
        r0max = std::max(r0max, r0_degree(op));
        d2 = std::max(d2, bi / 2);
    }
};

}  // namespace

SDProblem LPIProgram::compile() {
    trivially_infeasible_ = false;

    // --- materialize every constraint as (column, operator) contributions ---
    struct Contribution {
        ColKey col;
        PIOperator op;
    };
    struct Materialized {
        std::vector<Contribution> parts;
        PIOperator constant;
        bool has_constant = false;
        bool is_trace = false;
        bool self_adjoint = false;
        int trace_scalar = -1;
    };

    // Column layout: scalars first, then free-operator coefficients.
    scalar_u_.resize(num_scalars_);
    int u_count = 0;
    for (int s = 0; s < num_scalars_; ++s) scalar_u_[s] = u_count++;
    for (FreeVar& fv : free_) {
        fv.u_offset = u_count;
        u_count += static_cast<int>(fv.coeffs.size());
    }

    auto materialize_expr = [&](const PIExpr& e, Materialized& out) {
        if (e.has_constant) {
            out.constant = out.has_constant ? out.constant + e.constant : e.constant;
            out.has_constant = true;
        }
        for (const auto& [scalar_id, op] : e.scalar_ops)
            out.parts.push_back({ColKey{0, scalar_u_[scalar_id]}, op});
        for (const PIExprTerm& t : e.terms) {
            const VarSlot& slot = vars_[t.var];
            if (slot.positive) {
                const PosVar& pv = pos_[slot.index];
                const int N = static_cast<int>(pv.rows.size());
                std::vector<PIOperator> lrows(N), rrows(N);
                for (int i = 0; i < N; ++i) {
                    lrows[i] = t.has_left ? pv.rows[i].compose(t.left.adjoint()) : pv.rows[i];
                    rrows[i] = t.has_right ? pv.rows[i].compose(t.right) : pv.rows[i];
                }
                for (int i = 0; i < N; ++i)
                    for (int j = i; j < N; ++j) {
                        PIOperator op = lrows[i].adjoint().compose(rrows[j]);
                        if (i != j) op = op + lrows[j].adjoint().compose(rrows[i]);
                        op = op * t.coef;
                        if (op.is_zero()) continue;
                        out.parts.push_back({ColKey{1, 0, pv.sdp_block, i, j}, op});
                    }
            } else {
                const FreeVar& fv = free_[slot.index];
                for (size_t ci = 0; ci < fv.coeffs.size(); ++ci) {
                    PIOperator op = free_coeff_op(fv, fv.coeffs[ci]);
                    if (t.adjoint) op = op.adjoint();
                    if (t.has_left) op = t.left.compose(op);
                    if (t.has_right) op = op.compose(t.right);
                    op = op * t.coef;
                    if (op.is_zero()) continue;
                    out.parts.push_back(
                        {ColKey{0, fv.u_offset + static_cast<int>(ci)}, op});
                }
            }
        }
    };

    // PSD block layout: declared positive vars first; inequality slacks and
    // trace slacks are appended as we go.
    std::vector<int> block_sizes;
    for (PosVar& pv : pos_) {
        pv.sdp_block = static_cast<int>(block_sizes.size());
        block_sizes.push_back(static_cast<int>(pv.rows.size()));
    }

    std::vector<Materialized> cons;
    for (const PIExpr& e : equalities_) {
        Materialized m;
        materialize_expr(e, m);
        cons.push_back(std::move(m));
    }
    for (const Inequality& iq : inequalities_) {
        // expr + eps I + slack = 0 with a fresh positive-operator slack
        Materialized m;
        m.self_adjoint = true;
        materialize_expr(iq.expr, m);
        Degrees deg;
        for (const PIExprTerm& t : iq.expr.terms) {
            const VarSlot& slot = vars_[t.var];
            if (slot.positive) {
                const PosVar& pv = pos_[slot.index];
                deg.absorb_basis(pv.d1, pv.d2, t.has_left ? &t.left : nullptr,
                                 t.has_right ? &t.right : nullptr);
            } else {
                const FreeVar& fv = free_[slot.index];
                for (const FreeCoeff& fc : fv.coeffs) {
                    PIOperator op = free_coeff_op(fv, fc);
                    if (t.adjoint) op = op.adjoint();
                    if (t.has_left) op = t.left.compose(op);
                    if (t.has_right) op = op.compose(t.right);
                    deg.absorb_kernels(op);
                }
            }
        }
        for (const auto& [id, op] : iq.expr.scalar_ops) deg.absorb_kernels(op);
        if (m.has_constant) deg.absorb_kernels(m.constant);
        if (iq.eps != 0.0) deg.r0max = std::max(deg.r0max, 0);
        const int d1 = deg.r0max < 0 ? -1 : deg.r0max / 2 + slack_degree_boost;
        const int d2 = deg.d2 + slack_degree_boost;
        LPIVar sv = pos_pi(iq.expr.m2, iq.expr.n2, d1, d2);
        PosVar& pv = pos_[vars_[sv.id].index];
        pv.sdp_block = static_cast<int>(block_sizes.size());
        block_sizes.push_back(static_cast<int>(pv.rows.size()));
        materialize_expr(var(sv), m);
        if (iq.eps != 0.0) {
            PIOperator shift =
                PIOperator::identity(iq.expr.m2, iq.expr.n2, dom_) * iq.eps;
            m.constant = m.has_constant ? m.constant + shift : shift;
            m.has_constant = true;
        }
        cons.push_back(std::move(m));
    }
    for (const TraceCon& tc : traces_) {
        Materialized m;
        materialize_expr(tc.expr, m);
        m.is_trace = true;
        m.trace_scalar = tc.scalar_id;
        cons.push_back(std::move(m));
    }

    // --- assemble rows ---
    Assembler as;
    std::vector<std::map<ColKey, double>> trace_rows;
    std::vector<double> trace_rhs;
    for (size_t ci = 0; ci < cons.size(); ++ci) {
        const Materialized& m = cons[ci];
        if (!m.is_trace) {
            for (const Contribution& p : m.parts)
                as.scatter(static_cast<int>(ci), p.op, &p.col, 1.0, m.self_adjoint);
            if (m.has_constant)
                as.scatter(static_cast<int>(ci), m.constant, nullptr, 1.0, m.self_adjoint);
        } else {
            // tr(P) + t - s = 0,  t >= 0 in its own 1x1 block
            std::map<ColKey, double> row;
            double rhs = 0.0;
            for (const Contribution& p : m.parts) {
                double tr = p.op.P().trace();
                if (tr != 0.0) row[p.col] += tr;
            }
            if (m.has_constant) rhs -= m.constant.P().trace();
            int blk = static_cast<int>(block_sizes.size());
            block_sizes.push_back(1);
            row[ColKey{1, 0, blk, 0, 0}] += 1.0;
            row[ColKey{0, scalar_u_[m.trace_scalar]}] -= 1.0;
            trace_rows.push_back(std::move(row));
            trace_rhs.push_back(rhs);
        }
    }

    // --- emit the SDP ---
    SDProblem prob;
    prob.block_sizes = block_sizes;
    for (int s : block_sizes) prob.C.push_back(Matrix::Zero(s, s));
    prob.num_free = u_count;
    prob.c_free = Vector::Zero(u_count);
    for (const auto& [sid, w] : objective_) prob.c_free(scalar_u_[sid]) = w;

    std::vector<std::pair<const std::map<ColKey, double>*, double>> all_rows;
    for (const auto& [rk, cols] : as.rows) {
        double b = 0.0;
        auto it = as.rhs.find(rk);
        if (it != as.rhs.end()) b = -it->second;
        bool empty = true;
        for (const auto& [ck, v] : cols)
            if (std::abs(v) > 1e-14) empty = false;
        if (empty) {
            if (std::abs(b) > 1e-10) trivially_infeasible_ = true;
            continue;
        }
        all_rows.push_back({&cols, b});
    }
    for (size_t i = 0; i < trace_rows.size(); ++i)
        all_rows.push_back({&trace_rows[i], trace_rhs[i]});

    // Interior-point form needs at least one cone block; pin a scalar slack
    // to 1 when the program is purely over free variables.
    bool need_pin = prob.block_sizes.empty();
    if (need_pin) {
        prob.block_sizes.push_back(1);
        prob.C.push_back(Matrix::Zero(1, 1));
    }

    // Soft equalities: row i becomes A_i x + eq_relax*(u_i - v_i) = b_i with
    // penalized u_i, v_i >= 0.  Kernel-coefficient matching can pin the
    // operator slacks to the PSD boundary (the exact feasible set has empty
    // interior); the relaxation restores a strictly feasible point while the
    // unit penalty keeps residuals at the 1/penalty-dual level.
    int relax_base = -1;
    const int nar = static_cast<int>(all_rows.size());
    if (eq_relax > 0.0 && nar > 0) {
        relax_base = static_cast<int>(prob.block_sizes.size());
        for (int i = 0; i < 2 * nar; ++i) {
            prob.block_sizes.push_back(1);
            prob.C.push_back(Matrix::Constant(1, 1, 1.0));
        }
    }

    const int m = static_cast<int>(all_rows.size()) + (need_pin ? 1 : 0);
    prob.b = Vector::Zero(m);
    std::vector<Eigen::Triplet<double>> gtrip;
    if (need_pin) {
        prob.b(m - 1) = 1.0;
        prob.add_entry(m - 1, static_cast<int>(prob.block_sizes.size()) - 1, 0, 0, 1.0);
    }
    for (int i = 0; i < static_cast<int>(all_rows.size()); ++i) {
        prob.b(i) = all_rows[i].second;
        if (relax_base >= 0) {
            prob.add_entry(i, relax_base + 2 * i, 0, 0, eq_relax);
            prob.add_entry(i, relax_base + 2 * i + 1, 0, 0, -eq_relax);
        }
        for (const auto& [ck, v] : *all_rows[i].first) {
            if (v == 0.0) continue;
            if (ck.type == 0)
                gtrip.emplace_back(i, ck.u, v);
            else
                prob.add_entry(i, ck.block, ck.i, ck.j, ck.i == ck.j ? v : 0.5 * v);
        }
    }
    prob.G.resize(m, u_count);
    prob.G.setFromTriplets(gtrip.begin(), gtrip.end());
    if (trace_reg > 0.0)
        for (size_t k = 0; k < prob.C.size(); ++k)
            prob.C[k] += trace_reg * Matrix::Identity(prob.C[k].rows(), prob.C[k].cols());
    return prob;
}

LPIResult LPIProgram::solve(const SDPOptions& opts) {
    SDProblem prob = compile();
    last_problem = prob;
    LPIResult res;
    if (trivially_infeasible_) {
        res.status = SDPStatus::Infeasible;
        return res;
    }
    SDPSolution sol = solve_sdp(prob, opts);
    res.status = sol.status;
    res.iterations = sol.iterations;
    res.scalars.resize(num_scalars_, 0.0);
    if (sol.u.size() > 0)
        for (int s = 0; s < num_scalars_; ++s) res.scalars[s] = sol.u(scalar_u_[s]);
    res.objective = 0.0;
    for (const auto& [sid, w] : objective_) res.objective += w * res.scalars[sid];

    res.operators.resize(vars_.size());
    if (sol.status == SDPStatus::Optimal || sol.status == SDPStatus::IterationLimit) {
        for (size_t v = 0; v < vars_.size(); ++v) {
            const VarSlot& slot = vars_[v];
            if (slot.positive) {
                const PosVar& pv = pos_[slot.index];
                const Matrix& M = sol.X[pv.sdp_block];
                const int N = static_cast<int>(pv.rows.size());
                PIOperator acc = PIOperator::zero(pv.m, pv.n, pv.m, pv.n, dom_);
                std::vector<PIOperator> adj(N);
                for (int i = 0; i < N; ++i) adj[i] = pv.rows[i].adjoint();
                for (int i = 0; i < N; ++i)
                    for (int j = 0; j < N; ++j) {
                        if (M(i, j) == 0.0) continue;
                        acc = acc + adj[i].compose(pv.rows[j]) * M(i, j);
                    }
                res.operators[v] = acc.truncated(0.0);
            } else {
                const FreeVar& fv = free_[slot.index];
                PIOperator acc = PIOperator::zero(fv.m1, fv.n1, fv.m2, fv.n2, dom_);
                for (size_t ci = 0; ci < fv.coeffs.size(); ++ci) {
                    double val = sol.u(fv.u_offset + static_cast<int>(ci));
                    if (val != 0.0)
                        acc = acc + free_coeff_op(fv, fv.coeffs[ci]) * val;
                }
                res.operators[v] = acc;
            }
        }
    }
    return res;
}

}  // namespace piekit
