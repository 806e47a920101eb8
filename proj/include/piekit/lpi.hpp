#ifndef PIEKIT_LPI_HPP
#define PIEKIT_LPI_HPP

#include <string>
#include <utility>
#include <vector>

#include "piekit/pi_operator.hpp"
#include "piekit/sdp.hpp"

namespace piekit {

/// Handle to a PI-operator decision variable of an LPIProgram.
struct LPIVar {
    int id = -1;
};

/// One affine term: coef * Left o V o Right (V possibly adjointed).
struct PIExprTerm {
    int var = -1;
    bool adjoint = false;
    bool has_left = false, has_right = false;
    PIOperator left, right;
    double coef = 1.0;
};

/// Operator-valued affine expression in the decision variables: a constant
/// plus composed variable terms plus scalar-variable multiples of fixed
/// operators.
struct PIExpr {
    Domain dom{0.0, 1.0};
    int m1 = 0, n1 = 0, m2 = 0, n2 = 0;
    bool has_constant = false;
    PIOperator constant;
    std::vector<PIExprTerm> terms;
    std::vector<std::pair<int, PIOperator>> scalar_ops;
};

PIExpr expr_const(const PIOperator& op);
PIExpr operator+(PIExpr a, const PIExpr& b);
PIExpr operator-(PIExpr a, const PIExpr& b);
PIExpr operator-(const PIExpr& e);
PIExpr operator*(double c, PIExpr e);
PIExpr lcompose(const PIOperator& L, PIExpr e);
PIExpr rcompose(PIExpr e, const PIOperator& R);
PIExpr adjoint(PIExpr e);

struct LPIResult {
    SDPStatus status = SDPStatus::NumericalError;
    double objective = 0.0;
    int iterations = 0;
    std::vector<double> scalars;       // indexed by scalar id
    std::vector<PIOperator> operators; // indexed by LPIVar id
};

/// Linear program over PI operators: positive-operator and free-operator
/// variables, operator equality / semidefiniteness constraints, linear
/// scalar objective. Compiles to a semidefinite program.
class LPIProgram {
public:
    explicit LPIProgram(Domain dom) : dom_(dom) {}

    /// Free scalar decision variable; returns its id.
    int scalar();

    /// Self-adjoint positive semidefinite PI operator on RL2^{m,n},
    /// parameterized as Z* M Z with M PSD. d1 bounds the multiplier
    /// monomials, d2 the integral kernel monomials.
    LPIVar pos_pi(int m, int n, int d1, int d2);

    /// Free PI operator RL2^{m1,n1} -> RL2^{m2,n2} with kernel degree <= d.
    LPIVar free_pi(int m1, int n1, int m2, int n2, int d);

    PIExpr var(LPIVar v) const;
    PIExpr var_adjoint(LPIVar v) const;
    /// scalar_id * op as an expression term.
    PIExpr scaled(int scalar_id, const PIOperator& op) const;

    void require_zero(const PIExpr& e);
    /// e <= -eps I  (a fresh positive-operator slack absorbs the gap)
    void require_nsd(const PIExpr& e, double eps);
    /// e >= eps I
    void require_psd(const PIExpr& e, double eps);
    /// trace of the finite block of e (a map R^k -> R^k) <= scalar_id
    void require_trace_le(const PIExpr& e, int scalar_id);

    void minimize(std::vector<std::pair<int, double>> objective);

    /// Extra degree added to auto-sized inequality slacks (escalation knob).
    int slack_degree_boost = 0;

    /// Width of the soft-equality relaxation (0 keeps exact equalities).
    /// Kernel matching can leave the exact feasible set with no interior;
    /// a small relaxation makes the compiled SDP strictly feasible at the
    /// cost of an O(eq_relax) perturbation of the optimum.
    double eq_relax = 0.0;

    /// Trace regularization added to every cone block's objective.
    /// Lyapunov-type programs admit zero-cost rays (any stability
    /// certificate can be added to the storage operator for free), which
    /// leave the optimal set unbounded and the dual without an interior;
    /// a tiny trace cost bounds the solution set and restores it.
    double trace_reg = 0.0;

    SDProblem compile();
    LPIResult solve(const SDPOptions& opts = {});

    /// The SDP produced by the most recent solve(), kept for export.
    SDProblem last_problem;

    int num_scalars() const { return num_scalars_; }

private:
    struct PosVar {
        int m, n, d1, d2;
        std::vector<PIOperator> rows;  // Z rows, each RL2^{m,n} -> L2^1
        int sdp_block = -1;
    };
    struct FreeCoeff {
        int blk, r, c, i, j;  // blk: 0=P 1=Q1 2=Q2 3=R0 4=R1 5=R2
    };
    struct FreeVar {
        int m1, n1, m2, n2, d;
        std::vector<FreeCoeff> coeffs;
        int u_offset = -1;
    };
    struct VarSlot {
        bool positive;
        int index;  // into pos_ or free_
    };
    struct Inequality {
        PIExpr expr;  // constrained to be <= -eps I (after sign folding)
        double eps;
    };
    struct TraceCon {
        PIExpr expr;
        int scalar_id;
    };

    PIOperator free_coeff_op(const FreeVar& v, const FreeCoeff& c) const;

    Domain dom_;
    int num_scalars_ = 0;
    std::vector<VarSlot> vars_;
    std::vector<PosVar> pos_;
    std::vector<FreeVar> free_;
    std::vector<PIExpr> equalities_;
    std::vector<Inequality> inequalities_;
    std::vector<TraceCon> traces_;
    std::vector<std::pair<int, double>> objective_;
    // filled by compile(), consumed by solve()
    std::vector<int> scalar_u_;
    bool trivially_infeasible_ = false;
};

}  // namespace piekit

#endif
