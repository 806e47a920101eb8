#ifndef PIEKIT_PI_OPERATOR_HPP
#define PIEKIT_PI_OPERATOR_HPP

#include "piekit/poly.hpp"

namespace piekit {

/// Element of R^m x L2^n[a,b]: a finite vector plus a distributed part,
/// stored here as an exact polynomial column.
struct RL2Function {
    Vector finite;    // length m
    PolyMatrix dist;  // n x 1 polynomial in s

    RL2Function() = default;
    RL2Function(Vector f, PolyMatrix d) : finite(std::move(f)), dist(std::move(d)) {}

    int m() const { return static_cast<int>(finite.size()); }
    int n() const { return dist.rows(); }
};

/// Inner product x1'y1 + <x2, y2>_L2, computed exactly for polynomial
/// distributed parts.
double inner_product(const RL2Function& f, const RL2Function& g);
double rl2_norm(const RL2Function& f);

/// Bounded linear operator on R^{m1} x L2^{n1}[a,b] -> R^{m2} x L2^{n2}[a,b]
/// parameterized by a matrix P, boundary kernels Q1, Q2, a multiplier R0 and
/// the two Volterra kernels R1 (theta < s) and R2 (theta > s):
///
///   (Op [x; f])(s) = [ P x + int_a^b Q1(th) f(th) dth ;
///                      Q2(s) x + R0(s) f(s)
///                        + int_a^s R1(s,th) f(th) dth
///                        + int_s^b R2(s,th) f(th) dth ]
///
/// Dimension-zero blocks are represented by empty matrices/polynomials.
class PIOperator {
  public:
    PIOperator() = default;
    PIOperator(int m1, int n1, int m2, int n2, Domain dom);
    PIOperator(Matrix P, PolyMatrix Q1, PolyMatrix Q2, PolyMatrix R0,
               PolyMatrix R1, PolyMatrix R2, Domain dom);

    static PIOperator identity(int m, int n, Domain dom);
    static PIOperator zero(int m1, int n1, int m2, int n2, Domain dom);
    /// Wraps a plain matrix as an operator on R^{m1} (n1 = n2 = 0).
    static PIOperator from_matrix(const Matrix& P, Domain dom);
    /// Multiplier operator (x, f) -> (x, R0 f) with no coupling.
    static PIOperator multiplier(const PolyMatrix& R0);

    int m1() const { return m1_; }
    int n1() const { return n1_; }
    int m2() const { return m2_; }
    int n2() const { return n2_; }
    Domain domain() const { return dom_; }

    const Matrix& P() const { return P_; }
    const PolyMatrix& Q1() const { return Q1_; }
    const PolyMatrix& Q2() const { return Q2_; }
    const PolyMatrix& R0() const { return R0_; }
    const PolyMatrix& R1() const { return R1_; }
    const PolyMatrix& R2() const { return R2_; }

    bool is_square() const { return m1_ == m2_ && n1_ == n2_; }
    bool is_zero() const;
    bool is_matrix_only() const { return n1_ == 0 && n2_ == 0; }

    RL2Function apply(const RL2Function& f) const;

    PIOperator operator+(const PIOperator& o) const;
    PIOperator operator-(const PIOperator& o) const;
    PIOperator operator-() const;
    PIOperator operator*(double c) const;
    bool operator==(const PIOperator& o) const;
    bool operator!=(const PIOperator& o) const { return !(*this == o); }

    /// Composition: (A.compose(B)).apply(f) == A.apply(B.apply(f)).
    PIOperator compose(const PIOperator& B) const;

    /// Adjoint with respect to the RL2 inner product.
    PIOperator adjoint() const;

    /// Max absolute coefficient over all blocks.
    double max_coeff() const;
    PIOperator truncated(double eps) const;

    /// Maximal polynomial degree over all blocks.
    int degree() const;

  private:
    void check_shapes() const;

    int m1_ = 0, n1_ = 0, m2_ = 0, n2_ = 0;
    Domain dom_;
    Matrix P_;         // m2 x m1
    PolyMatrix Q1_;    // m2 x n1 in s
    PolyMatrix Q2_;    // n2 x m1 in s
    PolyMatrix R0_;    // n2 x n1 in s
    PolyMatrix R1_;    // n2 x n1 in (s, theta)
    PolyMatrix R2_;    // n2 x n1 in (s, theta)
};

inline PIOperator operator*(double c, const PIOperator& op) { return op * c; }

/// Concatenation following the RL2 convention: real parts and distributed
/// parts are concatenated independently.
PIOperator vcat(const PIOperator& A, const PIOperator& B);
PIOperator hcat(const PIOperator& A, const PIOperator& B);
PIOperator blockdiag(const PIOperator& A, const PIOperator& B);

struct InversionResult {
    PIOperator inverse;
    double residual = 0.0;  // worst relative residual over the probe set
    int degree = 0;         // kernel degree actually used
};

/// Smallest eigenvalue of the Galerkin projection of a self-adjoint square
/// operator onto the orthonormal Legendre extended basis of the given degree.
/// Upper-bounds the infimum of the Rayleigh quotient; for matrix-only
/// operators the value is exact.
double min_eigenvalue_estimate(const PIOperator& op, int basis_degree);

/// Numerically inverts a self-adjoint coercive PI operator by Galerkin
/// projection onto an orthonormal Legendre basis followed by a least-squares
/// kernel fit. Escalates the kernel degree until the probe residual meets
/// tol; throws if the projected matrix is singular or tol cannot be met.
InversionResult invert_pi(const PIOperator& op, int basis_degree, double tol);

}  // namespace piekit

#endif
