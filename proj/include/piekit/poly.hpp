#ifndef PIEKIT_POLY_HPP
#define PIEKIT_POLY_HPP

#include <Eigen/Dense>
#include <map>
#include <stdexcept>
#include <string>
#include <utility>

namespace piekit {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

/// Variable set of a polynomial matrix: constant, univariate in s, or
/// bivariate in (s, theta).
enum class VarSet { None, S, STheta };

/// Interval [a, b] on which a polynomial (and everything built from it)
/// lives. Mixing domains is an error everywhere in the toolkit.
struct Domain {
    double a = 0.0;
    double b = 1.0;

    Domain() = default;
    Domain(double lo, double hi) : a(lo), b(hi) {
        if (!(lo < hi)) throw std::invalid_argument("Domain: need a < b");
    }
    bool operator==(const Domain& o) const { return a == o.a && b == o.b; }
    bool operator!=(const Domain& o) const { return !(*this == o); }
    double length() const { return b - a; }
};

/// Integration ranges for the theta variable, matching the three kernels of
/// a 4-PI operator.
enum class IntKind { ThetaFromAToS, ThetaFromSToB, ThetaFromAToB };

/// Bound of a kernel convolution integral: a domain endpoint or one of the
/// two outer variables.
enum class Bound { DomainLo, DomainHi, S, Theta };

/// Matrix with real-polynomial entries in s or (s, theta) on a fixed
/// interval. Coefficients are stored per monomial (s^i theta^j) as dense
/// matrices; all-zero coefficient matrices are pruned so that structural
/// equality coincides with mathematical equality.
class PolyMatrix {
  public:
    using Key = std::pair<int, int>;  // (s exponent, theta exponent)
    using CoeffMap = std::map<Key, Matrix>;

    static constexpr int kDegreeCap = 64;

    PolyMatrix() = default;
    PolyMatrix(int rows, int cols, VarSet vars, Domain dom);

    /// Constant matrix polynomial.
    static PolyMatrix constant(const Matrix& m, Domain dom);
    static PolyMatrix zero(int rows, int cols, Domain dom);
    /// Scalar monomial c * s^i * theta^j.
    static PolyMatrix monomial(double c, int i, int j, Domain dom);
    /// Monomial with matrix coefficient.
    static PolyMatrix monomial(const Matrix& m, int i, int j, Domain dom);

    int rows() const { return rows_; }
    int cols() const { return cols_; }
    VarSet vars() const { return vars_; }
    Domain domain() const { return dom_; }
    const CoeffMap& coeffs() const { return coeffs_; }
    bool is_zero() const { return coeffs_.empty(); }
    bool is_empty() const { return rows_ == 0 || cols_ == 0; }

    /// Highest exponent over both variables; 0 for the zero polynomial.
    int degree() const;
    int degree_s() const;
    int degree_theta() const;

    /// Coefficient of s^i theta^j (zero matrix if absent).
    Matrix coeff(int i, int j) const;
    void set_coeff(int i, int j, const Matrix& m);
    void add_coeff(int i, int j, const Matrix& m);

    PolyMatrix operator+(const PolyMatrix& o) const;
    PolyMatrix operator-(const PolyMatrix& o) const;
    PolyMatrix operator*(const PolyMatrix& o) const;
    PolyMatrix operator*(double c) const;
    PolyMatrix operator-() const;
    bool operator==(const PolyMatrix& o) const;
    bool operator!=(const PolyMatrix& o) const { return !(*this == o); }

    PolyMatrix transpose() const;

    /// Definite integral over theta with the stated limits. Input must
    /// depend on theta at most; result depends on s at most.
    PolyMatrix integrate(IntKind kind) const;

    /// Definite integral of a univariate (s) polynomial over [a, b].
    Matrix integrate_s_full() const;

    /// Substitute var := alpha + beta_s * s + beta_th * theta.
    PolyMatrix substitute_s(double alpha, double beta_s, double beta_th) const;
    PolyMatrix substitute_theta(double alpha, double beta_s, double beta_th) const;

    /// Exchange the roles of s and theta.
    PolyMatrix swap_vars() const;

    Matrix eval(double s, double theta = 0.0) const;

    /// Drop coefficient matrices whose max-norm is below eps.
    PolyMatrix truncated(double eps) const;

    /// Throws if any exponent exceeds the degree cap. Enforced on operator
    /// composition results, where symbolic blowup could otherwise run away.
    void check_degree_cap() const;

    std::string to_string() const;

  private:
    void prune();
    void normalize_vars();

    int rows_ = 0, cols_ = 0;
    VarSet vars_ = VarSet::None;
    Domain dom_;
    CoeffMap coeffs_;
};

inline PolyMatrix operator*(double c, const PolyMatrix& p) { return p * c; }

/// Exact integral over [a, b] of the univariate product A(s) * B(s),
/// accumulated directly so intermediate degrees are not materialized.
Matrix integral_of_product(const PolyMatrix& A, const PolyMatrix& B);

/// Computes integral over eta of A(s, eta) * B(eta, theta), where eta is
/// A's theta-slot and B's s-slot, between the given bounds. Bounds S and
/// Theta refer to the surviving outer variables of A and B respectively.
PolyMatrix convolve(const PolyMatrix& A, const PolyMatrix& B, Bound lo, Bound hi);

/// Stacks/concatenates polynomial matrices (dimension-zero arguments allowed).
PolyMatrix vstack(const PolyMatrix& top, const PolyMatrix& bottom);
PolyMatrix hstack(const PolyMatrix& left, const PolyMatrix& right);

}  // namespace piekit

#endif
