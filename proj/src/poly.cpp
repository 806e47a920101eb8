#include "piekit/poly.hpp"

#include <cmath>
#include <sstream>

namespace piekit {

namespace {

double ipow(double x, int e) {
    double r = 1.0;
    for (int k = 0; k < e; ++k) r *= x;
    return r;
}

VarSet join_vars(VarSet a, VarSet b) {
    if (a == VarSet::STheta || b == VarSet::STheta) return VarSet::STheta;
    if (a == VarSet::S || b == VarSet::S) return VarSet::S;
    return VarSet::None;
}

}  // namespace

PolyMatrix::PolyMatrix(int rows, int cols, VarSet vars, Domain dom)
    : rows_(rows), cols_(cols), vars_(vars), dom_(dom) {
    if (rows < 0 || cols < 0) throw std::invalid_argument("PolyMatrix: negative dims");
}

PolyMatrix PolyMatrix::constant(const Matrix& m, Domain dom) {
    PolyMatrix p(static_cast<int>(m.rows()), static_cast<int>(m.cols()), VarSet::None, dom);
    p.set_coeff(0, 0, m);
    return p;
}

PolyMatrix PolyMatrix::zero(int rows, int cols, Domain dom) {
    return PolyMatrix(rows, cols, VarSet::None, dom);
}

PolyMatrix PolyMatrix::monomial(double c, int i, int j, Domain dom) {
    Matrix m(1, 1);
    m(0, 0) = c;
    return monomial(m, i, j, dom);
}

PolyMatrix PolyMatrix::monomial(const Matrix& m, int i, int j, Domain dom) {
    VarSet v = j > 0 ? VarSet::STheta : (i > 0 ? VarSet::S : VarSet::None);
    PolyMatrix p(static_cast<int>(m.rows()), static_cast<int>(m.cols()), v, dom);
    p.set_coeff(i, j, m);
    return p;
}

int PolyMatrix::degree() const {
    int d = 0;
    for (const auto& [k, m] : coeffs_) d = std::max({d, k.first, k.second});
    return d;
}

int PolyMatrix::degree_s() const {
    int d = 0;
    for (const auto& [k, m] : coeffs_) d = std::max(d, k.first);
    return d;
}

int PolyMatrix::degree_theta() const {
    int d = 0;
    for (const auto& [k, m] : coeffs_) d = std::max(d, k.second);
    return d;
}

Matrix PolyMatrix::coeff(int i, int j) const {
    auto it = coeffs_.find({i, j});
    if (it == coeffs_.end()) return Matrix::Zero(rows_, cols_);
    return it->second;
}

void PolyMatrix::set_coeff(int i, int j, const Matrix& m) {
    if (m.rows() != rows_ || m.cols() != cols_)
        throw std::invalid_argument("PolyMatrix::set_coeff: shape mismatch");
    if (m.isZero(0.0)) {
        coeffs_.erase({i, j});
    } else {
        coeffs_[{i, j}] = m;
    }
    normalize_vars();
}

void PolyMatrix::add_coeff(int i, int j, const Matrix& m) {
    if (m.rows() != rows_ || m.cols() != cols_)
        throw std::invalid_argument("PolyMatrix::add_coeff: shape mismatch");
    auto it = coeffs_.find({i, j});
    if (it == coeffs_.end()) {
        if (!m.isZero(0.0)) coeffs_[{i, j}] = m;
    } else {
        it->second += m;
        if (it->second.isZero(0.0)) coeffs_.erase(it);
    }
    normalize_vars();
}

void PolyMatrix::prune() {
    for (auto it = coeffs_.begin(); it != coeffs_.end();) {
        if (it->second.isZero(0.0))
            it = coeffs_.erase(it);
        else
            ++it;
    }
    normalize_vars();
}

void PolyMatrix::normalize_vars() {
    bool has_s = false, has_th = false;
    for (const auto& [k, m] : coeffs_) {
        if (k.first > 0) has_s = true;
        if (k.second > 0) has_th = true;
    }
    vars_ = has_th ? VarSet::STheta : (has_s ? VarSet::S : VarSet::None);
}

void PolyMatrix::check_degree_cap() const {
    for (const auto& [k, m] : coeffs_) {
        if (k.first > kDegreeCap || k.second > kDegreeCap)
            throw std::runtime_error("PolyMatrix: degree cap " +
                                     std::to_string(kDegreeCap) + " exceeded");
    }
}

PolyMatrix PolyMatrix::operator+(const PolyMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_)
        throw std::invalid_argument("PolyMatrix::add: dimension mismatch");
    if (dom_ != o.dom_) throw std::invalid_argument("PolyMatrix::add: domain mismatch");
    PolyMatrix r(rows_, cols_, join_vars(vars_, o.vars_), dom_);
    r.coeffs_ = coeffs_;
    for (const auto& [k, m] : o.coeffs_) {
        auto it = r.coeffs_.find(k);
        if (it == r.coeffs_.end())
            r.coeffs_[k] = m;
        else
            it->second += m;
    }
    r.prune();
    return r;
}

PolyMatrix PolyMatrix::operator-(const PolyMatrix& o) const { return *this + (-o); }

PolyMatrix PolyMatrix::operator-() const {
    PolyMatrix r(rows_, cols_, vars_, dom_);
    for (const auto& [k, m] : coeffs_) r.coeffs_[k] = -m;
    return r;
}

PolyMatrix PolyMatrix::operator*(double c) const {
    PolyMatrix r(rows_, cols_, vars_, dom_);
    if (c == 0.0) return r;
    for (const auto& [k, m] : coeffs_) r.coeffs_[k] = c * m;
    return r;
}

PolyMatrix PolyMatrix::operator*(const PolyMatrix& o) const {
    if (cols_ != o.rows_)
        throw std::invalid_argument("PolyMatrix::mul: dimension mismatch");
    if (dom_ != o.dom_) throw std::invalid_argument("PolyMatrix::mul: domain mismatch");
    PolyMatrix r(rows_, o.cols_, join_vars(vars_, o.vars_), dom_);
    for (const auto& [ka, ma] : coeffs_) {
        for (const auto& [kb, mb] : o.coeffs_) {
            Key k{ka.first + kb.first, ka.second + kb.second};
            Matrix prod = ma * mb;
            auto it = r.coeffs_.find(k);
            if (it == r.coeffs_.end())
                r.coeffs_[k] = prod;
            else
                it->second += prod;
        }
    }
    r.prune();
    return r;
}

bool PolyMatrix::operator==(const PolyMatrix& o) const {
    if (rows_ != o.rows_ || cols_ != o.cols_ || dom_ != o.dom_) return false;
    if (coeffs_.size() != o.coeffs_.size()) return false;
    for (const auto& [k, m] : coeffs_) {
        auto it = o.coeffs_.find(k);
        if (it == o.coeffs_.end() || it->second != m) return false;
    }
    return true;
}

PolyMatrix PolyMatrix::transpose() const {
    PolyMatrix r(cols_, rows_, vars_, dom_);
    for (const auto& [k, m] : coeffs_) r.coeffs_[k] = m.transpose();
    return r;
}

PolyMatrix PolyMatrix::integrate(IntKind kind) const {
    PolyMatrix r(rows_, cols_, VarSet::S, dom_);
    for (const auto& [k, m] : coeffs_) {
        const int i = k.first, j = k.second;
        const double inv = 1.0 / (j + 1);
        // antiderivative in theta: m * s^i * theta^{j+1} / (j+1)
        switch (kind) {
            case IntKind::ThetaFromAToS:
                r.add_coeff(i + j + 1, 0, inv * m);
                r.add_coeff(i, 0, -inv * ipow(dom_.a, j + 1) * m);
                break;
            case IntKind::ThetaFromSToB:
                r.add_coeff(i, 0, inv * ipow(dom_.b, j + 1) * m);
                r.add_coeff(i + j + 1, 0, -inv * m);
                break;
            case IntKind::ThetaFromAToB:
                r.add_coeff(i, 0, inv * (ipow(dom_.b, j + 1) - ipow(dom_.a, j + 1)) * m);
                break;
        }
    }
    r.prune();
    return r;
}

Matrix PolyMatrix::integrate_s_full() const {
    if (degree_theta() > 0)
        throw std::invalid_argument("integrate_s_full: polynomial depends on theta");
    Matrix acc = Matrix::Zero(rows_, cols_);
    for (const auto& [k, m] : coeffs_) {
        const int i = k.first;
        acc += m * ((ipow(dom_.b, i + 1) - ipow(dom_.a, i + 1)) / (i + 1));
    }
    return acc;
}

namespace {

// Expands (alpha + beta_s * s + beta_th * theta)^e into a coefficient map.
void affine_power(double alpha, double beta_s, double beta_th, int e,
                  std::map<std::pair<int, int>, double>& out) {
    out.clear();
    out[{0, 0}] = 1.0;
    for (int k = 0; k < e; ++k) {
        std::map<std::pair<int, int>, double> next;
        for (const auto& [key, c] : out) {
            if (alpha != 0.0) next[{key.first, key.second}] += c * alpha;
            if (beta_s != 0.0) next[{key.first + 1, key.second}] += c * beta_s;
            if (beta_th != 0.0) next[{key.first, key.second + 1}] += c * beta_th;
        }
        out = std::move(next);
    }
}

}  // namespace

PolyMatrix PolyMatrix::substitute_s(double alpha, double beta_s, double beta_th) const {
    PolyMatrix r(rows_, cols_, VarSet::None, dom_);
    std::map<std::pair<int, int>, double> pw;
    for (const auto& [k, m] : coeffs_) {
        affine_power(alpha, beta_s, beta_th, k.first, pw);
        for (const auto& [pk, c] : pw)
            if (c != 0.0) r.add_coeff(pk.first, pk.second + k.second, c * m);
    }
    r.prune();
    return r;
}

PolyMatrix PolyMatrix::substitute_theta(double alpha, double beta_s, double beta_th) const {
    PolyMatrix r(rows_, cols_, VarSet::None, dom_);
    std::map<std::pair<int, int>, double> pw;
    for (const auto& [k, m] : coeffs_) {
        affine_power(alpha, beta_s, beta_th, k.second, pw);
        for (const auto& [pk, c] : pw)
            if (c != 0.0) r.add_coeff(pk.first + k.first, pk.second, c * m);
    }
    r.prune();
    return r;
}

PolyMatrix PolyMatrix::swap_vars() const {
    PolyMatrix r(rows_, cols_, vars_, dom_);
    for (const auto& [k, m] : coeffs_) r.coeffs_[{k.second, k.first}] = m;
    r.normalize_vars();
    return r;
}

Matrix PolyMatrix::eval(double s, double theta) const {
    const double tol = 1e-12 * (1.0 + std::abs(dom_.a) + std::abs(dom_.b));
    if (s < dom_.a - tol || s > dom_.b + tol)
        throw std::domain_error("PolyMatrix::eval: s outside domain");
    if (vars_ == VarSet::STheta && (theta < dom_.a - tol || theta > dom_.b + tol))
        throw std::domain_error("PolyMatrix::eval: theta outside domain");
    Matrix acc = Matrix::Zero(rows_, cols_);
    for (const auto& [k, m] : coeffs_) acc += m * (ipow(s, k.first) * ipow(theta, k.second));
    return acc;
}

PolyMatrix PolyMatrix::truncated(double eps) const {
    PolyMatrix r(rows_, cols_, vars_, dom_);
    for (const auto& [k, m] : coeffs_) {
        if (m.cwiseAbs().maxCoeff() > eps) {
            Matrix clean = m;
            for (int i = 0; i < clean.rows(); ++i)
                for (int j = 0; j < clean.cols(); ++j)
                    if (std::abs(clean(i, j)) <= eps) clean(i, j) = 0.0;
            r.coeffs_[k] = clean;
        }
    }
    r.normalize_vars();
    return r;
}

std::string PolyMatrix::to_string() const {
    std::ostringstream os;
    os << rows_ << "x" << cols_ << " on [" << dom_.a << "," << dom_.b << "]";
    for (const auto& [k, m] : coeffs_) {
        os << "\n  s^" << k.first << " th^" << k.second << ":";
        for (int i = 0; i < m.rows(); ++i) {
            os << " [";
            for (int j = 0; j < m.cols(); ++j) os << (j ? ", " : "") << m(i, j);
            os << "]";
        }
    }
    return os.str();
}

Matrix integral_of_product(const PolyMatrix& A, const PolyMatrix& B) {
    if (A.cols() != B.rows()) throw std::invalid_argument("integral_of_product: dimension mismatch");
    if (A.domain() != B.domain()) throw std::invalid_argument("integral_of_product: domain mismatch");
    if (A.degree_theta() > 0 || B.degree_theta() > 0)
        throw std::invalid_argument("integral_of_product: inputs must be univariate");
    const Domain dom = A.domain();
    Matrix acc = Matrix::Zero(A.rows(), B.cols());
    for (const auto& [ka, ma] : A.coeffs()) {
        for (const auto& [kb, mb] : B.coeffs()) {
            const int p = ka.first + kb.first;
            acc += (ma * mb) * ((std::pow(dom.b, p + 1) - std::pow(dom.a, p + 1)) / (p + 1));
        }
    }
    return acc;
}

PolyMatrix convolve(const PolyMatrix& A, const PolyMatrix& B, Bound lo, Bound hi) {
    if (A.cols() != B.rows()) throw std::invalid_argument("convolve: dimension mismatch");
    if (A.domain() != B.domain()) throw std::invalid_argument("convolve: domain mismatch");
    const Domain dom = A.domain();
    PolyMatrix r(A.rows(), B.cols(), VarSet::None, dom);

    auto accumulate = [&](Bound bound, double sign, const Matrix& m, int si, int tj, int p) {
        // term: m * s^si * theta^tj * eta^{p} evaluated with eta := bound
        switch (bound) {
            case Bound::DomainLo:
                r.add_coeff(si, tj, sign * std::pow(dom.a, p) * m);
                break;
            case Bound::DomainHi:
                r.add_coeff(si, tj, sign * std::pow(dom.b, p) * m);
                break;
            case Bound::S:
                r.add_coeff(si + p, tj, sign * m);
                break;
            case Bound::Theta:
                r.add_coeff(si, tj + p, sign * m);
                break;
        }
    };

    for (const auto& [ka, ma] : A.coeffs()) {
        for (const auto& [kb, mb] : B.coeffs()) {
            // A term: s^{ka.i} eta^{ka.j}; B term: eta^{kb.i} theta^{kb.j}
            const int p = ka.second + kb.first;
            Matrix prod = (ma * mb) / (p + 1);
            if (prod.isZero(0.0)) continue;
            accumulate(hi, 1.0, prod, ka.first, kb.second, p + 1);
            accumulate(lo, -1.0, prod, ka.first, kb.second, p + 1);
        }
    }
    return r.truncated(0.0);
}

PolyMatrix vstack(const PolyMatrix& top, const PolyMatrix& bottom) {
    if (top.cols() != bottom.cols() && top.rows() > 0 && bottom.rows() > 0)
        throw std::invalid_argument("vstack: column mismatch");
    if (top.rows() == 0) return bottom;
    if (bottom.rows() == 0) return top;
    if (top.domain() != bottom.domain()) throw std::invalid_argument("vstack: domain mismatch");
    PolyMatrix r(top.rows() + bottom.rows(), top.cols(), VarSet::None, top.domain());
    for (const auto& [k, m] : top.coeffs()) {
        Matrix big = Matrix::Zero(r.rows(), r.cols());
        big.topRows(top.rows()) = m;
        r.add_coeff(k.first, k.second, big);
    }
    for (const auto& [k, m] : bottom.coeffs()) {
        Matrix big = Matrix::Zero(r.rows(), r.cols());
        big.bottomRows(bottom.rows()) = m;
        r.add_coeff(k.first, k.second, big);
    }
    return r;
}

PolyMatrix hstack(const PolyMatrix& left, const PolyMatrix& right) {
    if (left.rows() != right.rows() && left.cols() > 0 && right.cols() > 0)
        throw std::invalid_argument("hstack: row mismatch");
    if (left.cols() == 0) return right;
    if (right.cols() == 0) return left;
    if (left.domain() != right.domain()) throw std::invalid_argument("hstack: domain mismatch");
    PolyMatrix r(left.rows(), left.cols() + right.cols(), VarSet::None, left.domain());
    for (const auto& [k, m] : left.coeffs()) {
        Matrix big = Matrix::Zero(r.rows(), r.cols());
        big.leftCols(left.cols()) = m;
        r.add_coeff(k.first, k.second, big);
    }
    for (const auto& [k, m] : right.coeffs()) {
        Matrix big = Matrix::Zero(r.rows(), r.cols());
        big.rightCols(right.cols()) = m;
        r.add_coeff(k.first, k.second, big);
    }
    return r;
}

}  // namespace piekit
