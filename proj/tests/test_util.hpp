#ifndef PIEKIT_TEST_UTIL_HPP
#define PIEKIT_TEST_UTIL_HPP

#include <cmath>
#include <random>
#include <vector>

#include "piekit/pi_operator.hpp"
#include "piekit/poly.hpp"

namespace piekit::testutil {

// Gauss-Legendre nodes/weights on [a, b], computed by Newton iteration on
// the Legendre recurrence. Independent of the library's exact integration.
struct Quadrature {
    std::vector<double> nodes, weights;

    explicit Quadrature(int n, Domain dom) {
        nodes.resize(n);
        weights.resize(n);
        for (int i = 0; i < n; ++i) {
            double x = std::cos(M_PI * (i + 0.75) / (n + 0.5));
            double dp = 0.0;
            for (int it = 0; it < 100; ++it) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                dp = n * (x * p1 - p0) / (x * x - 1.0);
                double dx = p1 / dp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            nodes[i] = dom.a + 0.5 * (dom.b - dom.a) * (1.0 - x);
            weights[i] = (dom.b - dom.a) / ((1.0 - x * x) * dp * dp);
        }
    }

    template <typename F>
    double integrate(F&& f) const {
        double acc = 0.0;
        for (size_t i = 0; i < nodes.size(); ++i) acc += weights[i] * f(nodes[i]);
        return acc;
    }
};

inline PolyMatrix random_poly(std::mt19937& rng, int rows, int cols, int deg_s,
                              int deg_th, Domain dom) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_int_distribution<int> pick(0, 2);
    PolyMatrix p(rows, cols, VarSet::None, dom);
    for (int i = 0; i <= deg_s; ++i) {
        for (int j = 0; j <= deg_th; ++j) {
            if (pick(rng) == 0 && (i + j) > 0) continue;  // keep it sparse-ish
            Matrix m(rows, cols);
            for (int r = 0; r < rows; ++r)
                for (int c = 0; c < cols; ++c) m(r, c) = u(rng);
            p.add_coeff(i, j, m);
        }
    }
    return p;
}

inline PIOperator random_pi(std::mt19937& rng, int m1, int n1, int m2, int n2,
                            int deg, Domain dom) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Matrix P(m2, m1);
    for (int r = 0; r < m2; ++r)
        for (int c = 0; c < m1; ++c) P(r, c) = u(rng);
    return PIOperator(P, random_poly(rng, m2, n1, deg, 0, dom),
                      random_poly(rng, n2, m1, deg, 0, dom),
                      random_poly(rng, n2, n1, deg, 0, dom),
                      random_poly(rng, n2, n1, deg, deg, dom),
                      random_poly(rng, n2, n1, deg, deg, dom), dom);
}

inline RL2Function random_rl2(std::mt19937& rng, int m, int n, int deg, Domain dom) {
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    Vector f(m);
    for (int i = 0; i < m; ++i) f(i) = u(rng);
    return RL2Function(f, random_poly(rng, n, 1, deg, 0, dom));
}

// L2 inner product of two RL2 functions by quadrature (oracle path).
inline double ip_quad(const RL2Function& f, const RL2Function& g, const Quadrature& q) {
    double acc = f.m() > 0 ? f.finite.dot(g.finite) : 0.0;
    if (f.n() > 0) {
        acc += q.integrate([&](double s) {
            return (f.dist.eval(s).transpose() * g.dist.eval(s))(0, 0);
        });
    }
    return acc;
}

// Direct quadrature evaluation of the 4-PI defining formula at point s.
inline Vector apply_dist_quad(const PIOperator& op, const RL2Function& f, double s,
                              const Quadrature& q) {
    Vector out = Vector::Zero(op.n2());
    if (op.m1() > 0) out += op.Q2().eval(s) * f.finite;
    if (op.n1() > 0) {
        out += op.R0().eval(s) * f.dist.eval(s);
        Domain dom = op.domain();
        Quadrature qlo(q.nodes.size() ? static_cast<int>(q.nodes.size()) : 32,
                       Domain(dom.a, std::max(s, dom.a + 1e-12)));
        for (size_t i = 0; i < qlo.nodes.size(); ++i)
            out += qlo.weights[i] * op.R1().eval(s, qlo.nodes[i]) * f.dist.eval(qlo.nodes[i]);
        Quadrature qhi(static_cast<int>(q.nodes.size()), Domain(std::min(s, dom.b - 1e-12), dom.b));
        for (size_t i = 0; i < qhi.nodes.size(); ++i)
            out += qhi.weights[i] * op.R2().eval(s, qhi.nodes[i]) * f.dist.eval(qhi.nodes[i]);
    }
    return out;
}

}  // namespace piekit::testutil

#endif
