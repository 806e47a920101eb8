#include "piekit/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <vector>

namespace piekit {

void SDProblem::add_entry(int i, int k, int r, int c, double v) {
    if (r > c) std::swap(r, c);
    if (v != 0.0) entries.push_back({i, k, r, c, v});
}

void SDProblem::validate() const {
    const int m = num_constraints();
    const int nb = static_cast<int>(block_sizes.size());
    if (static_cast<int>(C.size()) != nb)
        throw std::invalid_argument("SDProblem: one cost matrix per block required");
    for (int k = 0; k < nb; ++k)
        if (C[k].rows() != block_sizes[k] || C[k].cols() != block_sizes[k])
            throw std::invalid_argument("SDProblem: cost block size mismatch");
    if (num_free > 0 && (c_free.size() != num_free || G.rows() != m || G.cols() != num_free))
        throw std::invalid_argument("SDProblem: free-variable data size mismatch");
    for (const Entry& e : entries)
        if (e.constraint < 0 || e.constraint >= m || e.block < 0 || e.block >= nb ||
            e.row < 0 || e.col < e.row || e.col >= block_sizes[e.block])
            throw std::invalid_argument("SDProblem: entry out of range");
}

const char* to_string(SDPStatus s) {
    switch (s) {
        case SDPStatus::Optimal: return "optimal";
        case SDPStatus::Infeasible: return "infeasible";
        case SDPStatus::Unbounded: return "unbounded";
        case SDPStatus::IterationLimit: return "iteration_limit";
        case SDPStatus::NumericalError: return "numerical_error";
    }
    return "unknown";
}

namespace {

using BlockVec = std::vector<Matrix>;

struct ConstraintData {
    // Per block: sparse rows of vectorized constraint matrices (m x s*s).
    std::vector<Eigen::SparseMatrix<double, Eigen::RowMajor>> A;
};

Matrix sym(const Matrix& m) { return 0.5 * (m + m.transpose()); }

// A(X): <A_i, X> for every constraint, accumulated across blocks.
Vector apply_A(const ConstraintData& cd, const BlockVec& X, int m) {
    Vector out = Vector::Zero(m);
    for (size_t k = 0; k < X.size(); ++k) {
        Eigen::Map<const Vector> xv(X[k].data(), X[k].size());
        out += cd.A[k] * xv;
    }
    return out;
}

// A*(y): sum_i y_i A_{i,k} for each block.
BlockVec apply_At(const ConstraintData& cd, const Vector& y, const std::vector<int>& sizes) {
    BlockVec out(sizes.size());
    for (size_t k = 0; k < sizes.size(); ++k) {
        Vector v = cd.A[k].transpose() * y;
        out[k] = Eigen::Map<const Matrix>(v.data(), sizes[k], sizes[k]);
    }
    return out;
}

double block_dot(const BlockVec& a, const BlockVec& b) {
    double s = 0.0;
    for (size_t k = 0; k < a.size(); ++k) s += a[k].cwiseProduct(b[k]).sum();
    return s;
}

// NT scaling point: W with W S W = X.
Matrix nt_scaling(const Matrix& X, const Matrix& S) {
    Eigen::SelfAdjointEigenSolver<Matrix> ex(X);
    Matrix xh = ex.eigenvectors() *
                ex.eigenvalues().cwiseMax(1e-300).cwiseSqrt().asDiagonal() *
                ex.eigenvectors().transpose();
    Eigen::SelfAdjointEigenSolver<Matrix> em(sym(xh * S * xh));
    Matrix mih = em.eigenvectors() *
                 em.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse().asDiagonal() *
                 em.eigenvectors().transpose();
    return sym(xh * mih * xh);
}

// Largest alpha in (0, 1] with X + alpha*D staying PSD, damped by eta.
double max_step(const Matrix& X, const Matrix& D, double eta) {
    Eigen::LLT<Matrix> llt(X);
    if (llt.info() != Eigen::Success) return 0.0;
    Matrix L = llt.matrixL();
    Matrix T = L.triangularView<Eigen::Lower>().solve(D);
    Matrix T2 = L.triangularView<Eigen::Lower>().solve(T.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(sym(T2));
    double lmin = es.eigenvalues().minCoeff();
    if (lmin >= 0.0) return 1.0;
    return std::min(1.0, -eta / lmin);
}

struct Direction {
    BlockVec dX, dS;
    Vector dy, du;
};

}  // namespace

SDPSolution solve_sdp(const SDProblem& prob, const SDPOptions& opts) {
    prob.validate();
    const int m = prob.num_constraints();
    const int nb = static_cast<int>(prob.block_sizes.size());
    const int nf = prob.num_free;
    if (m == 0 || nb == 0) throw std::invalid_argument("solve_sdp: empty problem");

    // --- scaling: per-constraint row norms, global cost norm ---
    Vector row_scale = Vector::Zero(m);
    for (const SDProblem::Entry& e : prob.entries)
        row_scale(e.constraint) += (e.row == e.col ? 1.0 : 2.0) * e.value * e.value;
    Matrix Gd = nf > 0 ? Matrix(prob.G) : Matrix::Zero(m, 0);
    for (int i = 0; i < m; ++i)
        row_scale(i) = std::max(1e-8, std::sqrt(row_scale(i) + Gd.row(i).squaredNorm()));

    double cost_scale = 1e-8;
    for (int k = 0; k < nb; ++k) cost_scale = std::max(cost_scale, prob.C[k].norm());
    if (nf > 0) cost_scale = std::max(cost_scale, prob.c_free.norm());

    // --- scaled data ---
    ConstraintData cd;
    cd.A.resize(nb);
    {
        std::vector<std::vector<Eigen::Triplet<double>>> trip(nb);
        for (const SDProblem::Entry& e : prob.entries) {
            const int s = prob.block_sizes[e.block];
            const double v = e.value / row_scale(e.constraint);
            trip[e.block].emplace_back(e.constraint, e.col * s + e.row, v);
            if (e.row != e.col) trip[e.block].emplace_back(e.constraint, e.row * s + e.col, v);
        }
        for (int k = 0; k < nb; ++k) {
            cd.A[k].resize(m, prob.block_sizes[k] * prob.block_sizes[k]);
            cd.A[k].setFromTriplets(trip[k].begin(), trip[k].end());
        }
    }
    Vector b = prob.b.cwiseQuotient(row_scale);
    BlockVec C(nb);
    for (int k = 0; k < nb; ++k) C[k] = sym(prob.C[k]) / cost_scale;
    Vector cf = nf > 0 ? Vector(prob.c_free / cost_scale) : Vector();
    for (int i = 0; i < m; ++i) Gd.row(i) /= row_scale(i);

    // --- drop linearly dependent constraint rows (Gram-matrix rank test) ---
    int m_eff = m;
    {
        Matrix gram = Gd * Gd.transpose();
        for (int k = 0; k < nb; ++k) gram += Matrix(cd.A[k] * cd.A[k].transpose());
        Eigen::ColPivHouseholderQR<Matrix> qr(gram);
        qr.setThreshold(1e-10);
        const int rank = static_cast<int>(qr.rank());
        if (opts.verbose) std::printf("constraint rank %d of %d\n", rank, m);
        if (rank < m) {
            std::vector<int> keep(qr.colsPermutation().indices().data(),
                                  qr.colsPermutation().indices().data() + rank);
            std::sort(keep.begin(), keep.end());
            Eigen::SparseMatrix<double> sel(rank, m);
            sel.reserve(Eigen::VectorXi::Constant(rank, 1));
            for (int i = 0; i < rank; ++i) sel.insert(i, keep[i]) = 1.0;
            for (int k = 0; k < nb; ++k)
                cd.A[k] = (sel * cd.A[k]).eval();
            Vector bb(rank);
            Matrix gg(rank, Gd.cols());
            Vector rs(rank);
            for (int i = 0; i < rank; ++i) {
                bb(i) = b(keep[i]);
                gg.row(i) = Gd.row(keep[i]);
                rs(i) = row_scale(keep[i]);
            }
            b = bb;
            Gd = gg;
            row_scale = rs;
            m_eff = rank;
        }
    }
    const int mr = m_eff;

    // --- initial point ---
    double beta = std::max(1.0, b.cwiseAbs().maxCoeff());
    for (int k = 0; k < nb; ++k) beta = std::max(beta, C[k].cwiseAbs().maxCoeff());
    beta *= 10.0;
    BlockVec X(nb), S(nb);
    int cone_dim = 0;
    for (int k = 0; k < nb; ++k) {
        X[k] = beta * Matrix::Identity(prob.block_sizes[k], prob.block_sizes[k]);
        S[k] = X[k];
        cone_dim += prob.block_sizes[k];
    }
    Vector y = Vector::Zero(mr), u = Vector::Zero(nf);

    SDPSolution sol;
    sol.X.resize(nb);
    sol.S.resize(nb);

    auto finish = [&](SDPStatus st, int it) {
        sol.status = st;
        sol.iterations = it;
        for (int k = 0; k < nb; ++k) {
            sol.X[k] = X[k];
            sol.S[k] = cost_scale * S[k];
        }
        sol.y = cost_scale * y.cwiseQuotient(row_scale);
        sol.u = u;
        sol.primal_obj = cost_scale * (block_dot(C, X) + (nf > 0 ? cf.dot(u) : 0.0));
        sol.dual_obj = cost_scale * b.dot(y);
        sol.gap = std::abs(sol.primal_obj - sol.dual_obj) /
                  (1.0 + std::abs(sol.primal_obj) + std::abs(sol.dual_obj));
        return sol;
    };

    double prev_mu = std::numeric_limits<double>::infinity();
    int stall = 0;

    // best iterate so far, restored on non-optimal exit
    double best_err = std::numeric_limits<double>::infinity();
    BlockVec bX, bS;
    Vector by, bu;
    int best_it = 0;
    auto finish_best = [&](SDPStatus st, int it) {
        if (best_err < std::numeric_limits<double>::infinity()) {
            X = bX;
            S = bS;
            y = by;
            u = bu;
        }
        if (best_err < 1e-6) return finish(SDPStatus::Optimal, best_it);
        return finish(st, it);
    };

    for (int it = 0; it < opts.max_iterations; ++it) {
        // residuals
        Vector rp = b - apply_A(cd, X, mr);
        if (nf > 0) rp -= Gd * u;
        BlockVec Aty = apply_At(cd, y, prob.block_sizes);
        BlockVec Rd(nb);
        double rd_norm2 = 0.0;
        for (int k = 0; k < nb; ++k) {
            Rd[k] = C[k] - Aty[k] - S[k];
            rd_norm2 += Rd[k].squaredNorm();
        }
        Vector rf = nf > 0 ? Vector(cf - Gd.transpose() * y) : Vector();
        if (nf > 0) rd_norm2 += rf.squaredNorm();

        double mu = block_dot(X, S) / cone_dim;
        double pobj = block_dot(C, X) + (nf > 0 ? cf.dot(u) : 0.0);
        double dobj = b.dot(y);
        double relgap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj) + std::abs(dobj));
        double rel_rp = rp.norm() / (1.0 + b.norm());
        double rel_rd = std::sqrt(rd_norm2) / (1.0 + std::sqrt(nb * 1.0));

        if (opts.verbose)
            std::printf("it %3d  mu %.3e  gap %.3e  rp %.3e  rd %.3e\n", it, mu, relgap,
                        rel_rp, rel_rd);

        if (relgap < opts.tolerance && rel_rp < opts.tolerance && rel_rd < opts.tolerance)
            return finish(SDPStatus::Optimal, it);
        double err = std::max({relgap, rel_rp, rel_rd});
        if (err < best_err) {
            best_err = err;
            bX = X;
            bS = S;
            by = y;
            bu = u;
            best_it = it;
        }

        // infeasibility certificates
        double ynorm = y.norm();
        if (dobj > 1e-2 && ynorm > 1.0) {
            double viol = nf > 0 ? (Gd.transpose() * y).norm() : 0.0;
            double lmax = 0.0;
            for (int k = 0; k < nb; ++k) {
                Eigen::SelfAdjointEigenSolver<Matrix> es(Aty[k], Eigen::EigenvaluesOnly);
                if (es.eigenvalues().size() > 0)
                    lmax = std::max(lmax, es.eigenvalues().maxCoeff());
            }
            if ((lmax + viol) / dobj < 1e-9) return finish(SDPStatus::Infeasible, it);
        }
        if (pobj < -1e-2) {
            Vector ax = apply_A(cd, X, mr);
            if (nf > 0) ax += Gd * u;
            if (ax.norm() / -pobj < 1e-9) return finish(SDPStatus::Unbounded, it);
        }
        if (ynorm > 1e13 || mu > 1e14 || !std::isfinite(mu))
            return finish_best(SDPStatus::NumericalError, it);

        if (mu > 0.9999 * prev_mu) {
            if (++stall > 12) return finish_best(SDPStatus::NumericalError, it);
        } else {
            stall = 0;
        }
        prev_mu = mu;

        // NT scaling and Schur complement  M_ij = sum_k <A_i, W A_j W>
        BlockVec W(nb);
        Matrix M = Matrix::Zero(mr, mr);
        for (int k = 0; k < nb; ++k) {
            W[k] = nt_scaling(X[k], S[k]);
            const int s = prob.block_sizes[k];
            Matrix AtyD(mr, s * s);  // row i = vec(W A_i W)
            Matrix Ai(s, s);
            for (int i = 0; i < mr; ++i) {
                Vector row = cd.A[k].row(i).transpose();
                Ai = Eigen::Map<const Matrix>(row.data(), s, s);
                Matrix WAW = W[k] * Ai * W[k];
                AtyD.row(i) = Eigen::Map<const Vector>(WAW.data(), s * s).transpose();
            }
            M.noalias() += Matrix(cd.A[k] * AtyD.transpose());
        }
        M = sym(M);
        M.diagonal().array() += 1e-13 * (1.0 + M.diagonal().cwiseAbs().maxCoeff());

        Eigen::LLT<Matrix> Mllt(M);
        if (Mllt.info() != Eigen::Success) return finish_best(SDPStatus::NumericalError, it);

        Matrix MiG;
        Eigen::LLT<Matrix> Ullt;
        if (nf > 0) {
            MiG = Mllt.solve(Gd);
            Matrix U = Gd.transpose() * MiG;
            U = sym(U);
            U.diagonal().array() += 1e-13 * (1.0 + U.diagonal().cwiseAbs().maxCoeff());
            Ullt.compute(U);
            if (Ullt.info() != Eigen::Success) return finish_best(SDPStatus::NumericalError, it);
        }

        auto solve_dir = [&](double sigma) {
            Direction d;
            // complementarity RHS: Rc = sigma*mu*S^{-1} - X
            BlockVec Rc(nb);
            Vector h = rp;
            for (int k = 0; k < nb; ++k) {
                Rc[k] = -X[k];
                if (sigma > 0.0) {
                    Eigen::LLT<Matrix> sll(S[k]);
                    Rc[k] += sigma * mu *
                             sll.solve(Matrix::Identity(X[k].rows(), X[k].rows()));
                    Rc[k] = sym(Rc[k]);
                }
            }
            BlockVec WRdW(nb);
            for (int k = 0; k < nb; ++k) WRdW[k] = sym(W[k] * Rd[k] * W[k]);
            h -= apply_A(cd, Rc, mr);
            h += apply_A(cd, WRdW, mr);

            if (nf > 0) {
                Vector t = Mllt.solve(h);
                d.du = Ullt.solve(Gd.transpose() * t - rf);
                d.dy = Mllt.solve(h - Gd * d.du);
                // iterative refinement of the bordered system
                for (int ref = 0; ref < 2; ++ref) {
                    Vector r1 = h - M * d.dy - Gd * d.du;
                    Vector r2 = rf - Gd.transpose() * d.dy;
                    Vector t1 = Mllt.solve(r1);
                    Vector e2 = Ullt.solve(Gd.transpose() * t1 - r2);
                    Vector e1 = Mllt.solve(r1 - Gd * e2);
                    d.dy += e1;
                    d.du += e2;
                }
            } else {
                d.dy = Mllt.solve(h);
                for (int ref = 0; ref < 2; ++ref)
                    d.dy += Mllt.solve(h - M * d.dy);
            }
            BlockVec Atdy = apply_At(cd, d.dy, prob.block_sizes);
            d.dS.resize(nb);
            d.dX.resize(nb);
            for (int k = 0; k < nb; ++k) {
                d.dS[k] = Rd[k] - Atdy[k];
                d.dX[k] = sym(Rc[k] - W[k] * d.dS[k] * W[k]);
            }
            return d;
        };

        auto step_lengths = [&](const Direction& d, double eta) {
            double ap = 1.0, ad = 1.0;
            for (int k = 0; k < nb; ++k) {
                ap = std::min(ap, max_step(X[k], d.dX[k], eta));
                ad = std::min(ad, max_step(S[k], d.dS[k], eta));
            }
            return std::pair<double, double>(ap, ad);
        };

        // predictor
        Direction aff = solve_dir(0.0);
        auto [apa, ada] = step_lengths(aff, 1.0);
        double mu_aff = 0.0;
        for (int k = 0; k < nb; ++k)
            mu_aff += (X[k] + apa * aff.dX[k]).cwiseProduct(S[k] + ada * aff.dS[k]).sum();
        mu_aff = std::max(0.0, mu_aff / cone_dim);
        double sigma = std::pow(mu_aff / mu, 3.0);
        sigma = std::min(1.0, std::max(1e-6, sigma));

        // corrector (same factorization, centered target)
        Direction dir = solve_dir(sigma);
        auto [ap, ad] = step_lengths(dir, 0.98);
        if (opts.verbose)
            std::printf("        sigma %.2e  ap %.3e  ad %.3e  |dX| %.2e  |dy| %.2e\n",
                        sigma, ap, ad, dir.dX[0].norm(), dir.dy.norm());
        if (ap < 1e-10 && ad < 1e-10) return finish_best(SDPStatus::NumericalError, it);

        for (int k = 0; k < nb; ++k) {
            X[k] = sym(X[k] + ap * dir.dX[k]);
            S[k] = sym(S[k] + ad * dir.dS[k]);
        }
        y += ad * dir.dy;
        if (nf > 0) u += ap * dir.du;
    }
    return finish_best(SDPStatus::IterationLimit, opts.max_iterations);
}

}  // namespace piekit
