#ifndef PIEKIT_SDP_HPP
#define PIEKIT_SDP_HPP

#include <Eigen/Sparse>
#include <vector>

#include "piekit/poly.hpp"

namespace piekit {

/// Semidefinite program in standard primal form
///   minimize   sum_k <C_k, X_k> + c_free . u
///   subject to sum_k tr(A_{i,k} X_k) + (G u)_i = b_i,   i = 1..m
///              X_k >= 0 (symmetric PSD blocks),  u free.
struct SDProblem {
    std::vector<int> block_sizes;
    std::vector<Matrix> C;  // one symmetric matrix per block
    Vector b;
    int num_free = 0;
    Vector c_free;                   // length num_free
    Eigen::SparseMatrix<double> G;   // m x num_free

    /// One nonzero of a constraint matrix A_{i,k}; (row, col) with row <= col
    /// describes the symmetric pair of entries.
    struct Entry {
        int constraint, block, row, col;
        double value;
    };
    std::vector<Entry> entries;

    int num_constraints() const { return static_cast<int>(b.size()); }
    void add_entry(int i, int k, int r, int c, double v);
    void validate() const;
};

enum class SDPStatus { Optimal, Infeasible, Unbounded, IterationLimit, NumericalError };

const char* to_string(SDPStatus s);

struct SDPSolution {
    SDPStatus status = SDPStatus::NumericalError;
    double primal_obj = 0.0, dual_obj = 0.0;
    double gap = 0.0, primal_residual = 0.0, dual_residual = 0.0;
    int iterations = 0;
    std::vector<Matrix> X;
    std::vector<Matrix> S;
    Vector y;
    Vector u;
};

struct SDPOptions {
    int max_iterations = 120;
    double tolerance = 1e-8;
    bool verbose = false;
};

SDPSolution solve_sdp(const SDProblem& prob, const SDPOptions& opts = {});

}  // namespace piekit

#endif
