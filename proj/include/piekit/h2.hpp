#ifndef PIEKIT_H2_HPP
#define PIEKIT_H2_HPP

#include <string>

#include "piekit/lpi.hpp"
#include "piekit/pie_system.hpp"

namespace piekit {

/// Knobs shared by the norm-bounding and synthesis programs.
struct H2Options {
    int degree = 2;              // initial kernel degree of operator variables
    int max_degree = 4;          // degree-escalation cap on infeasibility
    double eps = 1e-4;           // coercivity / strictness margin
    double inversion_tol = 1e-4; // relative residual accepted for P^{-1}
    double eq_relax = 1e-4;      // soft-equality width (see LPIProgram::eq_relax)
    double trace_reg = 1e-6;     // cone trace cost (see LPIProgram::trace_reg)
    /// The soft-equality relaxation caps the reachable accuracy near 1e-6;
    /// demanding more reports spurious failures on solved programs.
    SDPOptions sdp{/*max_iterations=*/200, /*tolerance=*/1e-5, /*verbose=*/false};
    /// When nonempty, the compiled SDP of the final attempt is written here
    /// in SDPA sparse format.
    std::string export_sdpa;
    /// Estimator synthesis only: after the optimal bound gamma* is found,
    /// re-solve with the dynamics shifted to A + alpha T and keep the gain
    /// of the largest alpha whose (still valid) bound stays within
    /// decay_budget * gamma*.  This picks a fast-decaying gain from the
    /// degenerate optimal face at a small certified-bound premium.
    bool decay_refine = true;
    double decay_budget = 1.045;
};

/// A solved H2-norm bound: gamma together with the storage operator that
/// certifies it.  W is empty for the gramian-form program.
struct NormCertificate {
    SDPStatus status = SDPStatus::NumericalError;
    double gamma = 0.0;
    double eps = 0.0;
    int degree = 0;  // operator-variable degree of the successful attempt
    PIOperator P;
    Matrix W;
    int iterations = 0;
};

/// A solved estimator design: the bound, the certifying operators, and the
/// reconstructed observer gain L = P^{-1} Z.
struct SynthesisResult {
    SDPStatus status = SDPStatus::NumericalError;
    double gamma = 0.0;
    double eps = 0.0;
    int degree = 0;
    PIOperator P;
    PIOperator Z;
    Matrix W;
    ObserverGain L;
    double inversion_residual = 0.0;
    bool residual_warning = false;
    int iterations = 0;
};

/// Diagnostic comparison of the two sides of the operator Schur complement
/// equivalence: [P Q*; Q R] >= eps I versus {P >= eps I and
/// R - Q* P^{-1} Q >= eps I}, evaluated by Galerkin eigenvalue estimates.
struct SchurReport {
    bool block_psd = false;
    bool p_coercive = false;
    bool complement_psd = false;
    bool consistent = false;
    double block_min = 0.0;
    double p_min = 0.0;
    double complement_min = 0.0;
    double inversion_residual = 0.0;
};

/// Minimizes gamma^2 subject to
///   trace(B1* P B1) <= gamma^2,
///   A* P T + T* P A + C1* C1 <= -eps I,   P >= eps I.
NormCertificate h2_bound_gramian(const PIESystem& sys, const H2Options& opts = {});

/// Minimizes gamma subject to the block form
///   [-gamma I, C1; C1*, T* P A + A* P T] <= -eps I,
///   [W, B1* P; P B1, P] >= eps I,   trace(W) <= gamma,   P >= eps I.
NormCertificate h2_bound_schur(const PIESystem& sys, const H2Options& opts = {});

/// Verifies both directions of the Schur complement equivalence on a given
/// triple.  Throws if P cannot be inverted accurately enough to conclude.
SchurReport schur_consistency_check(const PIOperator& P, const PIOperator& Q,
                                    const PIOperator& R, double eps,
                                    int basis_degree = 8);

/// Minimizes gamma subject to
///   [-gamma I, C1; C1*, T*PA + A*PT + T*ZC2 + C2*Z*T] <= -eps I,
///   [W, B1*P + D21' Z*; P B1 + Z D21, P] >= eps I,
///   trace(W) <= gamma,   P >= eps I,
/// then reconstructs the observer gain L = P^{-1} Z.
SynthesisResult synthesize_estimator(const PIESystem& sys, const H2Options& opts = {});

/// Materializes L = P^{-1} Z for a coercive self-adjoint P and a gain-shaped
/// Z (P and Q2 blocks only).  Stores the relative residual of P o L - Z over
/// unit probes in *residual when given.
ObserverGain reconstruct_gain(const PIOperator& P, const PIOperator& Z,
                              double tol = 1e-4, double* residual = nullptr);

}  // namespace piekit

#endif
