#ifndef PIEKIT_PIE_SYSTEM_HPP
#define PIEKIT_PIE_SYSTEM_HPP

#include "piekit/pi_operator.hpp"

namespace piekit {

/// The six-tuple defining a partial integral equation
///   d/dt (T x(t)) = A x(t) + B1 w(t)
///   z(t) = C1 x(t),   y(t) = C2 x(t) + D21 w(t)
/// with state x in RL2^{m,n}[a,b].
struct PIESystem {
    PIOperator T;   // state -> state
    PIOperator A;   // state -> state
    PIOperator B1;  // R^{nw} -> state
    PIOperator C1;  // state -> R^{nz}
    PIOperator C2;  // state -> R^{ny}
    Matrix D21;     // ny x nw

    int m() const { return T.m1(); }
    int n() const { return T.n1(); }
    int nw() const { return B1.m1(); }
    int nz() const { return C1.m2(); }
    int ny() const { return C2.m2(); }
    Domain domain() const { return T.domain(); }

    void validate() const;
};

/// Disturbance-free system driven through an initial-condition injector:
///   d/dt (T x) = A x, z = C1 x, x(0) = B x0.
struct AuxiliarySystem {
    PIOperator T, A, C1;
    PIOperator B;  // R^{nw} -> state
};

/// Luenberger observer gain L = [L1; L2(s)] mapping R^{ny} into the state
/// space: L1 corrects the ODE part, L2 the distributed part.
struct ObserverGain {
    Matrix L1;      // m x ny
    PolyMatrix L2;  // n x ny, polynomial in s

    /// As a PI operator R^{ny} -> RL2^{m,n} (P and Q2 slots only).
    PIOperator as_operator(Domain dom) const;
    static ObserverGain zero(int m, int n, int ny, Domain dom);
};

/// Error dynamics of the Luenberger observer, per
///   d/dt (T e) = (A + L C2) e - (B1 + L D21) w,  e_z = C1 e.
PIESystem error_system(const PIESystem& plant, const ObserverGain& L);

/// Strips the disturbance channel and installs B1 as the initial-condition
/// injector.
AuxiliarySystem auxiliary_system(const PIESystem& sys);

/// Unstable reaction-diffusion example on [0,1] (one distributed channel,
/// boundary measurement, process + sensor disturbance).
PIESystem example_reaction_diffusion();

/// Cantilevered Euler-Bernoulli beam in first-order form on [0,1]
/// (two distributed channels, tip-velocity measurement).
PIESystem example_euler_bernoulli();

/// Scalar ODE A=-1, B=1, C=1 (norm-bound oracle case, n = 0).
PIESystem example_scalar_ode();

/// Scalar ODE A=1, B1=0, C1=C2=D21=1 (estimator oracle case).
PIESystem example_scalar_estimation();

/// Resolves a named preset; throws std::invalid_argument for unknown names.
PIESystem preset_system(const std::string& name);

}  // namespace piekit

#endif
