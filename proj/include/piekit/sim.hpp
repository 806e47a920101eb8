#ifndef PIEKIT_SIM_HPP
#define PIEKIT_SIM_HPP

#include <functional>
#include <string>
#include <vector>

#include "piekit/pie_system.hpp"

namespace piekit {

/// Disturbance signal t -> w(t) in R^{nw}.
using Signal = std::function<Vector(double)>;

/// Chebyshev-Galerkin projection of a PIE onto R^m x span{T_0..T_N} per
/// distributed channel: M_T c' = M_A c + M_B w, z = M_C1 c, y = M_C2 c + D21 w.
struct ProjectedSystem {
    int N = 8;
    int m = 0, n = 0;
    Domain dom;

    Matrix MT;    // dim x dim, <phi_i, T phi_j>
    Matrix MA;    // dim x dim
    Matrix MB;    // dim x nw
    Matrix MC1;   // nz x dim
    Matrix MC2;   // ny x dim
    Matrix D21;   // ny x nw
    Matrix gram;  // dim x dim, <phi_i, phi_j>

    std::vector<double> grid;        // Gauss-Lobatto nodes on [a,b], ascending
    std::vector<RL2Function> basis;  // finite units + Chebyshev per channel
    Matrix recon;                    // (|grid|*n) x dim: distributed part of
                                     // (T phi_j) evaluated at the grid nodes

    int dim() const { return m + n * (N + 1); }
};

/// Time histories of a plant run, plus observer-error channels for coupled
/// runs. field/error_field rows are row-major (station-major, then channel).
struct Trajectory {
    std::vector<double> t;
    std::vector<double> stations;
    int n_channels = 0;

    Matrix coeffs;  // steps x dim (plant coefficients)
    Matrix z;       // steps x nz
    Matrix y;       // steps x ny
    Matrix field;   // steps x (|stations| * n), plant state T x

    bool has_observer = false;
    Matrix z_hat;        // steps x nz, observer estimate of z
    Matrix e_z;          // steps x nz, z_hat - z
    Matrix error_field;  // steps x (|stations| * n), T x_hat - T x
};

/// Galerkin projection onto Chebyshev polynomials of the first kind mapped to
/// the PIE's domain; all inner products are exact (polynomial kernels).
ProjectedSystem project(const PIESystem& sys, int N);

/// Fixed-step explicit RK4 integration of M_T c' = M_A c + M_B w(t) from a
/// least-squares projection of x0. Throws if M_T is ill-conditioned
/// (condition number > 1e12) or if the state overflows (message carries the
/// blow-up time).
Trajectory simulate(const ProjectedSystem& proj, const Signal& w,
                    const RL2Function& x0, double dt, double t_final);

/// Co-integrates the plant (driven by w) and the Luenberger observer
///   d/dt (T x_hat) = A x_hat + L (C2 x_hat - y),  x_hat(0) = 0,
/// which sees only the measurement y, never w.
Trajectory simulate_observer(const PIESystem& plant, const ObserverGain& L,
                             const Signal& w, const RL2Function& plant_ic,
                             int N, double dt, double t_final);

/// CSV with header row: t, e_z..., z..., z_hat..., then one column per
/// spatial station (error field for observer runs, plant field otherwise).
void emit_csv(const Trajectory& traj, const std::string& path);

/// Two SVG panels: <prefix>_field.svg (station curves over time) and
/// <prefix>_outputs.svg (z vs z_hat, or z and y for plant-only runs).
void emit_plots(const Trajectory& traj, const std::string& prefix);

}  // namespace piekit

#endif
