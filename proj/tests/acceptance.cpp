// Acceptance gate: one pass/fail line per criterion, exit code = number of
// failures.  Each criterion is self-contained and hardened against
// exceptions; oracles are quadrature evaluation, dense eigensolves, dense
// Lyapunov equations, brute-force scans, and an external SDP solver.

#include <chrono>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <unsupported/Eigen/KroneckerProduct>

#include "piekit/h2.hpp"
#include "piekit/pie_system.hpp"
#include "piekit/sim.hpp"
#include "test_util.hpp"

using namespace piekit;
using testutil::Quadrature;

namespace {

int g_failures = 0;

void report(int idx, const char* what, bool ok, const std::string& detail) {
    std::printf("[%s] criterion %d: %s%s%s\n", ok ? "PASS" : "FAIL", idx, what,
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!ok) ++g_failures;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
        .count();
}

std::string fmt(const char* f, ...) {
    char buf[256];
    va_list ap;
    va_start(ap, f);
    std::vsnprintf(buf, sizeof buf, f, ap);
    va_end(ap);
    return buf;
}

// ---------------------------------------------------------------------------
// Shared helpers

Signal zero_signal(int nw) {
    return [nw](double) { return Vector::Zero(nw); };
}

RL2Function distributed_ic(const Vector& per_channel) {
    Domain unit(0.0, 1.0);
    PolyMatrix d(static_cast<int>(per_channel.size()), 1, VarSet::None, unit);
    d.add_coeff(0, 0, per_channel);
    return RL2Function(Vector(0), d);
}

// Pointwise comparison of two RL2 functions on a sample grid; returns the
// worst absolute difference relative to 1 + |reference|.
double rel_diff(const RL2Function& got, const RL2Function& ref, Domain dom) {
    double worst = 0.0;
    for (int i = 0; i < ref.m(); ++i) {
        double d = std::abs(got.finite(i) - ref.finite(i));
        worst = std::max(worst, d / (1.0 + std::abs(ref.finite(i))));
    }
    if (ref.n() > 0) {
        for (int p = 0; p <= 24; ++p) {
            double s = dom.a + (dom.b - dom.a) * p / 24.0;
            Vector g = got.dist.eval(s), r = ref.dist.eval(s);
            for (int i = 0; i < r.size(); ++i) {
                double d = std::abs(g(i) - r(i));
                worst = std::max(worst, d / (1.0 + std::abs(r(i))));
            }
        }
    }
    return worst;
}

// Trapezoid L2 norm over the recorded station grid of one row of a
// trajectory field matrix.
double station_norm(const Trajectory& traj, const Matrix& field, int row) {
    const auto& st = traj.stations;
    int n = traj.n_channels;
    double acc = 0.0;
    for (size_t p = 0; p + 1 < st.size(); ++p) {
        double va = 0.0, vb = 0.0;
        for (int c = 0; c < n; ++c) {
            va += field(row, static_cast<int>(p) * n + c) *
                  field(row, static_cast<int>(p) * n + c);
            vb += field(row, static_cast<int>(p + 1) * n + c) *
                  field(row, static_cast<int>(p + 1) * n + c);
        }
        acc += 0.5 * (st[p + 1] - st[p]) * (va + vb);
    }
    return std::sqrt(acc);
}

// ---------------------------------------------------------------------------
// Criterion 1: operator algebra against sample-point / quadrature oracles.

void criterion_1() {
    auto t0 = std::chrono::steady_clock::now();
    std::mt19937 rng(7001);
    Domain dom(0.0, 1.0);
    Quadrature q(40, dom);
    double worst_comp = 0.0, worst_adj = 0.0, worst_cat = 0.0;
    int n_comp = 0, n_adj = 0, n_cat = 0;
    std::uniform_int_distribution<int> dim_pick(1, 3);

    for (int trial = 0; trial < 200; ++trial) {
        int m1 = dim_pick(rng), n1 = dim_pick(rng);
        int m2 = dim_pick(rng), n2 = dim_pick(rng);
        int m3 = dim_pick(rng), n3 = dim_pick(rng);
        PIOperator A = testutil::random_pi(rng, m2, n2, m3, n3, 2, dom);
        PIOperator B = testutil::random_pi(rng, m1, n1, m2, n2, 2, dom);
        RL2Function f = testutil::random_rl2(rng, m1, n1, 3, dom);
        RL2Function g = testutil::random_rl2(rng, m3, n3, 3, dom);

        // Composition: symbolic compose versus sequential application.
        worst_comp =
            std::max(worst_comp, rel_diff(A.compose(B).apply(f),
                                          A.apply(B.apply(f)), dom));
        ++n_comp;

        // Adjoint identity <g, (AB) h> == <(AB)* g, h> with both inner
        // products evaluated by quadrature (independent of the symbolic
        // inner-product path).
        RL2Function h = testutil::random_rl2(rng, m2, n2, 3, dom);
        double lhs = testutil::ip_quad(g, A.apply(h), q);
        double rhs = testutil::ip_quad(A.adjoint().apply(g), h, q);
        worst_adj = std::max(worst_adj,
                             std::abs(lhs - rhs) / (1.0 + std::abs(lhs)));
        ++n_adj;

        // Concatenation: vcat/hcat against blockwise application.
        {
            // vcat: [A2; A2b] f stacks outputs.
            PIOperator A2 = testutil::random_pi(rng, m1, n1, m3, n3, 2, dom);
            PIOperator A2b = testutil::random_pi(rng, m1, n1, m2, n2, 2, dom);
            RL2Function out = vcat(A2, A2b).apply(f);
            RL2Function top = A2.apply(f), bot = A2b.apply(f);
            Vector fin(top.m() + bot.m());
            fin << top.finite, bot.finite;
            // Compare piecewise: finite block then distributed samples.
            double w = 0.0;
            for (int i = 0; i < fin.size(); ++i)
                w = std::max(w, std::abs(out.finite(i) - fin(i)) /
                                    (1.0 + std::abs(fin(i))));
            for (int p = 0; p <= 24; ++p) {
                double s = dom.a + (dom.b - dom.a) * p / 24.0;
                Vector o = out.dist.eval(s);
                Vector r(top.n() + bot.n());
                r << top.dist.eval(s), bot.dist.eval(s);
                for (int i = 0; i < r.size(); ++i)
                    w = std::max(w, std::abs(o(i) - r(i)) /
                                        (1.0 + std::abs(r(i))));
            }
            worst_cat = std::max(worst_cat, w);

            // hcat: [A2, A3] applied to stacked input equals sum of parts.
            PIOperator A3 = testutil::random_pi(rng, m2, n2, m3, n3, 2, dom);
            RL2Function f2 = testutil::random_rl2(rng, m2, n2, 3, dom);
            Vector fin2(f.m() + f2.m());
            fin2 << f.finite, f2.finite;
            // Stack the distributed parts coefficient-by-coefficient.
            PolyMatrix stacked(f.n() + f2.n(), 1, VarSet::None, dom);
            for (int k = 0; k <= 3; ++k) {
                Matrix coef = Matrix::Zero(f.n() + f2.n(), 1);
                bool any = false;
                for (int r = 0; r < f.n(); ++r) {
                    double c = f.dist.coeff(k, 0)(r, 0);
                    coef(r, 0) = c;
                    any = any || c != 0.0;
                }
                for (int r = 0; r < f2.n(); ++r) {
                    double c = f2.dist.coeff(k, 0)(r, 0);
                    coef(f.n() + r, 0) = c;
                    any = any || c != 0.0;
                }
                if (any) stacked.add_coeff(k, 0, coef);
            }
            RL2Function fs(fin2, stacked);
            RL2Function sum_parts = hcat(A2, A3).apply(fs);
            RL2Function p1 = A2.apply(f), p2 = A3.apply(f2);
            Vector sf = p1.finite + p2.finite;
            double w2 = 0.0;
            for (int i = 0; i < sf.size(); ++i)
                w2 = std::max(w2, std::abs(sum_parts.finite(i) - sf(i)) /
                                      (1.0 + std::abs(sf(i))));
            for (int p = 0; p <= 24; ++p) {
                double s = dom.a + (dom.b - dom.a) * p / 24.0;
                Vector o = sum_parts.dist.eval(s);
                Vector r = p1.dist.eval(s) + p2.dist.eval(s);
                for (int i = 0; i < r.size(); ++i)
                    w2 = std::max(w2, std::abs(o(i) - r(i)) /
                                          (1.0 + std::abs(r(i))));
            }
            worst_cat = std::max(worst_cat, w2);
            ++n_cat;
            ++n_cat;
        }
    }
    double el = seconds_since(t0);
    bool ok = n_comp >= 200 && n_adj >= 200 && n_cat >= 200 &&
              worst_comp <= 1e-9 && worst_adj <= 1e-9 && worst_cat <= 1e-9 &&
              el < 120.0;
    report(1, "operator algebra oracle suite", ok,
           fmt("compose %.2e adjoint %.2e concat %.2e over %d/%d/%d cases, "
               "%.1fs",
               worst_comp, worst_adj, worst_cat, n_comp, n_adj, n_cat, el));
}

// ---------------------------------------------------------------------------
// Criterion 2 (+ certificates for 7/8): scalar-ODE H2 bound both forms.

struct CertStore {
    std::vector<std::pair<std::string, PIESystem>> norm_systems;
    std::vector<NormCertificate> norm_certs;
    std::vector<double> norm_tols;
    std::vector<std::pair<std::string, PIESystem>> synth_systems;
    std::vector<SynthesisResult> synth_certs;
    std::vector<double> synth_tols;
    std::string sdpa_path;
    double sdpa_embedded_gamma = 0.0;
};

void criterion_2(CertStore& store, const std::string& out_dir) {
    const double oracle = std::sqrt(0.5);
    PIESystem sys = example_scalar_ode();

    auto t0 = std::chrono::steady_clock::now();
    NormCertificate g = h2_bound_gramian(sys);
    double t_gram = seconds_since(t0);

    H2Options opts;
    store.sdpa_path = out_dir + "/acceptance_schur.dat-s";
    opts.export_sdpa = store.sdpa_path;
    t0 = std::chrono::steady_clock::now();
    NormCertificate s = h2_bound_schur(sys, opts);
    double t_schur = seconds_since(t0);
    store.sdpa_embedded_gamma = s.gamma;

    bool ok = g.status == SDPStatus::Optimal && s.status == SDPStatus::Optimal &&
              std::abs(g.gamma - oracle) <= 0.02 * oracle &&
              std::abs(s.gamma - oracle) <= 0.02 * oracle && t_gram < 60.0 &&
              t_schur < 60.0;
    if (g.status == SDPStatus::Optimal) {
        store.norm_systems.push_back({"gramian-form scalar ODE", sys});
        store.norm_certs.push_back(g);
        store.norm_tols.push_back(H2Options{}.sdp.tolerance);
    }
    if (s.status == SDPStatus::Optimal) {
        store.norm_systems.push_back({"block-form scalar ODE", sys});
        store.norm_certs.push_back(s);
        store.norm_tols.push_back(opts.sdp.tolerance);
    }
    report(2, "scalar-ODE H2 bound, both program forms", ok,
           fmt("gramian %.6f (%.1fs), block %.6f (%.1fs), oracle %.6f",
               g.gamma, t_gram, s.gamma, t_schur, oracle));
}

// ---------------------------------------------------------------------------
// Criterion 3: scalar estimator against a brute-force gain scan.

void criterion_3(CertStore& store) {
    PIESystem sys = example_scalar_estimation();
    auto t0 = std::chrono::steady_clock::now();
    SynthesisResult r = synthesize_estimator(sys);
    double el = seconds_since(t0);

    // Brute-force oracle: for the error system xdot = (1+L)x - L w,
    // e_z = x, the H2 bound of Defn 3 is |L| / sqrt(-2(1+L)) for L < -1;
    // scanning L confirms the minimum sqrt(2) at L = -2.
    double best_gamma = 1e30, best_L = 0.0;
    for (double L = -6.0; L <= -1.01; L += 1e-4) {
        double gamma = std::abs(L) / std::sqrt(-2.0 * (1.0 + L));
        if (gamma < best_gamma) {
            best_gamma = gamma;
            best_L = L;
        }
    }

    double got_L = (r.L.L1.size() > 0) ? r.L.L1(0, 0) : 0.0;
    bool ok = r.status == SDPStatus::Optimal &&
              std::abs(r.gamma - best_gamma) <= 0.05 * best_gamma &&
              std::abs(got_L - best_L) <= 0.10 * std::abs(best_L) && el < 120.0;
    if (r.status == SDPStatus::Optimal) {
        store.synth_systems.push_back({"scalar estimation plant", sys});
        store.synth_certs.push_back(r);
        store.synth_tols.push_back(H2Options{}.sdp.tolerance);
    }
    report(3, "scalar estimator vs brute-force gain scan", ok,
           fmt("gamma %.6f (oracle %.6f), L %.4f (oracle %.4f), %.1fs",
               r.gamma, best_gamma, got_L, best_L, el));
}

// ---------------------------------------------------------------------------
// Criterion 4: operator Schur complement check vs dense eigenvalue oracle.

void criterion_4() {
    std::mt19937 rng(7004);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Domain dom(0.0, 1.0);
    const double eps = 1e-6;
    const int mp = 3, pp = 2;
    int agree = 0, total = 0;
    std::string first_fail;

    while (total < 100) {
        Matrix G(mp, mp), Q(pp, mp), S(pp, pp);
        for (int i = 0; i < mp; ++i)
            for (int j = 0; j < mp; ++j) G(i, j) = gauss(rng);
        for (int i = 0; i < pp; ++i)
            for (int j = 0; j < mp; ++j) Q(i, j) = gauss(rng);
        for (int i = 0; i < pp; ++i)
            for (int j = 0; j < pp; ++j) S(i, j) = gauss(rng);
        Matrix P = G * G.transpose() + 0.5 * Matrix::Identity(mp, mp);
        Matrix C = 0.5 * (S + S.transpose());
        if (total % 2 == 0)  // force a PSD case
            C = S * S.transpose() + 0.1 * Matrix::Identity(pp, pp);
        Matrix R = Q * P.inverse() * Q.transpose() + C;

        Matrix block(mp + pp, mp + pp);
        block << P, Q.transpose(), Q, R;
        Eigen::SelfAdjointEigenSolver<Matrix> es(block);
        double mineig = es.eigenvalues().minCoeff();
        if (std::abs(mineig - eps) < 1e-3) continue;  // skip borderline draws
        bool oracle_psd = mineig >= eps;

        SchurReport rep = schur_consistency_check(
            PIOperator::from_matrix(P, dom), PIOperator::from_matrix(Q, dom),
            PIOperator::from_matrix(R, dom), eps);
        ++total;
        if (rep.consistent && rep.block_psd == oracle_psd) {
            ++agree;
        } else if (first_fail.empty()) {
            first_fail = fmt("case %d: oracle %d block_psd %d consistent %d",
                             total, (int)oracle_psd, (int)rep.block_psd,
                             (int)rep.consistent);
        }
    }
    report(4, "Schur complement equivalence vs dense eigenvalue oracle",
           agree == 100, fmt("%d/100 agree%s%s", agree,
                             first_fail.empty() ? "" : "; ",
                             first_fail.c_str()));
}

// ---------------------------------------------------------------------------
// Criterion 5: reaction-diffusion open-loop growth and observer convergence.

void criterion_5(CertStore& store) {
    auto t0 = std::chrono::steady_clock::now();
    PIESystem sys = preset_system("reaction-diffusion");
    const double dt = 0.002, t_final = 2.0;
    const int N = 8;
    Signal w = [](double t) { return Vector::Constant(1, std::sin(100.0 * t)); };
    // Physical IC xi(0,s) = -s^2/2 corresponds to the constant fundamental
    // state d^2 xi / ds^2 = -1.
    RL2Function x0 = distributed_ic(Vector::Constant(1, -1.0));

    // (a) open-loop growth
    ProjectedSystem proj = project(sys, N);
    Trajectory open_loop = simulate(proj, w, x0, dt, t_final);
    bool monotone = true;
    double prev = -1.0;
    for (size_t i = 0; i < open_loop.t.size(); ++i) {
        if (open_loop.t[i] < 0.5) continue;
        double nrm = station_norm(open_loop, open_loop.field,
                                  static_cast<int>(i));
        if (prev >= 0.0 && nrm < prev * (1.0 - 1e-9)) {
            monotone = false;
            break;
        }
        prev = nrm;
    }

    // (b) synthesized observer convergence
    SynthesisResult r = synthesize_estimator(sys);
    bool synth_ok = r.status == SDPStatus::Optimal;
    double field_end = 0.0, field_peak = 0.0, ez_end = 0.0, ez_peak = 0.0;
    if (synth_ok) {
        store.synth_systems.push_back({"reaction-diffusion plant", sys});
        store.synth_certs.push_back(r);
        store.synth_tols.push_back(H2Options{}.sdp.tolerance);
        Trajectory obs = simulate_observer(sys, r.L, w, x0, N, dt, t_final);
        int last = static_cast<int>(obs.t.size()) - 1;
        field_peak = obs.error_field.cwiseAbs().maxCoeff();
        field_end = obs.error_field.row(last).cwiseAbs().maxCoeff();
        ez_peak = obs.e_z.cwiseAbs().maxCoeff();
        ez_end = obs.e_z.row(last).cwiseAbs().maxCoeff();
    }
    double el = seconds_since(t0);
    bool ok = monotone && synth_ok && field_peak > 0 &&
              field_end <= 0.10 * field_peak && ez_end <= 0.10 * ez_peak &&
              el < 300.0;
    report(5, "reaction-diffusion open-loop growth and observer convergence",
           ok,
           fmt("monotone=%d gamma=%.4f |Te|(T)/peak=%.3f |e_z|(T)/peak=%.3f "
               "%.1fs",
               (int)monotone, r.gamma,
               field_peak > 0 ? field_end / field_peak : -1.0,
               ez_peak > 0 ? ez_end / ez_peak : -1.0, el));
}

// ---------------------------------------------------------------------------
// Criterion 6: beam energy preservation and observer convergence.

void criterion_6(CertStore& store) {
    auto t0 = std::chrono::steady_clock::now();
    PIESystem sys = preset_system("beam");
    const double dt = 0.01, t_final = 10.0;
    const int N = 8;
    Signal w = zero_signal(1);
    // Physical IC: velocity eta_t(0,s) = -s^2/2 (fundamental state -1 in the
    // velocity channel), zero displacement channel.
    Vector ch(2);
    ch << -1.0, 0.0;
    RL2Function x0 = distributed_ic(ch);

    // (a) plant energy drift.  The conserved quantity of the undamped beam
    // is the mechanical energy ||T1 x1||^2 + 0.1 ||T2 x2||^2 (velocity plus
    // weighted bending terms); with the trajectory's per-channel field
    // values this is a weighted station norm.
    ProjectedSystem proj = project(sys, N);
    Trajectory plant = simulate(proj, w, x0, dt, t_final);
    auto energy = [&](int row) {
        const auto& st = plant.stations;
        double acc = 0.0;
        const double wt[2] = {1.0, 0.1};
        for (size_t p = 0; p + 1 < st.size(); ++p) {
            double va = 0.0, vb = 0.0;
            for (int c = 0; c < 2; ++c) {
                double fa = plant.field(row, static_cast<int>(p) * 2 + c);
                double fb = plant.field(row, static_cast<int>(p + 1) * 2 + c);
                va += wt[c] * fa * fa;
                vb += wt[c] * fb * fb;
            }
            acc += 0.5 * (st[p + 1] - st[p]) * (va + vb);
        }
        return acc;
    };
    double e0 = energy(0);
    double drift = 0.0;
    for (size_t i = 0; i < plant.t.size(); ++i)
        drift = std::max(drift,
                         std::abs(energy(static_cast<int>(i)) - e0) / e0);

    // (b) synthesized observer convergence.  The neutrally stable beam has
    // its certificate optimum at infinity (P grows without bound as the
    // bound tightens), so the solve needs a strong trace regularization to
    // stay bounded, and a looser duality-gap target; decay refinement is
    // pointless without disturbances and would shift the neutral plant into
    // instability.
    H2Options beam_opts;
    beam_opts.degree = 1;
    beam_opts.max_degree = 2;
    beam_opts.trace_reg = 1e-2;
    beam_opts.sdp.tolerance = 1e-4;
    beam_opts.decay_refine = false;
    SynthesisResult r = synthesize_estimator(sys, beam_opts);
    bool synth_ok = r.status == SDPStatus::Optimal;
    double ez_end = 0.0, ez_peak = 0.0;
    if (synth_ok) {
        store.synth_systems.push_back({"beam plant", sys});
        store.synth_certs.push_back(r);
        store.synth_tols.push_back(beam_opts.sdp.tolerance);
        Trajectory obs = simulate_observer(sys, r.L, w, x0, N, dt, t_final);
        int last = static_cast<int>(obs.t.size()) - 1;
        ez_peak = obs.e_z.cwiseAbs().maxCoeff();
        ez_end = obs.e_z.row(last).cwiseAbs().maxCoeff();
    }
    double el = seconds_since(t0);
    bool ok = drift < 0.05 && synth_ok && ez_peak > 0 &&
              ez_end <= 0.10 * ez_peak && el < 300.0;
    report(6, "beam energy preservation and observer convergence", ok,
           fmt("drift=%.4f gamma=%.4f |e_z|(T)/peak=%.3f %.1fs", drift,
               r.gamma, ez_peak > 0 ? ez_end / ez_peak : -1.0, el));
}

// ---------------------------------------------------------------------------
// Criterion 7: certificate re-substitution with random probes.

struct ProbeResult {
    double worst = 1e30;  // most negative normalized margin
    bool ok = true;
};

// Quadratic form <f, Op f> by the symbolic inner product.
double qform(const PIOperator& op, const RL2Function& f) {
    return inner_product(f, op.apply(f));
}

double sqnorm(const RL2Function& f) {
    return inner_product(f, f);
}

// Margin of the coupled block [ -gamma I, C1; C1*, Lyap ] <= 0 evaluated on
// probes (zeta, f): the margin is -(quadratic form)/(|zeta|^2 + |f|^2).
void probe_output_block(const PIOperator& lyap, const PIOperator& C1,
                        double gamma, std::mt19937& rng, Domain dom,
                        ProbeResult& pr, double tol_margin) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    for (int k = 0; k < 100; ++k) {
        RL2Function f = testutil::random_rl2(rng, lyap.m1(), lyap.n1(), 4, dom);
        Vector zeta(C1.m2());
        for (int i = 0; i < zeta.size(); ++i) zeta(i) = gauss(rng);
        double cross = 2.0 * zeta.dot(C1.apply(f).finite);
        double quad = -gamma * zeta.squaredNorm() + cross + qform(lyap, f);
        double margin = -quad / (zeta.squaredNorm() + sqnorm(f));
        pr.worst = std::min(pr.worst, margin);
        if (margin < tol_margin) pr.ok = false;
    }
}

// Margin of [ W, G*; G, P ] >= 0 where G = P B1 (+ Z D21): probes (d, f).
void probe_input_block(const Matrix& W,
                       const std::function<RL2Function(const Vector&)>& G,
                       const PIOperator& P, std::mt19937& rng, Domain dom,
                       ProbeResult& pr, double tol_margin) {
    std::normal_distribution<double> gauss(0.0, 1.0);
    int nw = static_cast<int>(W.rows());
    for (int k = 0; k < 100; ++k) {
        RL2Function f = testutil::random_rl2(rng, P.m1(), P.n1(), 4, dom);
        Vector d(nw);
        for (int i = 0; i < nw; ++i) d(i) = gauss(rng);
        double cross = 2.0 * inner_product(G(d), f);
        double quad = d.dot(W * d) + cross + qform(P, f);
        double margin = quad / (d.squaredNorm() + sqnorm(f));
        pr.worst = std::min(pr.worst, margin);
        if (margin < tol_margin) pr.ok = false;
    }
}

void probe_coercivity(const PIOperator& P, double eps, std::mt19937& rng,
                      Domain dom, ProbeResult& pr, double tol_margin) {
    for (int k = 0; k < 100; ++k) {
        RL2Function f = testutil::random_rl2(rng, P.m1(), P.n1(), 4, dom);
        double margin = (qform(P, f) - eps * sqnorm(f)) / sqnorm(f);
        pr.worst = std::min(pr.worst, margin);
        if (margin < tol_margin) pr.ok = false;
    }
}

void criterion_7(const CertStore& store) {
    std::mt19937 rng(7007);
    bool all_ok = true;
    double global_worst = 1e30;
    int n_programs = 0;
    std::string fail_detail;

    // Norm certificates (block form carries W; gramian form has empty W).
    for (size_t i = 0; i < store.norm_certs.size(); ++i) {
        const auto& cert = store.norm_certs[i];
        const auto& sys = store.norm_systems[i].second;
        const double tol_margin = -10.0 * store.norm_tols[i];
        Domain dom = sys.domain();
        ProbeResult pr;
        PIOperator lyap = sys.A.adjoint().compose(cert.P).compose(sys.T) +
                          sys.T.adjoint().compose(cert.P).compose(sys.A);
        if (cert.W.size() == 0) {
            // Gramian form: A*PT + T*PA + C1*C1 <= 0, trace(B1*PB1) <= g^2.
            PIOperator full =
                lyap + sys.C1.adjoint().compose(sys.C1);
            probe_coercivity(full * -1.0, 0.0, rng, dom, pr, tol_margin);
            double tr = sys.B1.adjoint()
                            .compose(cert.P)
                            .compose(sys.B1)
                            .P()
                            .trace();
            double m = (cert.gamma * cert.gamma - tr) /
                       std::max(1.0, cert.gamma * cert.gamma);
            pr.worst = std::min(pr.worst, m);
            if (m < tol_margin) pr.ok = false;
        } else {
            probe_output_block(lyap, sys.C1, cert.gamma, rng, dom, pr,
                               tol_margin);
            auto G = [&](const Vector& d) {
                return cert.P.apply(sys.B1.apply(RL2Function(
                    d, PolyMatrix(0, 1, VarSet::None, dom))));
            };
            probe_input_block(cert.W, G, cert.P, rng, dom, pr, tol_margin);
            double m = (cert.gamma - cert.W.trace()) / std::max(1.0, cert.gamma);
            pr.worst = std::min(pr.worst, m);
            if (m < tol_margin) pr.ok = false;
        }
        probe_coercivity(cert.P, 0.0, rng, dom, pr, tol_margin);
        ++n_programs;
        global_worst = std::min(global_worst, pr.worst);
        if (!pr.ok) {
            all_ok = false;
            if (fail_detail.empty())
                fail_detail = fmt("%s margin %.2e",
                                  store.norm_systems[i].first.c_str(),
                                  pr.worst);
        }
    }

    // Synthesis certificates: lyapunov block carries the T*ZC2 terms and the
    // input block carries Z D21.
    for (size_t i = 0; i < store.synth_certs.size(); ++i) {
        const auto& cert = store.synth_certs[i];
        const auto& sys = store.synth_systems[i].second;
        const double tol_margin = -10.0 * store.synth_tols[i];
        Domain dom = sys.domain();
        ProbeResult pr;
        PIOperator lyap =
            sys.A.adjoint().compose(cert.P).compose(sys.T) +
            sys.T.adjoint().compose(cert.P).compose(sys.A) +
            sys.T.adjoint().compose(cert.Z).compose(sys.C2) +
            sys.C2.adjoint().compose(cert.Z.adjoint()).compose(sys.T);
        probe_output_block(lyap, sys.C1, cert.gamma, rng, dom, pr, tol_margin);
        auto G = [&](const Vector& d) {
            RL2Function wf(d, PolyMatrix(0, 1, VarSet::None, dom));
            RL2Function a = cert.P.apply(sys.B1.apply(wf));
            Vector yd = sys.D21 * d;
            RL2Function b = cert.Z.apply(
                RL2Function(yd, PolyMatrix(0, 1, VarSet::None, dom)));
            Vector fin = a.finite;
            if (b.m() > 0) fin += b.finite;
            PolyMatrix dist = a.dist;
            if (b.n() > 0) dist = a.dist + b.dist;
            return RL2Function(fin, dist);
        };
        probe_input_block(cert.W, G, cert.P, rng, dom, pr, tol_margin);
        double m = (cert.gamma - cert.W.trace()) / std::max(1.0, cert.gamma);
        pr.worst = std::min(pr.worst, m);
        if (m < tol_margin) pr.ok = false;
        probe_coercivity(cert.P, 0.0, rng, dom, pr, tol_margin);
        ++n_programs;
        global_worst = std::min(global_worst, pr.worst);
        if (!pr.ok) {
            all_ok = false;
            if (fail_detail.empty())
                fail_detail = fmt("%s margin %.2e",
                                  store.synth_systems[i].first.c_str(),
                                  pr.worst);
        }
    }

    bool ok = all_ok && n_programs > 0;
    report(7, "certificate re-substitution, 100 probes per constraint", ok,
           fmt("%d programs, worst margin %.2e%s%s", n_programs,
               global_worst, fail_detail.empty() ? "" : "; ",
               fail_detail.c_str()));
}

// ---------------------------------------------------------------------------
// Criterion 8: SDPA export solved by an external solver.

void criterion_8(const CertStore& store) {
#ifndef PIEKIT_TOOLS_DIR
#define PIEKIT_TOOLS_DIR "tools"
#endif
    if (store.sdpa_path.empty() || store.sdpa_embedded_gamma <= 0.0) {
        report(8, "SDPA export interop", false, "no exported instance");
        return;
    }
    std::string cmd = std::string("python3 ") + PIEKIT_TOOLS_DIR +
                      "/solve_sdpa.py --solver SCS " + store.sdpa_path +
                      " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) {
        report(8, "SDPA export interop", false, "failed to launch solver");
        return;
    }
    char buf[256] = {0};
    std::string out;
    while (fgets(buf, sizeof buf, pipe)) out += buf;
    int rc = pclose(pipe);
    double external = 0.0;
    bool parsed = false;
    try {
        external = std::stod(out);
        parsed = true;
    } catch (...) {
    }
    bool ok = rc == 0 && parsed &&
              std::abs(external - store.sdpa_embedded_gamma) <=
                  0.01 * store.sdpa_embedded_gamma;
    report(8, "SDPA export interop (external solver)", ok,
           fmt("external %.6f vs embedded %.6f", external,
               store.sdpa_embedded_gamma));
}

// ---------------------------------------------------------------------------
// Criterion 9: Defn-3 supremum vs trace-H2 sandwich on a 2-input ODE.

void criterion_9() {
    Domain dom(0.0, 1.0);
    Matrix A(2, 2), B(2, 2), C(1, 2);
    A << -1.0, 0.4, 0.0, -2.0;
    B << 1.0, 0.2, -0.3, 1.0;
    C << 1.0, 0.6;

    PIESystem sys;
    sys.T = PIOperator::identity(2, 0, dom);
    sys.A = PIOperator::from_matrix(A, dom);
    sys.B1 = PIOperator::from_matrix(B, dom);
    sys.C1 = PIOperator::from_matrix(C, dom);
    sys.C2 = PIOperator::zero(2, 0, 0, 0, dom);
    sys.D21 = Matrix::Zero(0, 2);

    // Dense oracle: A' X + X A + C' C = 0 via Kronecker solve, then
    // trace-H2 = sqrt(trace(B' X B)).
    Matrix I2 = Matrix::Identity(2, 2);
    Matrix K = Eigen::kroneckerProduct(I2, A.transpose()).eval() +
               Eigen::kroneckerProduct(A.transpose(), I2).eval();
    Matrix CtC = C.transpose() * C;
    Vector rhs = -Eigen::Map<const Vector>(CtC.data(), 4);
    Vector xv = K.fullPivLu().solve(rhs);
    Matrix X = Eigen::Map<const Matrix>(xv.data(), 2, 2);
    double trace_h2 = std::sqrt((B.transpose() * X * B).trace());

    // Direction-gridded time-domain supremum: worst L2 output energy over
    // unit initial-condition directions through B.
    ProjectedSystem proj = project(sys, 2);
    const double dt = 0.002, t_final = 12.0;
    double sup = 0.0;
    for (int k = 0; k < 96; ++k) {
        double th = M_PI * k / 96.0;  // antipodal directions are equivalent
        Vector d(2);
        d << std::cos(th), std::sin(th);
        RL2Function x0(B * d, PolyMatrix(0, 1, VarSet::None, dom));
        Trajectory traj = simulate(proj, zero_signal(2), x0, dt, t_final);
        double acc = 0.0;
        for (size_t i = 0; i + 1 < traj.t.size(); ++i)
            acc += 0.5 * dt *
                   (traj.z.row(static_cast<int>(i)).squaredNorm() +
                    traj.z.row(static_cast<int>(i + 1)).squaredNorm());
        sup = std::max(sup, std::sqrt(acc));
    }

    bool lower = sup <= trace_h2 * 1.02;
    bool upper = trace_h2 <= std::sqrt(2.0) * sup * 1.02;
    report(9, "initial-condition supremum vs trace-H2 sandwich",
           lower && upper,
           fmt("sup %.6f <= trace-H2 %.6f <= sqrt(2)*sup %.6f", sup, trace_h2,
               std::sqrt(2.0) * sup));
}

}  // namespace

int main(int argc, char** argv) {
    std::string out_dir = argc > 1 ? argv[1] : ".";
    // Optional comma-separated criterion filter for development runs.
    const char* only = std::getenv("PIEKIT_ACCEPT_ONLY");
    auto wanted = [&](int k) {
        if (!only) return true;
        std::string s(only);
        std::string needle = std::to_string(k);
        std::stringstream ss(s);
        std::string tok;
        while (std::getline(ss, tok, ','))
            if (tok == needle) return true;
        return false;
    };
    CertStore store;
    if (wanted(1)) criterion_1();
    if (wanted(2)) criterion_2(store, out_dir);
    if (wanted(3)) criterion_3(store);
    if (wanted(4)) criterion_4();
    if (wanted(5)) criterion_5(store);
    if (wanted(6)) criterion_6(store);
    if (wanted(7)) criterion_7(store);
    if (wanted(8)) criterion_8(store);
    if (wanted(9)) criterion_9();
    std::printf("%d criteria failed\n", g_failures);
    return g_failures;
}
