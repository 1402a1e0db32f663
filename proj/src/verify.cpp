#include "impfac/verify.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace impfac {

// ---------------------------------------------------------------------------
// Seeded generators

Vec random_vector(std::uint64_t seed, std::size_t n) {
    Rng rng(seed);
    Vec v(n);
    for (double& x : v) x = rng.normal();
    return v;
}

Mat random_spd(std::uint64_t seed, std::size_t n, double shift) {
    Rng rng(seed);
    Mat R(n, n);
    for (double& x : R.a) x = rng.normal() / std::sqrt(static_cast<double>(n));
    Mat A = matmul(transpose(R), R);
    for (std::size_t i = 0; i < n; ++i) A(i, i) += shift;
    return A;
}

ProjectionSubspace random_subspace(std::uint64_t seed, std::size_t n, std::size_t d) {
    if (d == 0) return ProjectionSubspace::empty(n);
    Rng rng(seed);
    std::vector<Vec> spanning(d, Vec(n));
    for (auto& v : spanning)
        for (double& x : v) x = rng.normal();
    return orthonormalize(spanning, 1e-10);
}

ImpulsiveSystem random_system(std::uint64_t seed, std::size_t max_dim, std::size_t max_impulses,
                              bool dense_backend, std::size_t min_impulses) {
    Rng rng(seed);
    const std::size_t n = 2 + (rng.next_u64() % (max_dim - 1));
    const std::size_t m = 1 + (rng.next_u64() % std::min<std::size_t>(3, n));
    const std::size_t mv = 1 + (rng.next_u64() % 2);
    const std::size_t p =
        min_impulses + (max_impulses > min_impulses
                            ? rng.next_u64() % (max_impulses - min_impulses + 1)
                            : 0);

    ImpulsiveSystem sys;
    if (dense_backend) {
        DenseSemigroup dg;
        dg.generator = Mat(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                dg.generator(i, j) = (i == j ? -0.5 : 0.0) + 0.6 * rng.uniform(-1.0, 1.0);
        sys.semigroup = dg;
    } else {
        SpectralSemigroup sg;
        sg.decay_rates.resize(n);
        for (double& r : sg.decay_rates) r = rng.uniform(0.0, 2.5);
        sys.semigroup = sg;
    }
    sys.control_map = Mat(n, m);
    for (double& x : sys.control_map.a) x = rng.uniform(-1.0, 1.0);
    for (std::size_t k = 0; k < p; ++k) {
        Mat B(n, n), D(n, mv);
        for (double& x : B.a) x = rng.uniform(-0.8, 0.8) / static_cast<double>(n);
        for (double& x : D.a) x = rng.uniform(-1.0, 1.0);
        sys.jumps.push_back(std::move(B));
        sys.impulse_maps.push_back(std::move(D));
    }
    sys.initial_state.resize(n);
    for (double& x : sys.initial_state) x = rng.uniform(-1.0, 1.0);

    sys.schedule.horizon = 1.0;
    Vec times;
    for (std::size_t k = 0; k < p; ++k) times.push_back(rng.uniform(0.1, 0.9));
    std::sort(times.begin(), times.end());
    for (std::size_t k = 1; k < times.size(); ++k)
        times[k] = std::max(times[k], times[k - 1] + 0.02);
    sys.schedule.impulse_times = times;
    sys.validate();
    return sys;
}

ControlLaw random_control(std::uint64_t seed, const ImpulsiveSystem& sys, const QuadratureRule& rule) {
    Rng rng(seed);
    ControlLaw law = ControlLaw::zero(sys, rule);
    for (auto& interval : law.node_values)
        for (auto& u : interval)
            for (double& x : u) x = rng.uniform(-1.0, 1.0);
    for (auto& v : law.impulse_controls)
        for (double& x : v) x = rng.uniform(-1.0, 1.0);
    return law;
}

// ---------------------------------------------------------------------------
// Verification suite

namespace {

struct Suite {
    double scale;
    std::vector<CheckResult> results;

    void record(const std::string& name, double measured, double tolerance,
                const std::string& detail) {
        CheckResult r;
        r.name = name;
        r.measured = measured;
        r.tolerance = tolerance * scale;
        r.pass = measured <= r.tolerance;
        r.detail = detail;
        results.push_back(std::move(r));
    }
    void record_flag(const std::string& name, bool ok, const std::string& detail) {
        CheckResult r;
        r.name = name;
        r.measured = ok ? 0.0 : 1.0;
        r.tolerance = scale > 0.0 ? 0.5 : -1.0;
        r.pass = ok && scale > 0.0;
        r.detail = detail;
        results.push_back(std::move(r));
    }
    void record_skip(const std::string& name, const std::string& why) {
        CheckResult r;
        r.name = name;
        r.skipped = true;
        r.pass = true;
        r.detail = why;
        results.push_back(std::move(r));
    }
};

double rel_frobenius(const Mat& A, const Mat& B) {
    return frobenius(sub(A, B)) / std::max(frobenius(B), 1e-300);
}

Mat mm_star_matrix(const ImpulsiveSystem& sys, const QuadratureRule& rule) {
    const std::size_t n = sys.dim();
    Mat MMs(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        AdjointControls adj = apply_M_star(sys, unit_vector(n, j), rule);
        Vec col = apply_M(sys, adj.u_nodes, adj.v_list, rule);
        for (std::size_t i = 0; i < n; ++i) MMs(i, j) = col[i];
    }
    return MMs;
}

void check_discrete_identities(Suite& s, const std::string& tag, const ImpulsiveSystem& sys,
                               const QuadratureRule& rule) {
    GramianBundle bundle = assemble(sys, rule);
    s.record(tag + ":gramian-factorization", rel_frobenius(mm_star_matrix(sys, rule), bundle.total),
             1e-10, "columnwise M M* against the assembled total, relative Frobenius");

    ControlLaw law = random_control(901, sys, rule);
    Trajectory traj = propagate(sys, law, rule, Nonlinearity::zero(), nullptr);
    double worst = 0.0;
    for (std::size_t k = 1; k <= sys.schedule.impulse_count(); ++k) {
        Vec unrolled = right_limit_unrolled(sys, law, rule, Nonlinearity::zero(), nullptr, k);
        worst = std::max(worst, norm(sub(unrolled, traj.right_limits[k - 1])) /
                                    (1.0 + norm(traj.right_limits[k - 1])));
    }
    if (sys.schedule.impulse_count() == 0)
        s.record_skip(tag + ":right-limit-unroll", "no impulses in this system");
    else
        s.record(tag + ":right-limit-unroll", worst, 1e-10,
                 "sequential propagation against the closed-form right limits");
}

}  // namespace

std::vector<CheckResult> run_verification(const VerifyOptions& opts) {
    Suite s;
    s.scale = opts.tolerance_scale;

    const Fixture scalar_fx = load_fixture("scalar-p1");
    const Fixture heat_fx = load_fixture("heat-n32-p2");
    const Fixture mu_fx = load_fixture("bounded-mu");
    RunConfig scalar = scalar_fx.parse();
    RunConfig heat = heat_fx.parse();
    RunConfig bounded = mu_fx.parse();

    // --- scalar closed forms -------------------------------------------------
    {
        GramianBundle cf = closed_form_bundle(scalar.system);
        double worst = std::abs(cf.gamma(0, 0) - scalar_fx.expect("gamma"));
        worst = std::max(worst, std::abs(cf.theta(0, 0) - scalar_fx.expect("theta")));
        worst = std::max(worst, std::abs(cf.total(0, 0) - scalar_fx.expect("total")));
        worst = std::max(worst, std::abs(cf.free_map(0, 0) - scalar_fx.expect("free_map")));
        s.record("scalar:closed-forms", worst, 1e-12, "analytic bundle against the derived constants");
    }

    // --- oracle equivalence ----------------------------------------------------
    {
        double worst = rel_frobenius(assemble(scalar.system, scalar.quadrature).total,
                                     closed_form_bundle(scalar.system).total);
        for (std::uint64_t seed = 11; seed < 14; ++seed) {
            ImpulsiveSystem sys = random_system(seed, 6, 2, false);
            worst = std::max(worst, rel_frobenius(assemble(sys, QuadratureRule{20, 1}).total,
                                                  closed_form_bundle(sys).total));
        }
        // stiff heat rates need panel refinement before quadrature resolves them
        worst = std::max(worst, rel_frobenius(assemble(heat.system, QuadratureRule{20, 192}).total,
                                              closed_form_bundle(heat.system).total));
        s.record("gramian:oracle-equivalence", worst, 1e-12,
                 "quadrature assembly against the analytic spectral bundle");
    }

    // --- discrete identities on seeded systems --------------------------------
    for (std::uint64_t seed = 1; seed <= 4; ++seed) {
        ImpulsiveSystem sys = random_system(seed, 8, 3, seed % 2 == 0, 1);
        check_discrete_identities(s, "seeded-" + std::to_string(seed), sys, QuadratureRule{12, 1});
    }
    if (opts.config != nullptr) {
        const RunConfig& c = *opts.config;
        check_discrete_identities(s, "config", c.system, c.quadrature);
        if (c.subspace.dim() == 0) {
            s.record_skip("config:inverse-bound", "empty subspace, margin undefined");
        } else {
            GramianBundle cb = assemble(c.system, c.quadrature);
            const double margin = delta_margin(cb.total, c.subspace);
            // The sharp min(alpha, delta) bound needs the operator to map the
            // subspace into itself; measure the cross-coupling to decide.
            Mat TQ = matmul(cb.total, c.subspace.basis);
            double coupling = 0.0;
            {
                Mat off = sub(TQ, matmul(projector_matrix(c.subspace), TQ));
                coupling = frobenius(off) / std::max(frobenius(cb.total), 1e-300);
            }
            if (margin <= 1e-12 * std::max(max_abs(cb.total), 1e-300)) {
                s.record_skip("config:inverse-bound", "subspace margin delta = 0");
            } else if (coupling > 1e-12) {
                s.record_skip("config:inverse-bound",
                              "operator couples the subspace to its complement; the sharp "
                              "min(alpha, delta) bound does not apply");
                double worst = 0.0;
                for (std::uint64_t hs = 0; hs < 20; ++hs) {
                    Vec h = random_vector(7700 + hs, c.system.dim());
                    for (double alpha : {1e-3, 0.1, 1.0}) {
                        const double beta = contraction_norm(cb.total, c.subspace, alpha);
                        Vec x = resolvent_solve_direct(cb.total, c.subspace, alpha, h);
                        Mat shifted = cb.total;
                        for (std::size_t i = 0; i < shifted.rows; ++i) shifted(i, i) += alpha;
                        const double rhs =
                            norm(scale(alpha, solve_sym(shifted, h))) / (1.0 - beta) + 1e-15;
                        worst = std::max(worst, alpha * norm(x) / rhs);
                    }
                }
                s.record("config:regularized-estimate", worst, 1.0 + 1e-12,
                         "||alpha x|| against the contraction-factor bound on the configured system");
            } else {
                double worst = 0.0;
                for (std::uint64_t hs = 0; hs < 20; ++hs) {
                    Vec h = random_vector(7700 + hs, c.system.dim());
                    for (double alpha : {1e-3, 0.1, 1.0}) {
                        Vec x = resolvent_solve_direct(cb.total, c.subspace, alpha, h);
                        worst = std::max(worst, norm(x) * std::min(alpha, margin) / norm(h));
                    }
                }
                s.record("config:inverse-bound", worst, 1.0 + 1e-12,
                         "||x|| min(alpha, delta) / ||h|| on the configured system");
            }
        }
    }

    // --- resolvent identity and bounds ----------------------------------------
    {
        double worst = 0.0;
        int done = 0;
        for (std::uint64_t seed = 21; done < 25; ++seed, ++done) {
            Rng rng(seed);
            const std::size_t n = 3 + (rng.next_u64() % 10);
            const std::size_t d = rng.next_u64() % (n + 1);
            Mat total = random_spd(seed * 13 + 1, n, 0.05);
            ProjectionSubspace P = random_subspace(seed * 13 + 2, n, d);
            const double alpha = std::pow(10.0, rng.uniform(-6.0, 1.0));
            Vec rhs = random_vector(seed * 13 + 3, n);
            Vec xd = resolvent_solve_direct(total, P, alpha, rhs);
            Vec xf = resolvent_solve_factorized(total, P, alpha, rhs);
            worst = std::max(worst, norm(sub(xd, xf)) / std::max(norm(xd), 1e-300));
        }
        s.record("resolvent:factorized-equals-direct", worst, 1e-11,
                 "one-solve factorization against the direct solve, seeded cases");
    }
    {
        // inverse bound on the fixtures whose operator decouples across the
        // subspace (scalar with full projection, heat with the matched d = 4
        // and the full-space projection)
        GramianBundle bs = assemble(scalar.system, scalar.quadrature);
        GramianBundle bh = assemble(heat.system, heat.quadrature);
        const std::vector<std::pair<const GramianBundle*, std::size_t>> cases = {
            {&bs, 1}, {&bh, 4}, {&bh, heat.system.dim()}};
        double worst = 0.0;
        bool any = false;
        for (const auto& [bundle, d] : cases) {
            ProjectionSubspace P = build_subspace(d, bundle->total.rows);
            const double margin = delta_margin(bundle->total, P);
            if (margin <= 0.0) continue;
            any = true;
            for (double alpha : {1e-4, 1e-2, 1.0, 10.0}) {
                for (std::uint64_t hs = 0; hs < 12; ++hs) {
                    Vec h = random_vector(700 + hs, bundle->total.rows);
                    Vec x = resolvent_solve_direct(bundle->total, P, alpha, h);
                    worst = std::max(worst, norm(x) * std::min(alpha, margin) / norm(h));
                }
            }
        }
        if (!any)
            s.record_skip("resolvent:inverse-bound", "no fixture with positive subspace margin");
        else
            s.record("resolvent:inverse-bound", worst, 1.0 + 1e-12,
                     "||x|| min(alpha, delta) / ||h|| across fixtures and seeded h");
    }
    {
        GramianBundle bh = assemble(heat.system, heat.quadrature);
        ProjectionSubspace P = build_subspace(4, heat.system.dim());
        const double lmin = smallest_eigenvalue_sym(bh.total);
        Vec h = random_vector(31, heat.system.dim());

        // vanishing-regularization decay on a fixed vector
        double worst_monotone = 0.0;
        double prev = std::numeric_limits<double>::infinity();
        double final_v = 0.0;
        double alpha_final = 0.0;
        for (int n = 0; n <= 20; ++n) {
            const double alpha = std::ldexp(1.0, -n);
            Mat shiftedT = bh.total;
            for (std::size_t i = 0; i < shiftedT.rows; ++i) shiftedT(i, i) += alpha;
            Vec v = scale(alpha, solve_sym(shiftedT, project(P, h)));
            const double nv = norm(v);
            worst_monotone = std::max(worst_monotone, nv - prev * (1.0 + 1e-12));
            prev = nv;
            final_v = nv;
            alpha_final = alpha;
        }
        const double bound = alpha_final / (alpha_final + lmin) * norm(h) * (1.0 + 1e-9);
        s.record("resolvent:decay-monotone", std::max(worst_monotone, 0.0), 1e-15,
                 "||alpha (alpha I + Total)^{-1} P h|| non-increasing along alpha = 2^{-n}");
        s.record("resolvent:decay-final", final_v / bound, 1.0,
                 "final decay value against the scalar bound alpha/(alpha + lambda_min)");

        // strict contraction on a log grid
        double worst_beta = 0.0;
        for (int k = -8; k <= 2; ++k)
            worst_beta = std::max(worst_beta, contraction_norm(bh.total, P, std::pow(10.0, k)));
        s.record("resolvent:contraction", worst_beta, 1.0 - 1e-12,
                 "||alpha (alpha I + Total)^{-1} P|| on the log grid [1e-8, 1e2]");

        // continuity in alpha
        double worst_cont = 0.0;
        const Vec hc = random_vector(32, heat.system.dim());
        const Vec grid = {1e-6, 1e-4, 1e-2, 0.1, 0.5, 1.0, 5.0};
        auto T_apply = [&](double alpha, const Vec& x) {
            Mat shiftedT = bh.total;
            for (std::size_t i = 0; i < shiftedT.rows; ++i) shiftedT(i, i) += alpha;
            return scale(alpha, solve_sym(shiftedT, project(P, x)));
        };
        for (double a1 : grid)
            for (double a : grid) {
                const double lhs = norm(sub(T_apply(a1, hc), T_apply(a, hc)));
                const double rhs = std::abs(a1 - a) / a1 * norm(hc) + 1e-12;
                worst_cont = std::max(worst_cont, lhs / rhs);
            }
        s.record("resolvent:alpha-continuity", worst_cont, 1.0,
                 "||T(a1)h - T(a)h|| against |a1 - a|/a1 ||h||");

        // regularized-inverse estimate through the contraction factor
        double worst_u3 = 0.0;
        for (double alpha : {1e-4, 1e-2, 1.0}) {
            const double beta = contraction_norm(bh.total, P, alpha);
            Vec x = resolvent_solve_direct(bh.total, P, alpha, hc);
            Mat shiftedT = bh.total;
            for (std::size_t i = 0; i < shiftedT.rows; ++i) shiftedT(i, i) += alpha;
            const double rhs = norm(scale(alpha, solve_sym(shiftedT, hc))) / (1.0 - beta) + 1e-15;
            worst_u3 = std::max(worst_u3, alpha * norm(x) / rhs);
        }
        s.record("resolvent:regularized-estimate", worst_u3, 1.0 + 1e-12,
                 "||alpha x|| against the contraction-factor bound");
    }

    // --- synthesis identities ---------------------------------------------------
    {
        GramianBundle bs = assemble(scalar.system, scalar.quadrature);
        SynthesisResult res =
            synthesize(scalar.system, bs, scalar.subspace, 0.1, scalar.target, scalar.quadrature);
        auto [gap, projected] = verify_residual(scalar.system, res, scalar.quadrature);
        s.record("synthesis:residual-identity-scalar", gap, 1e-9,
                 "simulated terminal residual against the predicted one");
        s.record("synthesis:scalar-residual-value",
                 std::abs(norm(res.predicted_residual) - scalar_fx.expect("residual_alpha_0.1")), 1e-9,
                 "predicted residual at alpha = 0.1 against scalar arithmetic");
        (void)projected;

        GramianBundle bh = assemble(heat.system, heat.quadrature);
        double worst_gap = 0.0, worst_proj = 0.0;
        for (double alpha : {1.0, 1e-2, 1e-4}) {
            SynthesisResult r =
                synthesize(heat.system, bh, heat.subspace, alpha, heat.target, heat.quadrature);
            auto [g2, p2] = verify_residual(heat.system, r, heat.quadrature);
            worst_gap = std::max(worst_gap, g2 / (1.0 + norm(heat.target)));
            worst_proj = std::max(worst_proj, p2 / (1.0 + norm(heat.target)));
        }
        s.record("synthesis:residual-identity-heat", worst_gap, 1e-9,
                 "simulated against predicted residual on the heat fixture");
        s.record("synthesis:exact-projection", worst_proj, 1e-10,
                 "projected terminal residual, relative to 1 + ||h||");

        // gradient against central differences
        double worst_grad = 0.0;
        for (int rep = 0; rep < 5; ++rep) {
            Vec phi = random_vector(500 + rep, heat.system.dim());
            Vec sigma = random_vector(600 + rep, heat.system.dim());
            auto [J0, grad] = cost_and_gradient(bh, heat.subspace, 0.3, phi, sigma);
            (void)J0;
            Vec dir = random_vector(650 + rep, heat.system.dim());
            dir = scale(1.0 / norm(dir), dir);
            const double eps = 1e-5;
            auto Jat = [&](double step) {
                return cost_and_gradient(bh, heat.subspace, 0.3, axpy(step, dir, phi), sigma).first;
            };
            const double fd = (Jat(eps) - Jat(-eps)) / (2.0 * eps);
            const double an = dot(grad, dir);
            worst_grad = std::max(worst_grad, std::abs(fd - an) / std::max(std::abs(an), 1e-12));
        }
        s.record("synthesis:gradient-check", worst_grad, 1e-6,
                 "analytic gradient against central differences on seeded points");

        // vanishing-alpha sweep on the linear heat fixture
        std::vector<SweepRow> rows = alpha_sweep(heat.system, heat.subspace, heat.target,
                                                 heat.alphas, Nonlinearity::zero(), heat.quadrature,
                                                 heat.picard);
        double worst_inc = 0.0;
        for (std::size_t i = 1; i < rows.size(); ++i)
            worst_inc = std::max(worst_inc,
                                 rows[i].residual_norm - rows[i - 1].residual_norm * (1.0 + 1e-12));
        s.record("synthesis:sweep-monotone", std::max(worst_inc, 0.0), 1e-15,
                 "terminal residual non-increasing along the descending alpha grid");
        s.record("synthesis:sweep-ratio", rows.back().residual_norm / rows.front().residual_norm,
                 1e-3, "residual(1e-6) against 1e-3 x residual(1) on the heat fixture");
    }

    // --- semilinear path ---------------------------------------------------------
    {
        GramianBundle bh = assemble(heat.system, heat.quadrature);
        // zero-nonlinearity collapse
        PicardResult pr = picard_solve(heat.system, bh, heat.subspace, 1e-2, heat.target,
                                       Nonlinearity::zero(), heat.quadrature, heat.picard);
        SynthesisResult lin =
            synthesize(heat.system, bh, heat.subspace, 1e-2, heat.target, heat.quadrature);
        Trajectory lin_traj = propagate(heat.system, lin.control, heat.quadrature,
                                        Nonlinearity::zero(), nullptr);
        s.record("semilinear:zero-collapse",
                 norm(sub(pr.trajectory.terminal_state(), lin_traj.terminal_state())), 1e-12,
                 "zero-nonlinearity fixed point against the linear pipeline");
        s.record_flag("semilinear:zero-collapse-iterations", pr.converged && pr.iterations == 1,
                      "constant map accepted after one application");

        // bounded nonlinearity: fixed point and the terminal-state identity
        PicardResult pb = picard_solve(bounded.system, bh, bounded.subspace, 1e-3, bounded.target,
                                       bounded.nonlinearity, bounded.quadrature, bounded.picard);
        s.record_flag("semilinear:bounded-converged",
                      pb.converged && pb.iterations <= bounded.picard.max_iter,
                      "fixed-point iteration on the bounded-mu fixture at alpha = 1e-3");
        if (pb.converged) {
            auto [gnext, res2] =
                fixed_point_map(bounded.system, bh, bounded.subspace, 1e-3, bounded.target,
                                pb.trajectory, bounded.nonlinearity, bounded.quadrature);
            (void)res2;
            s.record("semilinear:fixed-point-residual", pc_diff_norm(gnext, pb.trajectory),
                     10.0 * bounded.picard.tol, "one more map application moves the iterate");
            Vec sig = sigma_semilinear(bounded.system, bh, bounded.target, pb.trajectory,
                                       bounded.nonlinearity, bounded.quadrature);
            Vec pred = scale(-1e-3, sub(resolvent_solve_direct(bh.total, bounded.subspace, 1e-3, sig),
                                        project(bounded.subspace,
                                                resolvent_solve_direct(bh.total, bounded.subspace,
                                                                       1e-3, sig))));
            s.record("semilinear:terminal-identity",
                     norm(sub(sub(pb.trajectory.terminal_state(), bounded.target), pred)),
                     10.0 * bounded.picard.tol,
                     "z(b) - h against -alpha (I-P) (alpha (I-P) + Total)^{-1} sigma at the fixed point");
        } else {
            s.record_skip("semilinear:fixed-point-residual", "iteration did not converge");
            s.record_skip("semilinear:terminal-identity", "iteration did not converge");
        }

        // smallness condition reporting
        ConstantsReport cb = constants_report(bounded.system, bh, bounded.subspace, 1e-3,
                                              bounded.nonlinearity, bounded.quadrature,
                                              &bounded.target);
        s.record_flag("semilinear:smallness-bounded", cb.smallness_lhs == 0.0 && cb.satisfied,
                      "bounded nonlinearity has growth coefficient 0, condition holds");
        GramianBundle bsx = assemble(scalar.system, scalar.quadrature);
        ConstantsReport cl = constants_report(scalar.system, bsx, scalar.subspace, 1e-2,
                                              make_linear_growth_nonlinearity(5.0, 1.0),
                                              scalar.quadrature, &scalar.target);
        s.record_flag("semilinear:smallness-violated", !cl.satisfied && cl.smallness_lhs > 1.0,
                      "large linear growth at small alpha breaks the condition");
    }

    return s.results;
}

}  // namespace impfac
