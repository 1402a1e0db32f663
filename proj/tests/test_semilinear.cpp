#include <doctest.h>

#include <cmath>

#include "impfac/fixtures.hpp"
#include "impfac/semilinear.hpp"
#include "impfac/verify.hpp"

using namespace impfac;

namespace {

struct ScalarFixture {
    RunConfig cfg;
    GramianBundle bundle;
    ScalarFixture() : cfg(load_fixture("scalar-p1").parse()), bundle(assemble(cfg.system, cfg.quadrature)) {}
};

Nonlinearity bounded_scalar_mu() {
    // 0.1 z / (1 + z^2): bounded by 0.05, smooth in z
    Nonlinearity mu;
    mu.kind = GrowthKind::Bounded;
    mu.bound = 0.05;
    mu.eval = [](double, const Vec& z) {
        Vec out(z.size());
        for (std::size_t i = 0; i < z.size(); ++i) out[i] = 0.1 * z[i] / (1.0 + z[i] * z[i]);
        return out;
    };
    return mu;
}

}  // namespace

TEST_CASE("semilinear data term") {
    ScalarFixture fx;
    Trajectory free_ev = propagate(fx.cfg.system, ControlLaw::zero(fx.cfg.system, fx.cfg.quadrature),
                                   fx.cfg.quadrature, Nonlinearity::zero(), nullptr);

    // zero nonlinearity collapses to the linear data term
    Vec s0 = sigma_semilinear(fx.cfg.system, fx.bundle, fx.cfg.target, free_ev, Nonlinearity::zero(),
                              fx.cfg.quadrature);
    CHECK(norm(sub(s0, sigma_linear(fx.cfg.system, fx.bundle, fx.cfg.target))) == 0.0);

    // matching target: zero
    Vec h_free = matvec(fx.bundle.free_map, fx.cfg.system.initial_state);
    CHECK(norm(sigma_semilinear(fx.cfg.system, fx.bundle, h_free, free_ev, Nonlinearity::zero(),
                                fx.cfg.quadrature)) <= 1e-14);

    // constant forcing: sigma = h - F z0 - c (1 - e^{-1})
    const double c = 0.3;
    Nonlinearity constant;
    constant.kind = GrowthKind::Bounded;
    constant.bound = c;
    constant.eval = [c](double, const Vec& z) { return Vec(z.size(), c); };
    Vec s = sigma_semilinear(fx.cfg.system, fx.bundle, fx.cfg.target, free_ev, constant,
                             fx.cfg.quadrature);
    const double expected = 0.0 - std::exp(-1.0) - c * (1.0 - std::exp(-1.0));
    CHECK(s[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("the synthesis map is constant when the nonlinearity vanishes") {
    ScalarFixture fx;
    Trajectory free_ev = propagate(fx.cfg.system, ControlLaw::zero(fx.cfg.system, fx.cfg.quadrature),
                                   fx.cfg.quadrature, Nonlinearity::zero(), nullptr);
    Trajectory other = free_ev;
    for (auto& iv : other.intervals)
        for (auto& st : iv.states)
            for (double& x : st) x += 0.5;
    auto [t1, r1] = fixed_point_map(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target,
                                    free_ev, Nonlinearity::zero(), fx.cfg.quadrature);
    auto [t2, r2] = fixed_point_map(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target,
                                    other, Nonlinearity::zero(), fx.cfg.quadrature);
    CHECK(pc_diff_norm(t1, t2) == 0.0);
    CHECK(norm(sub(r1.phi, r2.phi)) == 0.0);
}

TEST_CASE("zero-nonlinearity iteration collapses to the linear pipeline") {
    ScalarFixture fx;
    PicardResult pr = picard_solve(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target,
                                   Nonlinearity::zero(), fx.cfg.quadrature, fx.cfg.picard);
    CHECK(pr.converged);
    CHECK(pr.iterations == 1);
    SynthesisResult lin =
        synthesize(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target, fx.cfg.quadrature);
    Trajectory lin_traj =
        propagate(fx.cfg.system, lin.control, fx.cfg.quadrature, Nonlinearity::zero(), nullptr);
    CHECK(pc_diff_norm(pr.trajectory, lin_traj) <= 1e-12);
    CHECK(norm(sub(pr.synthesis.phi, lin.phi)) <= 1e-12);
}

TEST_CASE("bounded nonlinearity converges on the scalar fixture") {
    ScalarFixture fx;
    Nonlinearity mu = bounded_scalar_mu();
    PicardConfig cfg{1e-10, 50, 1.0};
    PicardResult pr = picard_solve(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target, mu,
                                   fx.cfg.quadrature, cfg);
    REQUIRE(pr.converged);
    CHECK(pr.iterations <= 50);

    // fixed-point residual: one more application barely moves the iterate
    auto [next, res] = fixed_point_map(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target,
                                       pr.trajectory, mu, fx.cfg.quadrature);
    (void)res;
    CHECK(pc_diff_norm(next, pr.trajectory) <= 10.0 * cfg.tol);

    // terminal-state identity at the fixed point
    Vec sigma = sigma_semilinear(fx.cfg.system, fx.bundle, fx.cfg.target, pr.trajectory, mu,
                                 fx.cfg.quadrature);
    Vec phi = resolvent_solve_direct(fx.bundle.total, fx.cfg.subspace, 0.1, sigma);
    Vec predicted = scale(-0.1, sub(phi, project(fx.cfg.subspace, phi)));
    Vec gap = sub(sub(pr.trajectory.terminal_state(), fx.cfg.target), predicted);
    CHECK(norm(gap) <= 10.0 * cfg.tol);
}

TEST_CASE("runaway growth is reported, not thrown") {
    ScalarFixture fx;
    Nonlinearity mu = make_linear_growth_nonlinearity(40.0, 1.0);
    PicardConfig cfg{1e-12, 25, 1.0};
    PicardResult pr = picard_solve(fx.cfg.system, fx.bundle, fx.cfg.subspace, 1e-4, fx.cfg.target, mu,
                                   fx.cfg.quadrature, cfg);
    CHECK_FALSE(pr.converged);
    CHECK(pr.iterations <= 25);
    CHECK_FALSE(pr.history.empty());
}

TEST_CASE("damped iteration still reaches the fixed point") {
    ScalarFixture fx;
    Nonlinearity mu = bounded_scalar_mu();
    PicardConfig damped{1e-10, 100, 0.5};
    PicardResult pr = picard_solve(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target, mu,
                                   fx.cfg.quadrature, damped);
    REQUIRE(pr.converged);
    auto [next, res] = fixed_point_map(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1, fx.cfg.target,
                                       pr.trajectory, mu, fx.cfg.quadrature);
    (void)res;
    CHECK(pc_diff_norm(next, pr.trajectory) <= 20.0 * damped.tol);
}

TEST_CASE("constants report") {
    ScalarFixture fx;
    // bounded kind: growth coefficient zero, condition holds automatically
    ConstantsReport rb = constants_report(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1,
                                          bounded_scalar_mu(), fx.cfg.quadrature, &fx.cfg.target);
    CHECK(rb.d_coef == 0.0);
    CHECK(rb.smallness_lhs == 0.0);
    CHECK(rb.satisfied);

    // zero nonlinearity: same conclusion
    ConstantsReport rz = constants_report(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.1,
                                          Nonlinearity::zero(), fx.cfg.quadrature);
    CHECK(rz.satisfied);

    // large linear growth at small alpha: violated
    ConstantsReport rl = constants_report(fx.cfg.system, fx.bundle, fx.cfg.subspace, 0.01,
                                          make_linear_growth_nonlinearity(5.0, 1.0),
                                          fx.cfg.quadrature, &fx.cfg.target);
    CHECK_FALSE(rl.satisfied);
    CHECK(rl.smallness_lhs > 1.0);

    // norm constants of the scalar fixture have closed forms
    CHECK(rb.M_S == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rb.M_B == 0.0);
    CHECK(rb.M_Omega == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(rb.M_tilde == doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("L2 growth bound") {
    // impulse-free scalar decay z(t) = e^{-t} on [0, 1]
    ImpulsiveSystem sys;
    sys.semigroup = SpectralSemigroup{{1.0}};
    sys.control_map = Mat::identity(1);
    sys.initial_state = {1.0};
    sys.schedule.horizon = 1.0;
    const QuadratureRule rule{20, 1};
    Trajectory traj = propagate(sys, ControlLaw::zero(sys, rule), rule, Nonlinearity::zero(), nullptr);

    Nonlinearity mu = make_linear_growth_nonlinearity(1.0, 1.0);  // mu(t, z) = z
    auto [integral, bound] = l2_growth_check(traj, mu, 1.0, 1.0, 0.0, 1.0, sys, rule);
    CHECK(integral == doctest::Approx((1.0 - std::exp(-2.0)) / 2.0).epsilon(1e-10));
    CHECK(bound == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(integral <= bound);

    // zero nonlinearity: zero integral, same bound formula
    auto [zero_int, zero_bound] = l2_growth_check(traj, Nonlinearity::zero(), 1.0, 1.0, 0.0, 1.0, sys, rule);
    CHECK(zero_int == 0.0);
    CHECK(zero_bound == doctest::Approx(1.0));

    // zero trajectory: both vanish
    ImpulsiveSystem sys0 = sys;
    sys0.initial_state = {0.0};
    Trajectory tz = propagate(sys0, ControlLaw::zero(sys0, rule), rule, Nonlinearity::zero(), nullptr);
    auto [zi, zb] = l2_growth_check(tz, mu, 1.0, 1.0, 0.0, 1.0, sys0, rule);
    CHECK(zi == 0.0);
    CHECK(zb == 0.0);

    // bounded nonlinearities are outside this check's contract
    CHECK_THROWS_AS(l2_growth_check(traj, bounded_scalar_mu(), 1.0, 1.0, 0.0, 1.0, sys, rule),
                    UnsupportedGrowthKind);
}
