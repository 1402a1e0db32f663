#include <doctest.h>

#include <cmath>

#include "impfac/system.hpp"
#include "impfac/verify.hpp"

using namespace impfac;

namespace {

// scalar system: rate 1, unit control map, one impulse at 0.5 on horizon 1
ImpulsiveSystem scalar_system(double jump, double impulse_map) {
    ImpulsiveSystem sys;
    sys.semigroup = SpectralSemigroup{{1.0}};
    sys.control_map = Mat::identity(1);
    Mat B(1, 1), D(1, 1);
    B(0, 0) = jump;
    D(0, 0) = impulse_map;
    sys.jumps = {B};
    sys.impulse_maps = {D};
    sys.initial_state = {1.0};
    sys.schedule.horizon = 1.0;
    sys.schedule.impulse_times = {0.5};
    return sys;
}

const QuadratureRule kRule{20, 1};

}  // namespace

TEST_CASE("schedule validation") {
    ImpulseSchedule ok{{0.2, 0.5}, 1.0};
    CHECK_NOTHROW(ok.validate());
    CHECK_THROWS_AS((ImpulseSchedule{{0.5, 0.2}, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((ImpulseSchedule{{1.2}, 1.0}.validate()), ConfigError);
    CHECK_THROWS_AS((ImpulseSchedule{{0.0}, 1.0}.validate()), ConfigError);
    try {
        ImpulseSchedule{{1.2}, 1.0}.validate();
    } catch (const ConfigError& e) {
        CHECK(e.field_path == "schedule.impulse_times[0]");
    }
}

TEST_CASE("impulse-free decay") {
    ImpulsiveSystem sys = scalar_system(0.0, 0.0);
    Trajectory traj = propagate(sys, ControlLaw::zero(sys, kRule), kRule, Nonlinearity::zero(), nullptr);
    CHECK(traj.terminal_state()[0] == doctest::Approx(std::exp(-1.0)).epsilon(1e-12));
    // sup attained at t = 0
    CHECK(pc_norm(traj) == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("annihilating jump forces the right limit to -v") {
    ImpulsiveSystem sys = scalar_system(-1.0, -1.0);
    ControlLaw law = ControlLaw::zero(sys, kRule);
    law.impulse_controls[0] = {0.37};
    Trajectory traj = propagate(sys, law, kRule, Nonlinearity::zero(), nullptr);
    CHECK(traj.right_limits[0][0] == doctest::Approx(-0.37).epsilon(1e-13));
}

TEST_CASE("zero data stays at zero") {
    ImpulsiveSystem sys = scalar_system(0.3, 0.5);
    sys.initial_state = {0.0};
    Trajectory traj = propagate(sys, ControlLaw::zero(sys, kRule), kRule, Nonlinearity::zero(), nullptr);
    CHECK(pc_norm(traj) == 0.0);
}

TEST_CASE("missing frozen trajectory is an error") {
    ImpulsiveSystem sys = scalar_system(0.0, 0.0);
    Nonlinearity mu;
    mu.kind = GrowthKind::Bounded;
    mu.bound = 1.0;
    mu.eval = [](double, const Vec& z) { return Vec(z.size(), 1.0); };
    CHECK_THROWS_AS(propagate(sys, ControlLaw::zero(sys, kRule), kRule, mu, nullptr),
                    MissingFrozenTrajectory);
}

TEST_CASE("pc norm basics") {
    ImpulsiveSystem sys = scalar_system(0.0, 0.0);
    sys.initial_state = {0.0};
    Trajectory zero = propagate(sys, ControlLaw::zero(sys, kRule), kRule, Nonlinearity::zero(), nullptr);
    CHECK(pc_norm(zero) == 0.0);
    CHECK_THROWS_AS(pc_norm(Trajectory{}), EmptyTrajectory);
}

TEST_CASE("unrolled right limit, boundary cases") {
    ImpulsiveSystem sys = scalar_system(0.25, 0.0);
    ControlLaw law = ControlLaw::zero(sys, kRule);
    // k = 1 with no inputs: (I + B_1) S(t_1) z0
    Vec r = right_limit_unrolled(sys, law, kRule, Nonlinearity::zero(), nullptr, 1);
    CHECK(r[0] == doctest::Approx(1.25 * std::exp(-0.5)).epsilon(1e-12));

    // only the terminal impulse term survives with z0 = 0, u = 0
    ImpulsiveSystem sys2 = scalar_system(0.25, 2.0);
    sys2.initial_state = {0.0};
    ControlLaw law2 = ControlLaw::zero(sys2, kRule);
    law2.impulse_controls[0] = {0.5};
    Vec r2 = right_limit_unrolled(sys2, law2, kRule, Nonlinearity::zero(), nullptr, 1);
    CHECK(r2[0] == doctest::Approx(2.0 * 0.5).epsilon(1e-13));

    CHECK_THROWS_AS(right_limit_unrolled(sys, law, kRule, Nonlinearity::zero(), nullptr, 2),
                    IndexOutOfRange);
    CHECK_THROWS_AS(right_limit_unrolled(sys, law, kRule, Nonlinearity::zero(), nullptr, 0),
                    IndexOutOfRange);
}

TEST_CASE("sequential propagation equals the unrolled closed form") {
    const QuadratureRule rule{12, 1};
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        ImpulsiveSystem sys = random_system(seed, 8, 3, seed % 2 == 1, 1);
        ControlLaw law = random_control(seed + 100, sys, rule);
        Trajectory traj = propagate(sys, law, rule, Nonlinearity::zero(), nullptr);
        for (std::size_t k = 1; k <= sys.schedule.impulse_count(); ++k) {
            Vec unrolled = right_limit_unrolled(sys, law, rule, Nonlinearity::zero(), nullptr, k);
            CHECK(norm(sub(unrolled, traj.right_limits[k - 1])) <=
                  1e-10 * (1.0 + norm(traj.right_limits[k - 1])));
        }
    }
}

TEST_CASE("propagation is affine in the inputs") {
    const QuadratureRule rule{12, 1};
    ImpulsiveSystem sys = random_system(4, 6, 2, false, 2);
    ControlLaw u1 = random_control(11, sys, rule);
    ControlLaw u2 = random_control(12, sys, rule);

    // superposition of the input-only responses plus the free evolution
    ImpulsiveSystem homogeneous = sys;
    homogeneous.initial_state.assign(sys.dim(), 0.0);
    Trajectory free_ev = propagate(sys, ControlLaw::zero(sys, rule), rule, Nonlinearity::zero(), nullptr);
    Trajectory y1 = propagate(homogeneous, u1, rule, Nonlinearity::zero(), nullptr);
    Trajectory y2 = propagate(homogeneous, u2, rule, Nonlinearity::zero(), nullptr);

    ControlLaw both = u1;
    for (std::size_t k = 0; k < both.node_values.size(); ++k)
        for (std::size_t n = 0; n < both.node_values[k].size(); ++n)
            both.node_values[k][n] = add(both.node_values[k][n], u2.node_values[k][n]);
    for (std::size_t k = 0; k < both.impulse_controls.size(); ++k)
        both.impulse_controls[k] = add(both.impulse_controls[k], u2.impulse_controls[k]);
    Trajectory combined = propagate(sys, both, rule, Nonlinearity::zero(), nullptr);

    Trajectory superposed = trajectory_combo(1.0, free_ev, 1.0, trajectory_combo(1.0, y1, 1.0, y2));
    CHECK(pc_diff_norm(combined, superposed) <= 1e-11 * (1.0 + pc_norm(combined)));
}

TEST_CASE("no impulses reduces to the plain integral form") {
    ImpulsiveSystem sys;
    sys.semigroup = SpectralSemigroup{{0.8}};
    sys.control_map = Mat::identity(1);
    sys.initial_state = {1.0};
    sys.schedule.horizon = 1.0;
    const QuadratureRule rule{20, 1};
    ControlLaw law = ControlLaw::zero(sys, rule);
    for (auto& u : law.node_values[0]) u = {1.0};  // constant control
    Trajectory traj = propagate(sys, law, rule, Nonlinearity::zero(), nullptr);
    // z(1) = e^{-0.8} + (1 - e^{-0.8})/0.8
    const double expected = std::exp(-0.8) + (1.0 - std::exp(-0.8)) / 0.8;
    CHECK(traj.terminal_state()[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("interior samples follow the mild solution") {
    // scalar impulse-free decay with constant control: z(t) known in closed form
    ImpulsiveSystem sys;
    sys.semigroup = SpectralSemigroup{{1.0}};
    sys.control_map = Mat::identity(1);
    sys.initial_state = {1.0};
    sys.schedule.horizon = 1.0;
    const QuadratureRule rule{10, 2};
    ControlLaw law = ControlLaw::zero(sys, rule);
    for (auto& u : law.node_values[0]) u = {0.5};
    Trajectory traj = propagate(sys, law, rule, Nonlinearity::zero(), nullptr);
    const auto& iv = traj.intervals[0];
    for (std::size_t j = 0; j < iv.times.size(); ++j) {
        const double t = iv.times[j];
        const double expected = std::exp(-t) + 0.5 * (1.0 - std::exp(-t));
        CHECK(iv.states[j][0] == doctest::Approx(expected).epsilon(1e-9));
    }
}

TEST_CASE("frozen trajectory must sit on the shared grid") {
    ImpulsiveSystem sys = scalar_system(0.0, 0.0);
    Trajectory coarse = propagate(sys, ControlLaw::zero(sys, QuadratureRule{8, 1}),
                                  QuadratureRule{8, 1}, Nonlinearity::zero(), nullptr);
    Nonlinearity mu;
    mu.kind = GrowthKind::LinearGrowth;
    mu.d_coef = 1.0;
    mu.g_bound = 1.0;
    mu.eval = [](double, const Vec& z) { return z; };
    CHECK_THROWS_AS(propagate(sys, ControlLaw::zero(sys, kRule), kRule, mu, &coarse), NodeMismatch);
}

TEST_CASE("nonlinearity evaluates on the frozen source") {
    ImpulsiveSystem sys = scalar_system(0.0, 0.0);
    Trajectory frozen = propagate(sys, ControlLaw::zero(sys, kRule), kRule, Nonlinearity::zero(), nullptr);
    Nonlinearity mu;
    mu.kind = GrowthKind::LinearGrowth;
    mu.d_coef = 1.0;
    mu.g_bound = 1.0;
    mu.eval = [](double, const Vec& z) { return z; };
    Trajectory forced = propagate(sys, ControlLaw::zero(sys, kRule), kRule, mu, &frozen);
    // z' = -z + e^{-t} (frozen source), z(0) = 1  =>  z(t) = (1 + t) e^{-t}
    CHECK(forced.terminal_state()[0] == doctest::Approx(2.0 * std::exp(-1.0)).epsilon(1e-10));
}
