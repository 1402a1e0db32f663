#include <doctest.h>

#include <cmath>

#include "impfac/fixtures.hpp"
#include "impfac/verify.hpp"

using namespace impfac;

namespace {

HeatConfig demo_config(EigenConvention conv, std::size_t modes) {
    HeatConfig hc;
    hc.modes = modes;
    hc.convention = conv;
    hc.schedule.horizon = 1.0;
    hc.schedule.impulse_times = {1.0 / 3.0, 2.0 / 3.0};
    return hc;
}

}  // namespace

TEST_CASE("heat system construction") {
    ImpulsiveSystem sys = build_heat(demo_config(EigenConvention::Dirichlet, 8));
    CHECK(sys.dim() == 8);
    CHECK(sys.control_dim() == 7);

    // input mode 2 drives 2 e_1 + e_2
    Vec u(7, 0.0);
    u[0] = 1.0;
    Vec driven = matvec(sys.control_map, u);
    CHECK(driven[0] == doctest::Approx(2.0));
    CHECK(driven[1] == doctest::Approx(1.0));
    CHECK(norm(sub(driven, add(scale(2.0, unit_vector(8, 0)), unit_vector(8, 1)))) == 0.0);

    // input mode 3 drives e_3
    Vec u3(7, 0.0);
    u3[1] = 1.0;
    CHECK(norm(sub(matvec(sys.control_map, u3), unit_vector(8, 2))) == 0.0);

    const double pi = 3.14159265358979323846;
    CHECK(std::get<SpectralSemigroup>(sys.semigroup).decay_rates[2] ==
          doctest::Approx(9.0 * pi * pi));
    ImpulsiveSystem lit = build_heat(demo_config(EigenConvention::Literal, 8));
    CHECK(std::get<SpectralSemigroup>(lit.semigroup).decay_rates[2] == doctest::Approx(9.0));

    CHECK_THROWS_AS(build_heat(demo_config(EigenConvention::Dirichlet, 1)), ConfigError);
}

TEST_CASE("annihilating impulse forces the right limit to -v") {
    ImpulsiveSystem sys = build_heat(demo_config(EigenConvention::Literal, 4));
    sys.initial_state = random_vector(5, 4);
    const QuadratureRule rule{12, 1};
    ControlLaw law = ControlLaw::zero(sys, rule);
    Vec v = random_vector(6, 4);
    law.impulse_controls[0] = v;
    Trajectory traj = propagate(sys, law, rule, Nonlinearity::zero(), nullptr);
    CHECK(norm(add(traj.right_limits[0], v)) <= 1e-13 * (1.0 + norm(v)));
}

TEST_CASE("targets and subspaces") {
    CHECK(norm(sub(build_target_eigenmode(1, 6), unit_vector(6, 0))) == 0.0);
    CHECK(norm(sub(build_target_eigenmode(6, 6), unit_vector(6, 5))) == 0.0);
    CHECK_THROWS_AS(build_target_eigenmode(7, 6), IndexOutOfRange);

    Vec a = build_target_smooth_random(2.0, 7, 16);
    Vec b = build_target_smooth_random(2.0, 7, 16);
    CHECK(norm(sub(a, b)) == 0.0);  // seeded reproducibility
    CHECK(norm(a) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(norm(sub(a, build_target_smooth_random(2.0, 8, 16))) > 1e-3);

    CHECK(build_subspace(0, 5).dim() == 0);
    CHECK(build_subspace(5, 5).dim() == 5);
    ProjectionSubspace P = build_subspace(4, 32);
    CHECK(P.dim() == 4);
    for (std::size_t j = 0; j < 4; ++j) CHECK(P.basis(j, j) == 1.0);
    CHECK_THROWS_AS(build_subspace(6, 5), IndexOutOfRange);
}

TEST_CASE("truncated heat operator is strictly positive in both conventions") {
    for (auto conv : {EigenConvention::Dirichlet, EigenConvention::Literal}) {
        for (std::size_t N : {8u, 32u}) {
            ImpulsiveSystem sys = build_heat(demo_config(conv, N));
            GramianBundle B = assemble(sys, QuadratureRule{20, 8});
            CHECK(smallest_eigenvalue_sym(B.total) > 0.0);
        }
    }
}

TEST_CASE("sweep basics") {
    ImpulsiveSystem sys = build_heat(demo_config(EigenConvention::Dirichlet, 8));
    sys.initial_state = build_target_smooth_random(2.0, 3, 8);
    Vec h = build_target_smooth_random(3.0, 4, 8);
    const QuadratureRule rule{20, 8};
    PicardConfig picard;

    // empty subspace, two alphas: strictly positive and decreasing
    auto rows = alpha_sweep(sys, ProjectionSubspace::empty(8), h, Vec{1.0, 0.1},
                            Nonlinearity::zero(), rule, picard);
    REQUIRE(rows.size() == 2);
    CHECK(rows[0].residual_norm > 0.0);
    CHECK(rows[1].residual_norm > 0.0);
    CHECK(rows[1].residual_norm < rows[0].residual_norm);
    CHECK(std::isnan(rows[0].delta));
    CHECK(rows[0].status == "ok");

    // full projection: exact matching at every alpha
    auto full_rows = alpha_sweep(sys, build_subspace(8, 8), h, Vec{1.0, 0.1, 0.01},
                                 Nonlinearity::zero(), rule, picard);
    for (const auto& r : full_rows) {
        CHECK(r.residual_norm <= 1e-9);
        CHECK(r.projected_residual_norm <= 1e-9);
    }

    // target equal to the free final state: all residuals vanish
    Vec h_free = matvec(free_final_map(sys), sys.initial_state);
    auto zero_rows = alpha_sweep(sys, build_subspace(4, 8), h_free, Vec{1.0, 0.1},
                                 Nonlinearity::zero(), rule, picard);
    for (const auto& r : zero_rows) CHECK(r.residual_norm <= 1e-12);

    // grid validation
    CHECK_THROWS(alpha_sweep(sys, build_subspace(4, 8), h, Vec{0.1, 1.0}, Nonlinearity::zero(),
                             rule, picard));
    CHECK_THROWS(alpha_sweep(sys, build_subspace(4, 8), h, Vec{}, Nonlinearity::zero(), rule,
                             picard));
}

TEST_CASE("heat fixture sweep meets the vanishing-alpha contract") {
    RunConfig cfg = load_fixture("heat-n32-p2").parse();
    auto rows = alpha_sweep(cfg.system, cfg.subspace, cfg.target, cfg.alphas, cfg.nonlinearity,
                            cfg.quadrature, cfg.picard);
    REQUIRE(rows.size() == cfg.alphas.size());
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].residual_norm <= rows[i - 1].residual_norm * (1.0 + 1e-12));
    CHECK(rows.back().residual_norm <= 1e-3 * rows.front().residual_norm);
    for (const auto& r : rows) {
        CHECK(r.projected_residual_norm <= 1e-10 * (1.0 + norm(cfg.target)));
        CHECK(r.status == "ok");
        CHECK(r.total_min_eig > 0.0);
        CHECK(r.delta > 0.0);
    }
}

TEST_CASE("bounded-nonlinearity sweep decays like the linear one") {
    RunConfig cfg = load_fixture("bounded-mu").parse();
    auto rows = alpha_sweep(cfg.system, cfg.subspace, cfg.target, cfg.alphas, cfg.nonlinearity,
                            cfg.quadrature, cfg.picard);
    REQUIRE(rows.size() == cfg.alphas.size());
    for (const auto& r : rows) {
        CHECK(r.status == "ok");
        CHECK(r.picard_iterations <= cfg.picard.max_iter);
        CHECK(r.projected_residual_norm <= 1e-8 * (1.0 + norm(cfg.target)));
    }
    for (std::size_t i = 1; i < rows.size(); ++i)
        CHECK(rows[i].residual_norm <= rows[i - 1].residual_norm * (1.0 + 1e-9));
    CHECK(rows.back().residual_norm <= 1e-2 * rows.front().residual_norm);
}

TEST_CASE("sweep CSV is byte-identical across worker counts") {
    RunConfig cfg = load_fixture("heat-n32-p2").parse();
    const int before = worker_count();
    std::string csv1, csv4;
    set_worker_count(1);
    csv1 = sweep_csv(alpha_sweep(cfg.system, cfg.subspace, cfg.target, cfg.alphas, cfg.nonlinearity,
                                 cfg.quadrature, cfg.picard));
    set_worker_count(4);
    csv4 = sweep_csv(alpha_sweep(cfg.system, cfg.subspace, cfg.target, cfg.alphas, cfg.nonlinearity,
                                 cfg.quadrature, cfg.picard));
    set_worker_count(before);
    CHECK(csv1 == csv4);
    CHECK(csv1.substr(0, 5) == "alpha");
}
