#include <doctest.h>

#include <cmath>

#include "impfac/resolvent.hpp"
#include "impfac/verify.hpp"

using namespace impfac;

namespace {

Mat diag2(double a, double b) {
    Mat D(2, 2);
    D(0, 0) = a;
    D(1, 1) = b;
    return D;
}

ProjectionSubspace span_e1(std::size_t n) {
    ProjectionSubspace P;
    P.basis = Mat(n, 1);
    P.basis(0, 0) = 1.0;
    return P;
}

ProjectionSubspace full(std::size_t n) {
    ProjectionSubspace P;
    P.basis = Mat::identity(n);
    return P;
}

const double kScalarTotal = (1.0 - std::exp(-2.0)) / 2.0;

}  // namespace

TEST_CASE("subspace margin") {
    CHECK(delta_margin(diag2(2.0, 3.0), span_e1(2)) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(delta_margin(Mat::identity(3), random_subspace(4, 3, 2)) ==
          doctest::Approx(1.0).epsilon(1e-10));
    Mat W(1, 1);
    W(0, 0) = kScalarTotal;
    CHECK(delta_margin(W, full(1)) == doctest::Approx(kScalarTotal).epsilon(1e-12));
    CHECK_THROWS_AS(delta_margin(diag2(1.0, 1.0), ProjectionSubspace::empty(2)), EmptySubspace);
}

TEST_CASE("direct solve examples") {
    // empty subspace, zero operator: pure alpha inverse
    Vec h{1.5, -2.0};
    Vec x = resolvent_solve_direct(Mat::zero(2, 2), ProjectionSubspace::empty(2), 0.5, h);
    CHECK(norm(sub(x, scale(2.0, h))) <= 1e-13);

    // identity operator on the full subspace: the shift vanishes
    x = resolvent_solve_direct(Mat::identity(2), full(2), 3.7, h);
    CHECK(norm(sub(x, h)) <= 1e-12);

    // scalar arithmetic
    Mat W(1, 1);
    W(0, 0) = kScalarTotal;
    x = resolvent_solve_direct(W, ProjectionSubspace::empty(1), 0.1, Vec{1.0});
    CHECK(x[0] == doctest::Approx(1.0 / (0.1 + kScalarTotal)).epsilon(1e-13));
}

TEST_CASE("factorized solve examples") {
    Vec h{0.3, 0.9};
    // empty subspace collapses the correction entirely
    Mat T = random_spd(3, 2, 0.2);
    Vec direct = solve_sym(add(T, scale(0.4, Mat::identity(2))), h);
    Vec fact = resolvent_solve_factorized(T, ProjectionSubspace::empty(2), 0.4, h);
    CHECK(norm(sub(direct, fact)) <= 1e-13);

    // scalar full-space algebra: the operator reduces to W itself
    Mat W(1, 1);
    W(0, 0) = 0.7;
    Vec xf = resolvent_solve_factorized(W, full(1), 0.25, Vec{1.0});
    CHECK(xf[0] == doctest::Approx(1.0 / 0.7).epsilon(1e-12));

    // seeded cross-validation
    Mat T4 = random_spd(8, 4, 0.1);
    ProjectionSubspace P = random_subspace(9, 4, 2);
    Vec rhs = random_vector(10, 4);
    Vec xd = resolvent_solve_direct(T4, P, 0.05, rhs);
    Vec xf4 = resolvent_solve_factorized(T4, P, 0.05, rhs);
    CHECK(norm(sub(xd, xf4)) <= 1e-11 * norm(xd));
}

TEST_CASE("factorized equals direct on 100 seeded cases") {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        Rng rng(seed + 3000);
        const std::size_t n = 2 + (rng.next_u64() % 12);
        const std::size_t d = rng.next_u64() % (n + 1);
        Mat total = random_spd(seed * 7 + 1, n, 0.05);
        ProjectionSubspace P = random_subspace(seed * 7 + 2, n, d);
        const double alpha = std::pow(10.0, rng.uniform(-6.0, 1.0));
        Vec rhs = random_vector(seed * 7 + 3, n);
        Vec xd = resolvent_solve_direct(total, P, alpha, rhs);
        Vec xf = resolvent_solve_factorized(total, P, alpha, rhs);
        CHECK(norm(sub(xd, xf)) <= 1e-11 * std::max(norm(xd), 1e-300));
    }
}

TEST_CASE("singular operator on the subspace is refused") {
    // total vanishes on the subspace and alpha only regularizes its complement
    Mat T = diag2(0.0, 1.0);
    CHECK_THROWS_AS(resolvent_solve_direct(T, span_e1(2), 0.5, Vec{1.0, 1.0}), SingularOperator);
}

TEST_CASE("contraction norm examples") {
    CHECK(contraction_norm(Mat::identity(2), full(2), 1.0) == doctest::Approx(0.5).epsilon(1e-11));
    CHECK(contraction_norm(Mat::identity(2), ProjectionSubspace::empty(2), 1.0) == 0.0);
    Mat W(1, 1);
    W(0, 0) = kScalarTotal;
    CHECK(contraction_norm(W, full(1), 0.1) ==
          doctest::Approx(0.1 / (0.1 + kScalarTotal)).epsilon(1e-11));
}

TEST_CASE("inverse bound on decoupled fixtures") {
    // diagonal totals with coordinate-aligned subspaces decouple, so the
    // min(alpha, delta) bound is sharp
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        Rng rng(seed + 500);
        const std::size_t n = 3 + (rng.next_u64() % 6);
        Mat T(n, n);
        for (std::size_t i = 0; i < n; ++i) T(i, i) = rng.uniform(0.05, 2.0);
        const std::size_t d = 1 + (rng.next_u64() % n);
        ProjectionSubspace P;
        P.basis = Mat(n, d);
        for (std::size_t j = 0; j < d; ++j) P.basis(j, j) = 1.0;
        const double margin = delta_margin(T, P);
        REQUIRE(margin > 0.0);
        for (double alpha : {1e-3, 0.1, 1.0, 10.0}) {
            for (std::uint64_t hs = 0; hs < 5; ++hs) {
                Vec h = random_vector(seed * 100 + hs, n);
                Vec x = resolvent_solve_direct(T, P, alpha, h);
                CHECK(norm(x) <= (1.0 + 1e-12) / std::min(alpha, margin) * norm(h));
            }
        }
    }
    // full-space projection: the bound reduces to the smallest eigenvalue
    Mat T = random_spd(1234, 6, 0.1);
    const double margin = delta_margin(T, full(6));
    Vec h = random_vector(77, 6);
    Vec x = resolvent_solve_direct(T, full(6), 0.3, h);
    CHECK(norm(x) <= (1.0 + 1e-12) / std::min(0.3, margin) * norm(h));
}

TEST_CASE("vanishing regularization decays on fixed vectors") {
    Mat T = random_spd(42, 8, 0.02);
    ProjectionSubspace P = random_subspace(43, 8, 3);
    Vec h = random_vector(44, 8);
    const double lmin = smallest_eigenvalue_sym(T);
    double prev = std::numeric_limits<double>::infinity();
    double value = 0.0, alpha = 0.0;
    for (int n = 0; n <= 20; ++n) {
        alpha = std::ldexp(1.0, -n);
        Mat shifted = T;
        for (std::size_t i = 0; i < 8; ++i) shifted(i, i) += alpha;
        value = norm(scale(alpha, solve_sym(shifted, project(P, h))));
        CHECK(value <= prev * (1.0 + 1e-12));
        prev = value;
    }
    CHECK(value <= alpha / (alpha + lmin) * norm(h) * (1.0 + 1e-9));
}

TEST_CASE("contraction norm stays below one on the log grid") {
    Mat T = random_spd(45, 7, 0.05);
    ProjectionSubspace P = random_subspace(46, 7, 4);
    for (int k = -8; k <= 2; ++k) {
        const double alpha = std::pow(10.0, k);
        CHECK(contraction_norm(T, P, alpha) < 1.0);
    }
}

TEST_CASE("alpha continuity bound") {
    Mat T = random_spd(47, 6, 0.05);
    ProjectionSubspace P = random_subspace(48, 6, 3);
    Vec h = random_vector(49, 6);
    auto T_apply = [&](double alpha) {
        Mat shifted = T;
        for (std::size_t i = 0; i < 6; ++i) shifted(i, i) += alpha;
        return scale(alpha, solve_sym(shifted, project(P, h)));
    };
    const Vec grid{1e-5, 1e-3, 0.05, 0.3, 1.0, 4.0};
    for (double a1 : grid)
        for (double a : grid)
            CHECK(norm(sub(T_apply(a1), T_apply(a))) <= std::abs(a1 - a) / a1 * norm(h) + 1e-12);
}

TEST_CASE("regularized inverse estimate through the contraction factor") {
    Mat T = random_spd(50, 9, 0.05);
    ProjectionSubspace P = random_subspace(51, 9, 4);
    Vec h = random_vector(52, 9);
    for (double alpha : {1e-4, 1e-2, 0.5, 2.0}) {
        const double beta = contraction_norm(T, P, alpha);
        REQUIRE(beta < 1.0);
        Vec x = resolvent_solve_direct(T, P, alpha, h);
        Mat shifted = T;
        for (std::size_t i = 0; i < 9; ++i) shifted(i, i) += alpha;
        const double rhs = norm(scale(alpha, solve_sym(shifted, h))) / (1.0 - beta);
        CHECK(alpha * norm(x) <= rhs * (1.0 + 1e-12) + 1e-15);
    }
}
