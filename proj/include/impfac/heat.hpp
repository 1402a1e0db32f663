#pragma once

#include <string>

#include "impfac/semilinear.hpp"

namespace impfac {

// One-dimensional heat testbed in eigenfunction coordinates. Two rate
// conventions are shipped: Dirichlet uses the Laplacian eigenvalues
// n^2 pi^2 of the unit interval; Literal uses the plain n^2 listing.
enum class EigenConvention { Dirichlet, Literal };

struct HeatConfig {
    std::size_t modes = 32;  // truncation dimension N >= 2
    ImpulseSchedule schedule;
    EigenConvention convention = EigenConvention::Dirichlet;
    // control modes m = N - 1: input mode 2 drives 2 e_1 + e_2, input mode
    // n >= 3 drives e_n; jumps and impulse maps are -I (annihilating).
};

ImpulsiveSystem build_heat(const HeatConfig& cfg);

// Coefficient-space targets.
Vec build_target_eigenmode(std::size_t mode, std::size_t N);  // 1-based mode index
// c_n = xi_n * n^{-decay} with seeded standard normals, then normalized.
Vec build_target_smooth_random(double decay, std::uint64_t seed, std::size_t N);

// Subspace spanned by the first d eigenmodes.
ProjectionSubspace build_subspace(std::size_t d, std::size_t N);

struct SweepRow {
    double alpha = 0.0;
    double residual_norm = 0.0;            // simulated || z(b) - h ||
    double projected_residual_norm = 0.0;  // simulated || P (z(b) - h) ||
    double predicted_residual_norm = 0.0;
    int picard_iterations = 0;  // 0 on the linear path
    double delta = 0.0;         // subspace margin; NaN when the subspace is empty
    double total_min_eig = 0.0;
    std::string status = "ok";
};

// One row per alpha (descending). Linear path when mu is zero, otherwise the
// damped fixed-point iteration. Per-row failures land in the status column
// instead of aborting the sweep. Rows are deterministic for a fixed input.
std::vector<SweepRow> alpha_sweep(const ImpulsiveSystem& sys, const ProjectionSubspace& P,
                                  const Vec& h, const Vec& alphas, const Nonlinearity& mu,
                                  const QuadratureRule& rule, const PicardConfig& picard);

// CSV with the fixed column set:
// alpha,residual_norm,projected_residual_norm,predicted_residual_norm,
// picard_iterations,delta,total_min_eig,status
std::string sweep_csv(const std::vector<SweepRow>& rows);

std::string format_double(double v);  // shortest round-trip decimal

}  // namespace impfac
