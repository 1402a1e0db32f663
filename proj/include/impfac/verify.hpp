#pragma once

#include "impfac/fixtures.hpp"
#include "impfac/rng.hpp"

namespace impfac {

struct CheckResult {
    std::string name;
    bool pass = false;
    bool skipped = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

struct VerifyOptions {
    // Scales every tolerance; 0 demonstrates the failure path.
    double tolerance_scale = 1.0;
    // Optional user system to run the generic identity checks on, in
    // addition to the built-in fixtures.
    const RunConfig* config = nullptr;
};

std::vector<CheckResult> run_verification(const VerifyOptions& opts = {});

// Seeded generators shared by the verification suite and the test binaries.
ImpulsiveSystem random_system(std::uint64_t seed, std::size_t max_dim, std::size_t max_impulses,
                              bool dense_backend, std::size_t min_impulses = 0);
ControlLaw random_control(std::uint64_t seed, const ImpulsiveSystem& sys, const QuadratureRule& rule);
Mat random_spd(std::uint64_t seed, std::size_t n, double shift);
ProjectionSubspace random_subspace(std::uint64_t seed, std::size_t n, std::size_t d);
Vec random_vector(std::uint64_t seed, std::size_t n);

}  // namespace impfac
