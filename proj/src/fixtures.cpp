#include "impfac/fixtures.hpp"

namespace impfac {

namespace {

// Scalar single-impulse system with an inert jump: rate 1, unit control map,
// impulse at 0.5 on horizon 1, B_1 = D_1 = 0, z0 = 1, target 0.
// Closed forms: gamma = (1-exp(-1))/2, theta = exp(-1)(1-exp(-1))/2,
// total = (1-exp(-2))/2.
const char* kScalarP1 = R"JSON({
  "schema": 1,
  "seed": 7,
  "system": {
    "kind": "explicit",
    "backend": "spectral",
    "rates": [1.0],
    "control_map": [[1.0]],
    "jumps": [[[0.0]]],
    "impulse_maps": [[[0.0]]],
    "schedule": {"horizon": 1.0, "impulse_times": [0.5]},
    "initial_state": {"kind": "explicit", "coords": [1.0]}
  },
  "subspace": {"dim": 0},
  "target": {"kind": "zero"},
  "alphas": [1.0, 0.1, 0.01, 0.001, 0.0001, 1e-05, 1e-06],
  "quadrature": {"order": 20, "panels": 1},
  "nonlinearity": {"kind": "zero"},
  "picard": {"tol": 1e-10, "max_iter": 50, "damping": 1.0}
})JSON";

// Heat truncation, 32 modes, annihilating impulses at b/3 and 2b/3,
// 4-mode matched subspace, smooth seeded initial state and target.
const char* kHeatN32P2 = R"JSON({
  "schema": 1,
  "seed": 42,
  "system": {
    "kind": "heat",
    "modes": 32,
    "convention": "dirichlet",
    "schedule": {"horizon": 1.0, "impulse_times": [0.33333333333333331, 0.66666666666666663]},
    "initial_state": {"kind": "smooth_random", "decay": 2.0, "seed": 101}
  },
  "subspace": {"dim": 4},
  "target": {"kind": "smooth_random", "decay": 4.0, "seed": 7},
  "alphas": [1.0, 0.1, 0.01, 0.001, 0.0001, 1e-05, 1e-06],
  "quadrature": {"order": 20, "panels": 8},
  "nonlinearity": {"kind": "zero"},
  "picard": {"tol": 1e-10, "max_iter": 50, "damping": 1.0}
})JSON";

// Heat fixture plus a bounded nonlinearity: a smooth forcing term of size
// 0.05 and a tanh state feedback of size 1e-4 (so the fixed-point map stays
// contractive down to alpha = 1e-5).
const char* kBoundedMu = R"JSON({
  "schema": 1,
  "seed": 42,
  "system": {
    "kind": "heat",
    "modes": 32,
    "convention": "dirichlet",
    "schedule": {"horizon": 1.0, "impulse_times": [0.33333333333333331, 0.66666666666666663]},
    "initial_state": {"kind": "smooth_random", "decay": 2.0, "seed": 101}
  },
  "subspace": {"dim": 4},
  "target": {"kind": "smooth_random", "decay": 4.0, "seed": 7},
  "alphas": [1.0, 0.1, 0.01, 0.001, 0.0001, 1e-05],
  "quadrature": {"order": 20, "panels": 8},
  "nonlinearity": {
    "kind": "bounded",
    "amplitude": 0.05,
    "state_gain": 0.0001,
    "forcing_mode": 1,
    "sense_mode": 1,
    "output_mode": 2
  },
  "picard": {"tol": 1e-10, "max_iter": 50, "damping": 1.0}
})JSON";

Fixture make_scalar() {
    Fixture f;
    f.name = "scalar-p1";
    f.config_text = kScalarP1;
    f.expected = {
        {"gamma", 0.31606027941427883, 1e-12, "closed form (1 - exp(-1))/2"},
        {"theta", 0.11627207896741482, 1e-12, "closed form exp(-1)(1 - exp(-1))/2"},
        {"total", 0.43233235838169365, 1e-12, "closed form (1 - exp(-2))/2"},
        {"free_map", 0.36787944117144233, 1e-12, "exp(-0.5) twice across the inert jump"},
        {"residual_alpha_0.1", 0.06910709735733647, 1e-9,
         "0.1 * exp(-1) / (0.1 + (1 - exp(-2))/2), scalar resolvent arithmetic"},
    };
    return f;
}

Fixture make_heat() {
    Fixture f;
    f.name = "heat-n32-p2";
    f.config_text = kHeatN32P2;
    f.expected = {
        {"total_min_eig_floor", 0.0, 0.0,
         "strict positivity of the truncated operator; measured value must exceed this"},
    };
    return f;
}

Fixture make_bounded_mu() {
    Fixture f;
    f.name = "bounded-mu";
    f.config_text = kBoundedMu;
    f.expected = {
        {"smallness_lhs", 0.0, 0.0, "bounded nonlinearity has growth coefficient 0"},
    };
    return f;
}

}  // namespace

double Fixture::expect(const std::string& key) const {
    for (const auto& e : expected)
        if (e.name == key) return e.value;
    throw UnknownFixture("fixture '" + name + "' has no expected value '" + key + "'");
}

std::vector<std::string> list_fixtures() { return {"scalar-p1", "heat-n32-p2", "bounded-mu"}; }

Fixture load_fixture(const std::string& name) {
    if (name == "scalar-p1") return make_scalar();
    if (name == "heat-n32-p2") return make_heat();
    if (name == "bounded-mu") return make_bounded_mu();
    throw UnknownFixture("no fixture named '" + name + "'");
}

}  // namespace impfac
