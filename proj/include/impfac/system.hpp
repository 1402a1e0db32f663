#pragma once

#include <functional>
#include <optional>
#include <vector>

#include "impfac/quadrature.hpp"
#include "impfac/semigroup.hpp"

namespace impfac {

// Impulse instants 0 < t_1 < ... < t_p < b partition [0, b] into p+1
// intervals; interval k (0-based) is [t_k, t_{k+1}] with t_0 = 0 and
// t_{p+1} = b.
struct ImpulseSchedule {
    Vec impulse_times;
    double horizon = 1.0;

    std::size_t impulse_count() const { return impulse_times.size(); }
    std::size_t interval_count() const { return impulse_times.size() + 1; }
    double interval_start(std::size_t k) const { return k == 0 ? 0.0 : impulse_times[k - 1]; }
    double interval_end(std::size_t k) const {
        return k == impulse_times.size() ? horizon : impulse_times[k];
    }
    void validate() const;
};

// System data: evolution family, distributed control map, jump maps B_k,
// impulse control maps D_k, initial state and schedule.
struct ImpulsiveSystem {
    Semigroup semigroup;
    Mat control_map;               // N x m
    std::vector<Mat> jumps;        // B_k : N x N, k = 1..p
    std::vector<Mat> impulse_maps; // D_k : N x m_v, k = 1..p
    Vec initial_state;
    ImpulseSchedule schedule;

    std::size_t dim() const { return dimension(semigroup); }
    std::size_t control_dim() const { return control_map.cols; }
    std::size_t impulse_dim() const { return impulse_maps.empty() ? 0 : impulse_maps.front().cols; }
    void validate() const;
};

// State nonlinearity mu(t, z) with its growth class:
//   Zero          mu == 0
//   Bounded       ||mu(t, z)|| <= bound for all (t, z)
//   LinearGrowth  ||mu(t, z)|| <= g_bound * d_coef * ||z||
enum class GrowthKind { Zero, Bounded, LinearGrowth };

struct Nonlinearity {
    GrowthKind kind = GrowthKind::Zero;
    double bound = 0.0;
    double d_coef = 0.0;
    double g_bound = 0.0;
    std::function<Vec(double, const Vec&)> eval;

    bool is_zero() const { return kind == GrowthKind::Zero; }
    Vec operator()(double t, const Vec& z) const;
    static Nonlinearity zero() { return Nonlinearity{}; }
};

// Piecewise record of the state. Interval k stores samples at its start
// (the post-jump state for k >= 1), every shared quadrature node, and its
// end (the left limit at t_{k+1}).
struct IntervalSamples {
    Vec times;
    std::vector<Vec> states;
};

struct Trajectory {
    std::vector<IntervalSamples> intervals;
    std::vector<Vec> right_limits;  // z(t_k^+), k = 1..p

    const Vec& terminal_state() const { return intervals.back().states.back(); }
    // state at shared node j of interval k (nodes exclude the two endpoints)
    const Vec& node_state(std::size_t interval, std::size_t node) const {
        return intervals[interval].states[node + 1];
    }
    bool finite() const;
};

double pc_norm(const Trajectory& traj);
double pc_diff_norm(const Trajectory& a, const Trajectory& b);
// ca * a + cb * b on a shared sample grid
Trajectory trajectory_combo(double ca, const Trajectory& a, double cb, const Trajectory& b);

// Distributed + impulse control pair. The distributed part can carry a
// synthesized rule (seeds w_k, evaluable at any time via
// u(s) = Omega^T S^*(t_end(k) - s) w_k on interval k) and/or values tabulated
// at the shared quadrature nodes. Tabulated values take precedence on-node;
// the rule serves off-node evaluation.
struct ControlLaw {
    bool has_rule = false;
    std::vector<Vec> rule_seeds;                 // per interval k = 0..p, length N
    std::vector<std::vector<Vec>> node_values;   // [interval][node] -> u in R^m
    std::vector<Vec> impulse_controls;           // v_k in R^{m_v}, k = 1..p

    static ControlLaw zero(const ImpulsiveSystem& sys, const QuadratureRule& rule);
    bool has_tabulated() const { return !node_values.empty(); }
};

// Distributed control value at time t inside interval k. Uses the rule when
// present, otherwise Lagrange interpolation of the tabulated panel values.
Vec control_value(const ControlLaw& law, const ImpulsiveSystem& sys, const QuadratureRule& rule,
                  std::size_t interval, double t);

// Mild-solution propagation, interval by interval:
//   z(t) = S(t - t_k) z(t_k^+)
//        + int_{t_k}^{t} S(t - s) [Omega u(s) + mu(s, z_frozen(s))] ds
// with jumps z(t_k^+) = (I + B_k) z(t_k) + D_k v_k. The nonlinearity is
// evaluated on the frozen source trajectory (fixed-point-map semantics);
// a non-zero mu without mu_source throws MissingFrozenTrajectory.
// Interval-end states use exactly the shared quadrature nodes, which makes
// the discrete terminal-state identities hold to arithmetic precision.
Trajectory propagate(const ImpulsiveSystem& sys, const ControlLaw& control,
                     const QuadratureRule& rule, const Nonlinearity& mu,
                     const Trajectory* mu_source);

// The closed-form right limit at t_k (k = 1..p): transported initial state,
// transported distributed-control and nonlinearity integrals, and transported
// impulse controls, all on the same quadrature nodes as propagate.
Vec right_limit_unrolled(const ImpulsiveSystem& sys, const ControlLaw& control,
                         const QuadratureRule& rule, const Nonlinearity& mu,
                         const Trajectory* mu_source, std::size_t k);

}  // namespace impfac
