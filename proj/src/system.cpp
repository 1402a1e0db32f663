#include "impfac/system.hpp"

#include <algorithm>
#include <cmath>

namespace impfac {

void ImpulseSchedule::validate() const {
    if (!(horizon > 0.0) || !std::isfinite(horizon))
        throw ConfigError("schedule.horizon", "must be positive and finite");
    double prev = 0.0;
    for (std::size_t k = 0; k < impulse_times.size(); ++k) {
        const double t = impulse_times[k];
        if (!(t > prev) || !(t < horizon))
            throw ConfigError("schedule.impulse_times[" + std::to_string(k) + "]",
                              "times must satisfy 0 < t_1 < ... < t_p < horizon");
        prev = t;
    }
}

void ImpulsiveSystem::validate() const {
    schedule.validate();
    const std::size_t n = dim();
    const std::size_t p = schedule.impulse_count();
    if (initial_state.size() != n) throw ConfigError("system.initial_state", "length != state dimension");
    if (control_map.rows != n || control_map.cols < 1)
        throw ConfigError("system.control_map", "must be N x m with m >= 1");
    if (jumps.size() != p) throw ConfigError("system.jumps", "need one jump map per impulse time");
    if (impulse_maps.size() != p)
        throw ConfigError("system.impulse_maps", "need one impulse map per impulse time");
    for (std::size_t k = 0; k < p; ++k) {
        if (jumps[k].rows != n || jumps[k].cols != n)
            throw ConfigError("system.jumps[" + std::to_string(k) + "]", "must be N x N");
        if (impulse_maps[k].rows != n)
            throw ConfigError("system.impulse_maps[" + std::to_string(k) + "]", "row count != N");
        if (impulse_maps[k].cols != impulse_maps[0].cols)
            throw ConfigError("system.impulse_maps[" + std::to_string(k) + "]",
                              "impulse control dimension must be uniform");
        if (!all_finite(jumps[k]) || !all_finite(impulse_maps[k]))
            throw ConfigError("system.jumps/impulse_maps", "non-finite entries");
    }
    if (!all_finite(control_map)) throw ConfigError("system.control_map", "non-finite entries");
}

Vec Nonlinearity::operator()(double t, const Vec& z) const {
    if (kind == GrowthKind::Zero) return Vec(z.size(), 0.0);
    return eval(t, z);
}

bool Trajectory::finite() const {
    for (const auto& iv : intervals)
        for (const auto& s : iv.states)
            if (!all_finite(s)) return false;
    for (const auto& r : right_limits)
        if (!all_finite(r)) return false;
    return true;
}

double pc_norm(const Trajectory& traj) {
    if (traj.intervals.empty()) throw EmptyTrajectory("pc_norm: no samples");
    double m = 0.0;
    for (const auto& iv : traj.intervals)
        for (const auto& s : iv.states) m = std::max(m, norm(s));
    for (const auto& r : traj.right_limits) m = std::max(m, norm(r));
    return m;
}

double pc_diff_norm(const Trajectory& a, const Trajectory& b) {
    if (a.intervals.size() != b.intervals.size()) throw NodeMismatch("pc_diff_norm: interval count");
    double m = 0.0;
    for (std::size_t k = 0; k < a.intervals.size(); ++k) {
        const auto& sa = a.intervals[k].states;
        const auto& sb = b.intervals[k].states;
        if (sa.size() != sb.size()) throw NodeMismatch("pc_diff_norm: sample count");
        for (std::size_t j = 0; j < sa.size(); ++j) m = std::max(m, norm(sub(sa[j], sb[j])));
    }
    for (std::size_t k = 0; k < a.right_limits.size(); ++k)
        m = std::max(m, norm(sub(a.right_limits[k], b.right_limits[k])));
    return m;
}

Trajectory trajectory_combo(double ca, const Trajectory& a, double cb, const Trajectory& b) {
    if (a.intervals.size() != b.intervals.size()) throw NodeMismatch("trajectory_combo: interval count");
    Trajectory out = a;
    for (std::size_t k = 0; k < a.intervals.size(); ++k) {
        const auto& sb = b.intervals[k].states;
        auto& so = out.intervals[k].states;
        if (so.size() != sb.size()) throw NodeMismatch("trajectory_combo: sample count");
        for (std::size_t j = 0; j < so.size(); ++j) so[j] = axpy(cb, sb[j], scale(ca, a.intervals[k].states[j]));
    }
    for (std::size_t k = 0; k < a.right_limits.size(); ++k)
        out.right_limits[k] = axpy(cb, b.right_limits[k], scale(ca, a.right_limits[k]));
    return out;
}

ControlLaw ControlLaw::zero(const ImpulsiveSystem& sys, const QuadratureRule& rule) {
    ControlLaw law;
    const std::size_t m = sys.control_dim();
    const std::size_t nodes = rule.nodes_per_interval();
    law.node_values.assign(sys.schedule.interval_count(), std::vector<Vec>(nodes, Vec(m, 0.0)));
    law.impulse_controls.assign(sys.schedule.impulse_count(), Vec(sys.impulse_dim(), 0.0));
    return law;
}

// ---------------------------------------------------------------------------
// Barycentric Lagrange interpolation on one panel's nodes

namespace {

Vec barycentric_coeffs(const Vec& x, std::size_t lo, std::size_t count, double t, double panel_lo,
                       double panel_hi) {
    // map to [-1, 1] so the weights are scale-free
    const double mid = 0.5 * (panel_lo + panel_hi);
    const double half = 0.5 * (panel_hi - panel_lo);
    Vec xi(count);
    for (std::size_t i = 0; i < count; ++i) xi[i] = (x[lo + i] - mid) / half;
    const double ti = (t - mid) / half;

    Vec w(count, 1.0);
    for (std::size_t i = 0; i < count; ++i)
        for (std::size_t j = 0; j < count; ++j)
            if (i != j) w[i] /= (xi[i] - xi[j]);

    Vec c(count, 0.0);
    double denom = 0.0;
    for (std::size_t i = 0; i < count; ++i) {
        const double d = ti - xi[i];
        if (std::abs(d) < 1e-300) {
            std::fill(c.begin(), c.end(), 0.0);
            c[i] = 1.0;
            return c;
        }
        c[i] = w[i] / d;
        denom += c[i];
    }
    for (double& v : c) v /= denom;
    return c;
}

struct IntervalGeometry {
    double start, end;
    IntervalNodes grid;
    int order;
    int panels;

    std::size_t panel_of(double t) const {
        const double width = (end - start) / panels;
        int p = static_cast<int>((t - start) / width);
        p = std::clamp(p, 0, panels - 1);
        return static_cast<std::size_t>(p);
    }
    double panel_lo(std::size_t p) const { return start + (end - start) * static_cast<double>(p) / panels; }
    double panel_hi(std::size_t p) const {
        return start + (end - start) * static_cast<double>(p + 1) / panels;
    }
};

Vec interp_on_panel(const IntervalGeometry& g, const std::vector<Vec>& values, double t) {
    const std::size_t p = g.panel_of(t);
    const std::size_t lo = p * static_cast<std::size_t>(g.order);
    Vec c = barycentric_coeffs(g.grid.nodes, lo, g.order, t, g.panel_lo(p), g.panel_hi(p));
    Vec out(values[lo].size(), 0.0);
    for (std::size_t i = 0; i < c.size(); ++i) out = axpy(c[i], values[lo + i], out);
    return out;
}

}  // namespace

Vec control_value(const ControlLaw& law, const ImpulsiveSystem& sys, const QuadratureRule& rule,
                  std::size_t interval, double t) {
    const double a = sys.schedule.interval_start(interval);
    const double b = sys.schedule.interval_end(interval);
    if (law.has_rule) {
        const Vec& seed = law.rule_seeds[interval];
        return matvec_transposed(sys.control_map, apply_adjoint(sys.semigroup, b - t, seed));
    }
    if (!law.has_tabulated()) return Vec(sys.control_dim(), 0.0);
    IntervalGeometry g{a, b, interval_nodes(a, b, rule), rule.order, rule.panels_per_interval};
    return interp_on_panel(g, law.node_values[interval], t);
}

// ---------------------------------------------------------------------------
// Propagation

namespace {

// Forcing f(s_n) = Omega u(s_n) + mu(s_n, z_frozen(s_n)) at the shared nodes
// of one interval.
std::vector<Vec> node_forcing(const ImpulsiveSystem& sys, const ControlLaw& law,
                              const IntervalNodes& grid, const QuadratureRule& rule,
                              std::size_t interval, const Nonlinearity& mu,
                              const Trajectory* mu_source) {
    const std::size_t M = grid.nodes.size();
    if (!mu.is_zero() && mu_source->intervals[interval].states.size() != M + 2)
        throw NodeMismatch("frozen trajectory does not match the quadrature grid");
    std::vector<Vec> f(M);
    for (std::size_t n = 0; n < M; ++n) {
        Vec u;
        if (law.has_tabulated()) {
            if (law.node_values[interval].size() != M)
                throw NodeMismatch("control tabulation does not match the quadrature grid");
            u = law.node_values[interval][n];
        } else {
            u = control_value(law, sys, rule, interval, grid.nodes[n]);
        }
        f[n] = matvec(sys.control_map, u);
        if (!mu.is_zero()) {
            const Vec& zf = mu_source->node_state(interval, n);
            f[n] = add(f[n], mu(grid.nodes[n], zf));
        }
    }
    return f;
}

}  // namespace

Trajectory propagate(const ImpulsiveSystem& sys, const ControlLaw& control,
                     const QuadratureRule& rule, const Nonlinearity& mu,
                     const Trajectory* mu_source) {
    sys.validate();
    rule.validate();
    if (!mu.is_zero() && mu_source == nullptr)
        throw MissingFrozenTrajectory("propagate: non-zero nonlinearity needs a frozen source trajectory");
    if (!mu.is_zero() && mu_source->intervals.size() != sys.schedule.interval_count())
        throw NodeMismatch("propagate: frozen trajectory interval count");

    const std::size_t p = sys.schedule.impulse_count();
    // inner rule for the partial-panel tail of interior samples
    Vec inner_x, inner_w;
    gauss_legendre(8, inner_x, inner_w);

    Trajectory traj;
    traj.intervals.resize(p + 1);
    Vec z_start = sys.initial_state;

    for (std::size_t k = 0; k <= p; ++k) {
        const double a = sys.schedule.interval_start(k);
        const double bnd = sys.schedule.interval_end(k);
        IntervalGeometry g{a, bnd, interval_nodes(a, bnd, rule), rule.order, rule.panels_per_interval};
        const std::size_t M = g.grid.nodes.size();
        std::vector<Vec> f = node_forcing(sys, control, g.grid, rule, k, mu, mu_source);

        auto& iv = traj.intervals[k];
        iv.times.resize(M + 2);
        iv.states.resize(M + 2);
        iv.times.front() = a;
        iv.states.front() = z_start;
        for (std::size_t n = 0; n < M; ++n) iv.times[n + 1] = g.grid.nodes[n];
        iv.times.back() = bnd;

        // Interval end with the full shared rule (this is the value the
        // Gramian-side identities see).
        {
            Vec z_end = apply(sys.semigroup, bnd - a, z_start);
            for (std::size_t n = 0; n < M; ++n)
                z_end = axpy(g.grid.weights[n], apply(sys.semigroup, bnd - g.grid.nodes[n], f[n]), z_end);
            iv.states.back() = z_end;
        }

        // Interior samples: complete panels use the shared nodes; the partial
        // panel up to t_j uses a local rule with interpolated forcing.
        const std::size_t q = static_cast<std::size_t>(rule.order);
        std::vector<Vec> frozen_nodes;
        if (!mu.is_zero())
            frozen_nodes.assign(mu_source->intervals[k].states.begin() + 1,
                                mu_source->intervals[k].states.end() - 1);
#pragma omp parallel for schedule(static)
        for (std::size_t j = 0; j < M; ++j) {
            const double tj = g.grid.nodes[j];
            Vec z = apply(sys.semigroup, tj - a, z_start);
            const std::size_t panel_j = j / q;
            for (std::size_t n = 0; n < panel_j * q; ++n)
                z = axpy(g.grid.weights[n], apply(sys.semigroup, tj - g.grid.nodes[n], f[n]), z);
            const double plo = g.panel_lo(panel_j);
            const double half = 0.5 * (tj - plo);
            if (half > 0.0) {
                for (std::size_t i = 0; i < inner_x.size(); ++i) {
                    const double s = plo + half * (inner_x[i] + 1.0);
                    Vec fs = matvec(sys.control_map, control_value(control, sys, rule, k, s));
                    if (!mu.is_zero()) fs = add(fs, mu(s, interp_on_panel(g, frozen_nodes, s)));
                    z = axpy(half * inner_w[i], apply(sys.semigroup, tj - s, fs), z);
                }
            }
            iv.states[j + 1] = z;
        }

        if (k < p) {
            const Vec& z_end = iv.states.back();
            Vec z_plus = add(z_end, matvec(sys.jumps[k], z_end));  // (I + B_{k+1}) z(t_{k+1}^-)
            if (!control.impulse_controls.empty())
                z_plus = add(z_plus, matvec(sys.impulse_maps[k], control.impulse_controls[k]));
            traj.right_limits.push_back(z_plus);
            z_start = z_plus;
        }
    }
    return traj;
}

Vec right_limit_unrolled(const ImpulsiveSystem& sys, const ControlLaw& control,
                         const QuadratureRule& rule, const Nonlinearity& mu,
                         const Trajectory* mu_source, std::size_t k) {
    sys.validate();
    const std::size_t p = sys.schedule.impulse_count();
    if (k < 1 || k > p) throw IndexOutOfRange("right_limit_unrolled: k must be in 1..p");
    if (!mu.is_zero() && mu_source == nullptr)
        throw MissingFrozenTrajectory("right_limit_unrolled: non-zero nonlinearity needs a frozen source");

    auto delta = [&](std::size_t j) {  // t_j - t_{j-1}, 1-based j
        return sys.schedule.impulse_times[j - 1] - (j == 1 ? 0.0 : sys.schedule.impulse_times[j - 2]);
    };
    auto jump = [&](std::size_t j, Vec v) {  // (I + B_j) v, 1-based j
        return add(v, matvec(sys.jumps[j - 1], v));
    };

    // transported initial state
    Vec acc = sys.initial_state;
    for (std::size_t j = 1; j <= k; ++j) acc = jump(j, apply(sys.semigroup, delta(j), acc));

    // transported distributed-control and nonlinearity integrals
    for (std::size_t i = 1; i <= k; ++i) {
        const std::size_t iv = i - 1;  // 0-based interval index
        const double a = sys.schedule.interval_start(iv);
        const double b = sys.schedule.interval_end(iv);
        IntervalNodes grid = interval_nodes(a, b, rule);
        std::vector<Vec> f = node_forcing(sys, control, grid, rule, iv, mu, mu_source);
        Vec g(sys.dim(), 0.0);
        for (std::size_t n = 0; n < grid.nodes.size(); ++n)
            g = axpy(grid.weights[n], apply(sys.semigroup, b - grid.nodes[n], f[n]), g);
        Vec y = jump(i, g);
        for (std::size_t j = i + 1; j <= k; ++j) y = jump(j, apply(sys.semigroup, delta(j), y));
        acc = add(acc, y);
    }

    // transported impulse controls: sum_{i=2}^{k} prod_{j=k}^{i}(I+B_j)S(.) D_{i-1} v_{i-1} + D_k v_k
    if (!control.impulse_controls.empty()) {
        for (std::size_t i = 2; i <= k; ++i) {
            Vec y = matvec(sys.impulse_maps[i - 2], control.impulse_controls[i - 2]);
            for (std::size_t j = i; j <= k; ++j) y = jump(j, apply(sys.semigroup, delta(j), y));
            acc = add(acc, y);
        }
        acc = add(acc, matvec(sys.impulse_maps[k - 1], control.impulse_controls[k - 1]));
    }
    return acc;
}

}  // namespace impfac
