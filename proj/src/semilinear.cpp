#include "impfac/semilinear.hpp"

#include <cmath>
#include <limits>

namespace impfac {

void PicardConfig::validate() const {
    if (!(tol > 0.0)) throw std::invalid_argument("picard tol must be positive");
    if (max_iter < 1) throw std::invalid_argument("picard max_iter must be >= 1");
    if (!(damping > 0.0) || damping > 1.0) throw std::invalid_argument("picard damping must be in (0, 1]");
}

Vec sigma_semilinear(const ImpulsiveSystem& sys, const GramianBundle& bundle, const Vec& h,
                     const Trajectory& traj, const Nonlinearity& mu, const QuadratureRule& rule) {
    Vec sigma = sigma_linear(sys, bundle, h);
    if (mu.is_zero()) return sigma;
    const std::size_t p = sys.schedule.impulse_count();
    if (traj.intervals.size() != p + 1) throw NodeMismatch("sigma_semilinear: trajectory interval count");
    for (std::size_t k = 0; k <= p; ++k) {
        const double a = sys.schedule.interval_start(k);
        const double b = sys.schedule.interval_end(k);
        IntervalNodes grid = interval_nodes(a, b, rule);
        if (traj.intervals[k].states.size() != grid.nodes.size() + 2)
            throw NodeMismatch("sigma_semilinear: trajectory nodes do not match the rule");
        Vec g(sys.dim(), 0.0);
        for (std::size_t nn = 0; nn < grid.nodes.size(); ++nn)
            g = axpy(grid.weights[nn],
                     apply(sys.semigroup, b - grid.nodes[nn], mu(grid.nodes[nn], traj.node_state(k, nn))),
                     g);
        sigma = sub(sigma, matvec(bundle.left_factors[k], g));
    }
    return sigma;
}

std::pair<Trajectory, SynthesisResult> fixed_point_map(const ImpulsiveSystem& sys,
                                                       const GramianBundle& bundle,
                                                       const ProjectionSubspace& P, double alpha,
                                                       const Vec& h, const Trajectory& z,
                                                       const Nonlinearity& mu,
                                                       const QuadratureRule& rule) {
    Vec sigma = sigma_semilinear(sys, bundle, h, z, mu, rule);
    Vec phi = resolvent_solve_direct(bundle.total, P, alpha, sigma);
    SynthesisResult res = synthesis_from_phi(sys, bundle, P, alpha, h, sigma, phi, rule);
    Trajectory out = propagate(sys, res.control, rule, mu, mu.is_zero() ? nullptr : &z);
    return {std::move(out), std::move(res)};
}

PicardResult picard_solve(const ImpulsiveSystem& sys, const GramianBundle& bundle,
                          const ProjectionSubspace& P, double alpha, const Vec& h,
                          const Nonlinearity& mu, const QuadratureRule& rule,
                          const PicardConfig& cfg) {
    cfg.validate();
    PicardResult out;

    // free evolution: zero controls, no forcing
    Trajectory z = propagate(sys, ControlLaw::zero(sys, rule), rule, Nonlinearity::zero(), nullptr);

    if (mu.is_zero()) {
        // The map does not depend on its input, so its first value is the
        // fixed point.
        auto [traj, res] = fixed_point_map(sys, bundle, P, alpha, h, z, mu, rule);
        out.trajectory = std::move(traj);
        out.synthesis = std::move(res);
        out.iterations = 1;
        out.converged = true;
        out.history.push_back(0.0);
        return out;
    }

    for (int n = 1; n <= cfg.max_iter; ++n) {
        auto [w, res] = fixed_point_map(sys, bundle, P, alpha, h, z, mu, rule);
        if (!w.finite()) {
            out.trajectory = std::move(z);
            out.synthesis = std::move(res);
            out.iterations = n;
            out.converged = false;
            out.history.push_back(std::numeric_limits<double>::infinity());
            return out;
        }
        Trajectory z_next =
            cfg.damping == 1.0 ? std::move(w) : trajectory_combo(cfg.damping, w, 1.0 - cfg.damping, z);
        const double delta = pc_diff_norm(z_next, z);
        out.history.push_back(delta);
        z = std::move(z_next);
        out.iterations = n;
        if (delta < cfg.tol) {
            out.trajectory = std::move(z);
            out.synthesis = std::move(res);
            out.converged = true;
            return out;
        }
        out.synthesis = std::move(res);
    }
    out.trajectory = std::move(z);
    out.converged = false;
    return out;
}

ConstantsReport constants_report(const ImpulsiveSystem& sys, const GramianBundle& bundle,
                                 const ProjectionSubspace& P, double alpha, const Nonlinearity& mu,
                                 const QuadratureRule& rule, const Vec* h) {
    sys.validate();
    if (!(alpha > 0.0)) throw std::invalid_argument("constants_report: alpha must be positive");
    const std::size_t p = sys.schedule.impulse_count();
    const double b = sys.schedule.horizon;
    ConstantsReport rep;

    // max ||S(t)|| over the shared time grid (nodes and interval endpoints)
    {
        Vec times{0.0, b};
        for (std::size_t k = 0; k <= p; ++k) {
            times.push_back(sys.schedule.interval_start(k));
            IntervalNodes grid =
                interval_nodes(sys.schedule.interval_start(k), sys.schedule.interval_end(k), rule);
            times.insert(times.end(), grid.nodes.begin(), grid.nodes.end());
        }
        for (double t : times)
            rep.M_S = std::max(rep.M_S, spectral_norm(operator_matrix(sys.semigroup, t)));
    }
    for (const Mat& B : sys.jumps) rep.M_B = std::max(rep.M_B, spectral_norm(B));
    for (const Mat& D : sys.impulse_maps) rep.M_D = std::max(rep.M_D, spectral_norm(D));
    rep.M_Omega = spectral_norm(sys.control_map);

    rep.M_tilde = 0.0;
    double ms_pow = 1.0;
    for (std::size_t k = 1; k <= p + 1; ++k) {
        ms_pow *= rep.M_S;
        rep.M_tilde += ms_pow;
    }
    rep.M_tilde *= rep.M_Omega;

    rep.delta = contraction_norm(bundle.total, P, alpha);

    double g_inf = 0.0;
    switch (mu.kind) {
        case GrowthKind::Zero:
            rep.d_coef = 0.0;
            g_inf = 0.0;
            break;
        case GrowthKind::Bounded:
            rep.d_coef = 0.0;
            g_inf = mu.bound;
            break;
        case GrowthKind::LinearGrowth:
            rep.d_coef = mu.d_coef;
            g_inf = mu.g_bound;
            break;
    }

    const double hn = (h != nullptr) ? norm(*h) : 0.0;
    const double z0n = norm(sys.initial_state);
    rep.M_1 = hn + static_cast<double>(p) * rep.M_S * rep.M_S * (1.0 + rep.M_B) * z0n;

    rep.M_2 = 0.0;
    for (std::size_t k = 0; k <= p; ++k)
        rep.M_2 += std::pow(1.0 + rep.M_B, static_cast<double>(k)) *
                   std::pow(rep.M_S, static_cast<double>(k + 1)) * b * g_inf;

    const double amp = 1.0 / (alpha * (1.0 - rep.delta));  // 1/(alpha (1 - delta))
    double transport_sum = 0.0;                            // sum_{m=1}^{p} (1+M_B)^m M_S^{m+1}
    for (std::size_t m = 1; m <= p; ++m)
        transport_sum += std::pow(1.0 + rep.M_B, static_cast<double>(m)) *
                         std::pow(rep.M_S, static_cast<double>(m + 1));

    rep.M_4 = transport_sum * rep.M_Omega * b * rep.M_tilde * rep.M_2 * amp +
              rep.M_tilde * rep.M_2 * b * amp + transport_sum * b * g_inf + rep.M_S * b * g_inf;
    rep.smallness_lhs = rep.d_coef * rep.M_4;
    rep.satisfied = rep.smallness_lhs < 1.0;

    double max_K = 0.0;
    for (const Mat& K : bundle.impulse_factors) max_K = std::max(max_K, spectral_norm(K));
    rep.impulse_control_bound = max_K * rep.M_1 * amp;

    double transport_sum_short = 0.0;  // sum_{m=1}^{p-1} (1+M_B)^m
    for (std::size_t m = 1; m + 1 <= p; ++m)
        transport_sum_short += std::pow(1.0 + rep.M_B, static_cast<double>(m));
    rep.M_3 = std::pow(1.0 + rep.M_B, static_cast<double>(p)) *
                  std::pow(rep.M_S, static_cast<double>(p + 1)) * z0n +
              transport_sum * rep.M_Omega * b * rep.M_tilde * rep.M_1 * amp +
              transport_sum_short * rep.M_S * rep.M_S * rep.M_D * rep.impulse_control_bound +
              rep.M_S * rep.M_D * rep.impulse_control_bound + rep.M_tilde * rep.M_1 * b * amp;
    return rep;
}

std::pair<double, double> l2_growth_check(const Trajectory& traj, const Nonlinearity& mu,
                                          double g_bound, double d_coef, double r1, double r2,
                                          const ImpulsiveSystem& sys, const QuadratureRule& rule) {
    if (mu.kind != GrowthKind::LinearGrowth && mu.kind != GrowthKind::Zero)
        throw UnsupportedGrowthKind("l2_growth_check: needs a linear-growth (or zero) nonlinearity");
    if (!(r2 > r1)) throw std::invalid_argument("l2_growth_check: empty window");
    const std::size_t p = sys.schedule.impulse_count();
    if (traj.intervals.size() != p + 1) throw NodeMismatch("l2_growth_check: trajectory interval count");

    // integrate ||mu||^2 with the trajectory's own node weights, over the
    // panels fully inside [r1, r2]
    double integral = 0.0;
    for (std::size_t k = 0; k <= p; ++k) {
        const double a = sys.schedule.interval_start(k);
        const double b = sys.schedule.interval_end(k);
        IntervalNodes grid = interval_nodes(a, b, rule);
        const double width = (b - a) / rule.panels_per_interval;
        for (int panel = 0; panel < rule.panels_per_interval; ++panel) {
            const double plo = a + panel * width;
            const double phi = plo + width;
            if (plo < r1 - 1e-12 || phi > r2 + 1e-12) continue;
            for (int i = 0; i < rule.order; ++i) {
                const std::size_t nn = static_cast<std::size_t>(panel * rule.order + i);
                const Vec mv = mu(grid.nodes[nn], traj.node_state(k, nn));
                integral += grid.weights[nn] * dot(mv, mv);
            }
        }
    }
    const double r = pc_norm(traj);
    const double bound = d_coef * d_coef * g_bound * g_bound * (r2 - r1) * r * r;
    return {integral, bound};
}

}  // namespace impfac
