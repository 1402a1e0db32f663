#include "impfac/synthesis.hpp"

namespace impfac {

Vec sigma_linear(const ImpulsiveSystem& sys, const GramianBundle& bundle, const Vec& h) {
    if (h.size() != sys.dim()) throw DimensionMismatch("sigma_linear: target length");
    return sub(h, matvec(bundle.free_map, sys.initial_state));
}

SynthesisResult synthesis_from_phi(const ImpulsiveSystem& sys, const GramianBundle& bundle,
                                   const ProjectionSubspace& P, double alpha, const Vec& h,
                                   const Vec& sigma, const Vec& phi, const QuadratureRule& rule) {
    SynthesisResult res;
    res.alpha = alpha;
    res.phi = phi;
    res.sigma = sigma;
    res.target = h;
    res.subspace = P;

    AdjointControls adj = apply_M_star(sys, phi, rule);
    res.control.has_rule = true;
    res.control.rule_seeds.reserve(bundle.left_factors.size());
    for (const Mat& L : bundle.left_factors)
        res.control.rule_seeds.push_back(matvec_transposed(L, phi));
    res.control.node_values = std::move(adj.u_nodes);
    res.control.impulse_controls = std::move(adj.v_list);

    // -alpha (I - P) phi, computed from the already-solved phi
    res.predicted_residual = scale(-alpha, sub(phi, project(P, phi)));
    return res;
}

SynthesisResult synthesize(const ImpulsiveSystem& sys, const GramianBundle& bundle,
                           const ProjectionSubspace& P, double alpha, const Vec& h,
                           const QuadratureRule& rule) {
    Vec sigma = sigma_linear(sys, bundle, h);
    Vec phi = resolvent_solve_direct(bundle.total, P, alpha, sigma);
    return synthesis_from_phi(sys, bundle, P, alpha, h, sigma, phi, rule);
}

std::pair<double, Vec> cost_and_gradient(const GramianBundle& bundle, const ProjectionSubspace& P,
                                         double alpha, const Vec& phi, const Vec& sigma) {
    if (phi.size() != bundle.total.rows || sigma.size() != phi.size())
        throw DimensionMismatch("cost_and_gradient: vector lengths");
    Vec total_phi = matvec(bundle.total, phi);
    Vec ortho = sub(phi, project(P, phi));  // (I - P) phi
    const double J = 0.5 * dot(total_phi, phi) + 0.5 * alpha * dot(ortho, phi) - dot(phi, sigma);
    Vec grad = sub(add(total_phi, scale(alpha, ortho)), sigma);
    return {J, grad};
}

std::pair<double, double> verify_residual(const ImpulsiveSystem& sys, const SynthesisResult& result,
                                          const QuadratureRule& rule) {
    Trajectory traj = propagate(sys, result.control, rule, Nonlinearity::zero(), nullptr);
    Vec residual = sub(traj.terminal_state(), result.target);
    const double identity_gap = norm(sub(residual, result.predicted_residual));
    const double projected = norm(project(result.subspace, residual));
    return {identity_gap, projected};
}

}  // namespace impfac
