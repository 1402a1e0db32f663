#pragma once

#include "impfac/gramian.hpp"
#include "impfac/resolvent.hpp"

namespace impfac {

// Output of one linear synthesis: the minimizer phi of the regularized
// quadratic cost, the control pair (distributed rule + tabulation, impulse
// controls), the data term sigma, and the predicted terminal residual
// -alpha (I - P) phi, which has no component in the subspace.
struct SynthesisResult {
    double alpha = 0.0;
    Vec phi;
    ControlLaw control;
    Vec sigma;
    Vec predicted_residual;
    // carried along so the result can be re-simulated on its own
    Vec target;
    ProjectionSubspace subspace;
};

// sigma = h - F z_0 (data term of the quadratic cost).
Vec sigma_linear(const ImpulsiveSystem& sys, const GramianBundle& bundle, const Vec& h);

// phi = (alpha (I - P) + Total)^{-1} sigma, controls = M^* phi. The control
// law carries both the synthesized rule seeds and the node tabulation.
SynthesisResult synthesize(const ImpulsiveSystem& sys, const GramianBundle& bundle,
                           const ProjectionSubspace& P, double alpha, const Vec& h,
                           const QuadratureRule& rule);

// Controls from an arbitrary phi and data term (shared by the linear and
// semilinear paths).
SynthesisResult synthesis_from_phi(const ImpulsiveSystem& sys, const GramianBundle& bundle,
                                   const ProjectionSubspace& P, double alpha, const Vec& h,
                                   const Vec& sigma, const Vec& phi, const QuadratureRule& rule);

// J(phi)   = 1/2 <Total phi, phi> + alpha/2 <(I-P) phi, phi> - <phi, sigma>
// grad(phi) = Total phi + alpha (I-P) phi - sigma
std::pair<double, Vec> cost_and_gradient(const GramianBundle& bundle, const ProjectionSubspace& P,
                                         double alpha, const Vec& phi, const Vec& sigma);

// Simulate the synthesized control and compare against the prediction.
// Returns (|| z(b) - h - predicted ||, || P (z(b) - h) ||).
std::pair<double, double> verify_residual(const ImpulsiveSystem& sys, const SynthesisResult& result,
                                          const QuadratureRule& rule);

}  // namespace impfac
