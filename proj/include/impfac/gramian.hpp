#pragma once

#include "impfac/system.hpp"

namespace impfac {

// The four energy blocks of the controllability operator and the transport
// factors they are built from:
//   gamma       distributed control energy on the tail interval (t_p, b)
//   theta       transported distributed energy of intervals 1..p
//   gamma_tilde terminal impulse energy K_p K_p^T
//   theta_tilde transported impulse energy of impulses 1..p-1
// total = gamma + gamma_tilde + theta + theta_tilde, and equals M M^* under
// the shared discrete inner product.
struct GramianBundle {
    Mat gamma, gamma_tilde, theta, theta_tilde, total;
    std::vector<Mat> left_factors;     // L_i for i = 1..p+1 (0-based; back() = identity)
    std::vector<Mat> impulse_factors;  // K_k for k = 1..p (0-based)
    Mat free_map;                      // F: terminal state under zero inputs is F z_0
};

// F = S(b - t_p) * prod_{j=p..1} (I + B_j) S(t_j - t_{j-1}); S(b) when p = 0.
Mat free_final_map(const ImpulsiveSystem& sys);

// L_i = S(b - t_p) * [prod_{j=p..i+1} (I + B_j) S(t_j - t_{j-1})] * (I + B_i)
// for i = 1..p, and L_{p+1} = identity (tail interval convention).
// Carries a contribution injected just after the jump at t_i to time b.
Mat distributed_left_factor(const ImpulsiveSystem& sys, std::size_t i);

// K_k = S(b - t_p) * [prod_{j=p..k+1} (I + B_j) S(t_j - t_{j-1})] * D_k for
// k = 1..p (the product is empty for k = p). Carries v_k to time b.
Mat impulse_left_factor(const ImpulsiveSystem& sys, std::size_t k);

// Quadrature assembly on the shared node grid. Every block is accumulated
// as a weighted sum of outer products, so it is symmetric by construction
// and positive semidefinite up to roundoff.
GramianBundle assemble(const ImpulsiveSystem& sys, const QuadratureRule& rule);

// Input-to-terminal-state map M applied to node-tabulated distributed
// controls and impulse controls.
Vec apply_M(const ImpulsiveSystem& sys, const std::vector<std::vector<Vec>>& u_nodes,
            const std::vector<Vec>& v_list, const QuadratureRule& rule);

struct AdjointControls {
    std::vector<std::vector<Vec>> u_nodes;
    std::vector<Vec> v_list;
};

// M^* phi: u(s) = Omega^T S^*(t_i - s) L_i^T phi on interval i, and
// v_k = K_k^T phi. Satisfies <M(u,v), psi> = <(u,v), M^* psi> under the
// quadrature-weighted inner product.
AdjointControls apply_M_star(const ImpulsiveSystem& sys, const Vec& phi, const QuadratureRule& rule);

// Analytic bundle for spectral backends: every integral reduces to
// (1 - exp(-(l_a + l_b) D)) / (l_a + l_b), with limit D as the exponent sum
// vanishes. Throws UnsupportedBackend for dense generators.
GramianBundle closed_form_bundle(const ImpulsiveSystem& sys);

// Discrete quadrature-weighted inner product of two control pairs.
double control_inner_product(const ImpulsiveSystem& sys, const QuadratureRule& rule,
                             const AdjointControls& a, const AdjointControls& b);

}  // namespace impfac
