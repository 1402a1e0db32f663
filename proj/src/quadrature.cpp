#include "impfac/quadrature.hpp"

#include <cmath>
#include <stdexcept>

namespace impfac {

void QuadratureRule::validate() const {
    if (order < 2) throw std::invalid_argument("quadrature order must be >= 2");
    if (panels_per_interval < 1) throw std::invalid_argument("panels_per_interval must be >= 1");
}

void gauss_legendre(int order, Vec& nodes, Vec& weights) {
    const int q = order;
    nodes.assign(q, 0.0);
    weights.assign(q, 0.0);
    const double pi = 3.14159265358979323846264338327950288;
    // Newton on P_q with symmetric pairing.
    for (int i = 0; i < (q + 1) / 2; ++i) {
        double x = std::cos(pi * (i + 0.75) / (q + 0.5));
        double pp = 0.0;
        for (int iter = 0; iter < 100; ++iter) {
            double p0 = 1.0, p1 = x;
            for (int k = 2; k <= q; ++k) {
                const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                p0 = p1;
                p1 = p2;
            }
            pp = q * (x * p1 - p0) / (x * x - 1.0);
            const double dx = p1 / pp;
            x -= dx;
            if (std::abs(dx) < 1e-15) {
                // one polishing step after convergence
                double q0 = 1.0, q1 = x;
                for (int k = 2; k <= q; ++k) {
                    const double q2 = ((2.0 * k - 1.0) * x * q1 - (k - 1.0) * q0) / k;
                    q0 = q1;
                    q1 = q2;
                }
                pp = q * (x * q1 - q0) / (x * x - 1.0);
                break;
            }
        }
        nodes[i] = -x;
        nodes[q - 1 - i] = x;
        const double w = 2.0 / ((1.0 - x * x) * pp * pp);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    if (q % 2 == 1) nodes[q / 2] = 0.0;  // exact middle root
}

IntervalNodes interval_nodes(double a, double b, const QuadratureRule& rule) {
    rule.validate();
    if (!(b > a)) throw std::invalid_argument("interval_nodes: empty interval");
    Vec ref_nodes, ref_weights;
    gauss_legendre(rule.order, ref_nodes, ref_weights);
    IntervalNodes out;
    const int P = rule.panels_per_interval;
    const double width = (b - a) / P;
    out.nodes.reserve(rule.nodes_per_interval());
    out.weights.reserve(rule.nodes_per_interval());
    for (int p = 0; p < P; ++p) {
        const double lo = a + p * width;
        for (int i = 0; i < rule.order; ++i) {
            out.nodes.push_back(lo + 0.5 * width * (ref_nodes[i] + 1.0));
            out.weights.push_back(0.5 * width * ref_weights[i]);
        }
    }
    return out;
}

}  // namespace impfac
