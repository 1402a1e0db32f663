#include "impfac/resolvent.hpp"

#include <cmath>

namespace impfac {

namespace {

void check_inputs(const Mat& total, const ProjectionSubspace& P, double alpha) {
    if (total.rows != total.cols) throw DimensionMismatch("resolvent: total not square");
    if (P.ambient() != total.rows) throw DimensionMismatch("resolvent: subspace ambient dimension");
    if (!(alpha > 0.0)) throw std::invalid_argument("resolvent: alpha must be positive");
    if (!is_symmetric(total)) throw NotSymmetric("resolvent: total not symmetric");
}

Mat shifted(const Mat& total, double alpha) {
    Mat A = total;
    for (std::size_t i = 0; i < A.rows; ++i) A(i, i) += alpha;
    return A;
}

}  // namespace

double delta_margin(const Mat& total, const ProjectionSubspace& P) {
    if (P.dim() == 0) throw EmptySubspace("delta_margin: undefined for the empty subspace");
    if (P.ambient() != total.rows) throw DimensionMismatch("delta_margin: subspace ambient dimension");
    if (!is_symmetric(total)) throw NotSymmetric("delta_margin: total not symmetric");
    Mat compressed = matmul(transpose(P.basis), matmul(total, P.basis));
    // symmetrize away the roundoff skew before the eigen solve
    for (std::size_t i = 0; i < compressed.rows; ++i)
        for (std::size_t j = i + 1; j < compressed.cols; ++j) {
            const double v = 0.5 * (compressed(i, j) + compressed(j, i));
            compressed(i, j) = v;
            compressed(j, i) = v;
        }
    return smallest_eigenvalue_sym(compressed);
}

Vec resolvent_solve_direct(const Mat& total, const ProjectionSubspace& P, double alpha,
                           const Vec& rhs) {
    check_inputs(total, P, alpha);
    if (rhs.size() != total.rows) throw DimensionMismatch("resolvent_solve_direct: rhs length");
    Mat op = shifted(total, alpha);
    if (P.dim() > 0) op = sub(op, scale(alpha, projector_matrix(P)));
    return solve_sym(op, rhs);
}

Vec resolvent_solve_factorized(const Mat& total, const ProjectionSubspace& P, double alpha,
                               const Vec& rhs) {
    check_inputs(total, P, alpha);
    if (rhs.size() != total.rows) throw DimensionMismatch("resolvent_solve_factorized: rhs length");
    LdltFactor F = ldlt_factor(shifted(total, alpha));
    Vec y = ldlt_solve(F, rhs);
    const std::size_t d = P.dim();
    if (d == 0) return y;

    // Z = (alpha I + Total)^{-1} Q, then solve (I_d - alpha Q^T Z) w = Q^T y.
    Mat Z(total.rows, d);
    for (std::size_t j = 0; j < d; ++j) {
        Vec q(total.rows);
        for (std::size_t i = 0; i < total.rows; ++i) q[i] = P.basis(i, j);
        Vec zj = ldlt_solve(F, q);
        for (std::size_t i = 0; i < total.rows; ++i) Z(i, j) = zj[i];
    }
    Mat Md = matmul(transpose(P.basis), Z);  // Q^T (alpha I + Total)^{-1} Q, symmetric
    Md = scale(-alpha, Md);
    for (std::size_t i = 0; i < d; ++i) Md(i, i) += 1.0;
    for (std::size_t i = 0; i < d; ++i)
        for (std::size_t j = i + 1; j < d; ++j) {
            const double v = 0.5 * (Md(i, j) + Md(j, i));
            Md(i, j) = v;
            Md(j, i) = v;
        }
    Vec w = solve_sym(Md, matvec_transposed(P.basis, y));
    return axpy(alpha, matvec(Z, w), y);
}

double contraction_norm(const Mat& total, const ProjectionSubspace& P, double alpha) {
    check_inputs(total, P, alpha);
    if (P.dim() == 0) return 0.0;
    // alpha (alpha I + Total)^{-1} Q Q^T has the singular values of
    // alpha Z with Z = (alpha I + Total)^{-1} Q, because Q^T is an isometry.
    Mat Z = solve_sym_multi(shifted(total, alpha), P.basis);
    return alpha * spectral_norm(Z);
}

}  // namespace impfac
