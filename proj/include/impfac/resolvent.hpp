#pragma once

#include "impfac/core.hpp"

namespace impfac {

// The regularized operator alpha*(I - P) + Total for a symmetric PSD Total
// and an orthogonal projection P, plus the quantities controlling its
// behavior as alpha -> 0+.

// Smallest eigenvalue of Total compressed to the subspace (Q^T Total Q);
// the invertibility margin on the subspace. Throws EmptySubspace for d = 0.
double delta_margin(const Mat& total, const ProjectionSubspace& P);

// Solve (alpha*(I - P) + Total) x = rhs by a direct symmetric factorization.
Vec resolvent_solve_direct(const Mat& total, const ProjectionSubspace& P, double alpha,
                           const Vec& rhs);

// Same solve through the factorization
//   (alpha*(I - P) + Total)^{-1}
//     = (I - alpha (alpha I + Total)^{-1} P)^{-1} (alpha I + Total)^{-1},
// realized as one SPD solve plus a d x d correction system in subspace
// coordinates.
Vec resolvent_solve_factorized(const Mat& total, const ProjectionSubspace& P, double alpha,
                               const Vec& rhs);

// Spectral norm of alpha (alpha I + Total)^{-1} P; strictly below 1 whenever
// Total is strictly positive.
double contraction_norm(const Mat& total, const ProjectionSubspace& P, double alpha);

}  // namespace impfac
