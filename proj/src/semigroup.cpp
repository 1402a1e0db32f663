#include "impfac/semigroup.hpp"

#include <cmath>

namespace impfac {

static double checked_time(double t) {
    if (t < 0.0) {
        if (t >= -1e-12) return 0.0;
        throw NegativeTime("semigroup time t = " + std::to_string(t));
    }
    return t;
}

std::size_t dimension(const Semigroup& S) {
    if (const auto* sp = std::get_if<SpectralSemigroup>(&S)) return sp->decay_rates.size();
    return std::get<DenseSemigroup>(S).generator.rows;
}

bool is_spectral(const Semigroup& S) { return std::holds_alternative<SpectralSemigroup>(S); }

Vec apply(const Semigroup& S, double t, const Vec& v) {
    t = checked_time(t);
    if (v.size() != dimension(S)) throw DimensionMismatch("semigroup apply: vector length");
    if (const auto* sp = std::get_if<SpectralSemigroup>(&S)) {
        Vec out(v.size());
        for (std::size_t n = 0; n < v.size(); ++n) out[n] = std::exp(-sp->decay_rates[n] * t) * v[n];
        return out;
    }
    const auto& dn = std::get<DenseSemigroup>(S);
    if (t == 0.0) return v;
    return matvec(expm(scale(t, dn.generator)), v);
}

Vec apply_adjoint(const Semigroup& S, double t, const Vec& v) {
    if (std::holds_alternative<SpectralSemigroup>(S)) return apply(S, t, v);  // self-adjoint
    t = checked_time(t);
    const auto& dn = std::get<DenseSemigroup>(S);
    if (v.size() != dn.generator.rows) throw DimensionMismatch("semigroup apply_adjoint: vector length");
    if (t == 0.0) return v;
    return matvec(expm(scale(t, transpose(dn.generator))), v);
}

Mat operator_matrix(const Semigroup& S, double t) {
    t = checked_time(t);
    const std::size_t n = dimension(S);
    if (const auto* sp = std::get_if<SpectralSemigroup>(&S)) {
        Mat M(n, n);
        for (std::size_t i = 0; i < n; ++i) M(i, i) = std::exp(-sp->decay_rates[i] * t);
        return M;
    }
    if (t == 0.0) return Mat::identity(n);
    return expm(scale(t, std::get<DenseSemigroup>(S).generator));
}

Mat operator_matrix_adjoint(const Semigroup& S, double t) {
    if (std::holds_alternative<SpectralSemigroup>(S)) return operator_matrix(S, t);
    return transpose(operator_matrix(S, t));
}

// ---------------------------------------------------------------------------
// Matrix exponential

static double one_norm(const Mat& A) {
    double best = 0.0;
    for (std::size_t j = 0; j < A.cols; ++j) {
        double s = 0.0;
        for (std::size_t i = 0; i < A.rows; ++i) s += std::abs(A(i, j));
        best = std::max(best, s);
    }
    return best;
}

Mat expm(const Mat& A) {
    if (A.rows != A.cols) throw DimensionMismatch("expm: matrix not square");
    const std::size_t n = A.rows;
    static const double b[14] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                                 1187353796428800.0,  129060195264000.0,   10559470521600.0,
                                 670442572800.0,      33522128640.0,       1323241920.0,
                                 40840800.0,          960960.0,            16380.0,
                                 182.0,               1.0};
    const double theta13 = 5.371920351148152;

    int squarings = 0;
    const double nrm = one_norm(A);
    if (nrm > theta13) squarings = static_cast<int>(std::ceil(std::log2(nrm / theta13)));
    Mat As = scale(std::ldexp(1.0, -squarings), A);

    const Mat A2 = matmul(As, As);
    const Mat A4 = matmul(A2, A2);
    const Mat A6 = matmul(A2, A4);
    const Mat I = Mat::identity(n);

    Mat W1 = add(scale(b[13], A6), add(scale(b[11], A4), scale(b[9], A2)));
    Mat W2 = add(scale(b[7], A6), add(scale(b[5], A4), add(scale(b[3], A2), scale(b[1], I))));
    Mat U = matmul(As, add(matmul(A6, W1), W2));
    Mat Z1 = add(scale(b[12], A6), add(scale(b[10], A4), scale(b[8], A2)));
    Mat V = add(matmul(A6, Z1), add(scale(b[6], A6), add(scale(b[4], A4), add(scale(b[2], A2), scale(b[0], I)))));

    Mat R = solve_general(sub(V, U), add(V, U));
    for (int s = 0; s < squarings; ++s) R = matmul(R, R);
    return R;
}

}  // namespace impfac
