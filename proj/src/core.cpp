#include "impfac/core.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <numeric>

#ifdef _OPENMP
#include <omp.h>
#endif

namespace impfac {

Mat Mat::identity(std::size_t n) {
    Mat I(n, n);
    for (std::size_t i = 0; i < n; ++i) I(i, i) = 1.0;
    return I;
}

void apply_thread_cap_from_env() {
#ifdef _OPENMP
    if (const char* env = std::getenv("IMPULSE_FAC_THREADS")) {
        char* end = nullptr;
        long cap = std::strtol(env, &end, 10);
        if (end != env && cap >= 1) omp_set_num_threads(static_cast<int>(cap));
    }
#endif
}

void set_worker_count(int n) {
#ifdef _OPENMP
    if (n >= 1) omp_set_num_threads(n);
#else
    (void)n;
#endif
}

int worker_count() {
#ifdef _OPENMP
    return omp_get_max_threads();
#else
    return 1;
#endif
}

// ---------------------------------------------------------------------------
// Kernels

static void check_mul_dims(const Mat& A, const Mat& B) {
    if (A.cols != B.rows)
        throw DimensionMismatch("matmul: " + std::to_string(A.rows) + "x" + std::to_string(A.cols) +
                                " * " + std::to_string(B.rows) + "x" + std::to_string(B.cols));
}

Mat matmul_serial(const Mat& A, const Mat& B) {
    check_mul_dims(A, B);
    Mat C(A.rows, B.cols);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = &A.a[i * A.cols];
        double* crow = &C.a[i * C.cols];
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &B.a[k * B.cols];
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

Mat matmul(const Mat& A, const Mat& B) {
    check_mul_dims(A, B);
    Mat C(A.rows, B.cols);
    // Row ownership is disjoint and the k-loop order is fixed, so the result
    // is bitwise identical to matmul_serial for any thread count.
#pragma omp parallel for schedule(static)
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = &A.a[i * A.cols];
        double* crow = &C.a[i * C.cols];
        for (std::size_t k = 0; k < A.cols; ++k) {
            const double aik = arow[k];
            if (aik == 0.0) continue;
            const double* brow = &B.a[k * B.cols];
            for (std::size_t j = 0; j < B.cols; ++j) crow[j] += aik * brow[j];
        }
    }
    return C;
}

Mat transpose(const Mat& A) {
    Mat T(A.cols, A.rows);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = 0; j < A.cols; ++j) T(j, i) = A(i, j);
    return T;
}

Vec matvec(const Mat& A, const Vec& x) {
    if (A.cols != x.size()) throw DimensionMismatch("matvec: cols != len(x)");
    Vec y(A.rows, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = &A.a[i * A.cols];
        double s = 0.0;
        for (std::size_t j = 0; j < A.cols; ++j) s += arow[j] * x[j];
        y[i] = s;
    }
    return y;
}

Vec matvec_transposed(const Mat& A, const Vec& x) {
    if (A.rows != x.size()) throw DimensionMismatch("matvec_transposed: rows != len(x)");
    Vec y(A.cols, 0.0);
    for (std::size_t i = 0; i < A.rows; ++i) {
        const double* arow = &A.a[i * A.cols];
        const double xi = x[i];
        if (xi == 0.0) continue;
        for (std::size_t j = 0; j < A.cols; ++j) y[j] += xi * arow[j];
    }
    return y;
}

Mat add(const Mat& A, const Mat& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw DimensionMismatch("mat add: shape mismatch");
    Mat C = A;
    for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] += B.a[i];
    return C;
}

Mat sub(const Mat& A, const Mat& B) {
    if (A.rows != B.rows || A.cols != B.cols) throw DimensionMismatch("mat sub: shape mismatch");
    Mat C = A;
    for (std::size_t i = 0; i < C.a.size(); ++i) C.a[i] -= B.a[i];
    return C;
}

Mat scale(double s, const Mat& A) {
    Mat C = A;
    for (double& v : C.a) v *= s;
    return C;
}

double dot(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionMismatch("dot: length mismatch");
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

double norm(const Vec& x) { return std::sqrt(dot(x, x)); }

Vec add(const Vec& x, const Vec& y) { return axpy(1.0, x, y); }

Vec sub(const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionMismatch("vec sub: length mismatch");
    Vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = x[i] - y[i];
    return z;
}

Vec scale(double s, const Vec& x) {
    Vec z = x;
    for (double& v : z) v *= s;
    return z;
}

Vec axpy(double a, const Vec& x, const Vec& y) {
    if (x.size() != y.size()) throw DimensionMismatch("axpy: length mismatch");
    Vec z(x.size());
    for (std::size_t i = 0; i < x.size(); ++i) z[i] = a * x[i] + y[i];
    return z;
}

Vec unit_vector(std::size_t n, std::size_t i) {
    if (i >= n) throw IndexOutOfRange("unit_vector: index " + std::to_string(i));
    Vec e(n, 0.0);
    e[i] = 1.0;
    return e;
}

double max_abs(const Mat& A) {
    double m = 0.0;
    for (double v : A.a) m = std::max(m, std::abs(v));
    return m;
}

double frobenius(const Mat& A) {
    double s = 0.0;
    for (double v : A.a) s += v * v;
    return std::sqrt(s);
}

bool all_finite(const Vec& x) {
    for (double v : x)
        if (!std::isfinite(v)) return false;
    return true;
}

bool all_finite(const Mat& A) {
    for (double v : A.a)
        if (!std::isfinite(v)) return false;
    return true;
}

bool is_symmetric(const Mat& A, double rel_tol) {
    if (A.rows != A.cols) return false;
    const double tol = rel_tol * std::max(max_abs(A), 1e-300);
    for (std::size_t i = 0; i < A.rows; ++i)
        for (std::size_t j = i + 1; j < A.cols; ++j)
            if (std::abs(A(i, j) - A(j, i)) > tol) return false;
    return true;
}

// ---------------------------------------------------------------------------
// LDL^T

LdltFactor ldlt_factor(const Mat& A) {
    if (!is_symmetric(A)) throw NotSymmetric("ldlt_factor: matrix not symmetric");
    const std::size_t n = A.rows;
    const double pivot_floor = 1e-14 * std::max(max_abs(A), 1e-300);
    LdltFactor F{Mat::identity(n), Vec(n, 0.0)};
    for (std::size_t j = 0; j < n; ++j) {
        double dj = A(j, j);
        for (std::size_t k = 0; k < j; ++k) dj -= F.unit_lower(j, k) * F.unit_lower(j, k) * F.diag[k];
        if (std::abs(dj) < pivot_floor)
            throw SingularOperator("ldlt_factor: pivot " + std::to_string(dj) + " at column " +
                                   std::to_string(j));
        F.diag[j] = dj;
        for (std::size_t i = j + 1; i < n; ++i) {
            double v = A(i, j);
            for (std::size_t k = 0; k < j; ++k) v -= F.unit_lower(i, k) * F.unit_lower(j, k) * F.diag[k];
            F.unit_lower(i, j) = v / dj;
        }
    }
    return F;
}

Vec ldlt_solve(const LdltFactor& F, const Vec& b) {
    const std::size_t n = F.diag.size();
    if (b.size() != n) throw DimensionMismatch("ldlt_solve: rhs length");
    Vec x = b;
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t k = 0; k < i; ++k) x[i] -= F.unit_lower(i, k) * x[k];
    for (std::size_t i = 0; i < n; ++i) x[i] /= F.diag[i];
    for (std::size_t ii = n; ii-- > 0;)
        for (std::size_t k = ii + 1; k < n; ++k) x[ii] -= F.unit_lower(k, ii) * x[k];
    return x;
}

Vec solve_sym(const Mat& A, const Vec& b) { return ldlt_solve(ldlt_factor(A), b); }

Mat solve_sym_multi(const Mat& A, const Mat& B) {
    if (A.rows != B.rows) throw DimensionMismatch("solve_sym_multi: rhs rows");
    LdltFactor F = ldlt_factor(A);
    Mat X(B.rows, B.cols);
    for (std::size_t j = 0; j < B.cols; ++j) {
        Vec b(B.rows);
        for (std::size_t i = 0; i < B.rows; ++i) b[i] = B(i, j);
        Vec x = ldlt_solve(F, b);
        for (std::size_t i = 0; i < B.rows; ++i) X(i, j) = x[i];
    }
    return X;
}

Mat solve_general(Mat A, Mat B) {
    if (A.rows != A.cols || A.rows != B.rows) throw DimensionMismatch("solve_general: shape");
    const std::size_t n = A.rows;
    std::vector<std::size_t> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t k = 0; k < n; ++k) {
        std::size_t piv = k;
        double best = std::abs(A(k, k));
        for (std::size_t i = k + 1; i < n; ++i)
            if (std::abs(A(i, k)) > best) {
                best = std::abs(A(i, k));
                piv = i;
            }
        if (best < 1e-300) throw SingularOperator("solve_general: zero pivot column " + std::to_string(k));
        if (piv != k) {
            for (std::size_t j = 0; j < n; ++j) std::swap(A(k, j), A(piv, j));
            for (std::size_t j = 0; j < B.cols; ++j) std::swap(B(k, j), B(piv, j));
        }
        const double akk = A(k, k);
        for (std::size_t i = k + 1; i < n; ++i) {
            const double f = A(i, k) / akk;
            if (f == 0.0) continue;
            for (std::size_t j = k; j < n; ++j) A(i, j) -= f * A(k, j);
            for (std::size_t j = 0; j < B.cols; ++j) B(i, j) -= f * B(k, j);
        }
    }
    for (std::size_t kk = n; kk-- > 0;) {
        for (std::size_t j = 0; j < B.cols; ++j) {
            double s = B(kk, j);
            for (std::size_t i = kk + 1; i < n; ++i) s -= A(kk, i) * B(i, j);
            B(kk, j) = s / A(kk, kk);
        }
    }
    return B;
}

// ---------------------------------------------------------------------------
// Cyclic Jacobi

SymEigen eigh(const Mat& Ain) {
    if (!is_symmetric(Ain)) throw NotSymmetric("eigh: matrix not symmetric");
    const std::size_t n = Ain.rows;
    Mat A = Ain;
    Mat V = Mat::identity(n);
    const double scale0 = std::max(frobenius(A), 1e-300);

    for (int sweep = 0; sweep < 100; ++sweep) {
        double off = 0.0;
        for (std::size_t p = 0; p < n; ++p)
            for (std::size_t q = p + 1; q < n; ++q) off += 2.0 * A(p, q) * A(p, q);
        if (std::sqrt(off) <= 1e-15 * scale0) break;

        for (std::size_t p = 0; p < n; ++p) {
            for (std::size_t q = p + 1; q < n; ++q) {
                const double apq = A(p, q);
                if (std::abs(apq) <= 1e-300) continue;
                const double theta = (A(q, q) - A(p, p)) / (2.0 * apq);
                const double t = (theta >= 0.0 ? 1.0 : -1.0) /
                                 (std::abs(theta) + std::sqrt(1.0 + theta * theta));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;
                for (std::size_t i = 0; i < n; ++i) {
                    const double aip = A(i, p), aiq = A(i, q);
                    A(i, p) = c * aip - s * aiq;
                    A(i, q) = s * aip + c * aiq;
                }
                for (std::size_t j = 0; j < n; ++j) {
                    const double apj = A(p, j), aqj = A(q, j);
                    A(p, j) = c * apj - s * aqj;
                    A(q, j) = s * apj + c * aqj;
                }
                for (std::size_t i = 0; i < n; ++i) {
                    const double vip = V(i, p), viq = V(i, q);
                    V(i, p) = c * vip - s * viq;
                    V(i, q) = s * vip + c * viq;
                }
            }
        }
    }

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t i, std::size_t j) { return A(i, i) < A(j, j); });
    SymEigen out;
    out.values.resize(n);
    out.vectors = Mat(n, n);
    for (std::size_t j = 0; j < n; ++j) {
        out.values[j] = A(order[j], order[j]);
        for (std::size_t i = 0; i < n; ++i) out.vectors(i, j) = V(i, order[j]);
    }
    return out;
}

double smallest_eigenvalue_sym(const Mat& A) { return eigh(A).values.front(); }
double largest_eigenvalue_sym(const Mat& A) { return eigh(A).values.back(); }

double spectral_norm(const Mat& A) {
    if (A.empty()) return 0.0;
    // Use the smaller Gram matrix of the two.
    Mat G = (A.rows >= A.cols) ? matmul(transpose(A), A) : matmul(A, transpose(A));
    double lmax = largest_eigenvalue_sym(G);
    return std::sqrt(std::max(lmax, 0.0));
}

// ---------------------------------------------------------------------------
// Projections

ProjectionSubspace ProjectionSubspace::empty(std::size_t ambient_dim) {
    ProjectionSubspace P;
    P.basis = Mat(ambient_dim, 0);
    return P;
}

ProjectionSubspace orthonormalize(const std::vector<Vec>& spanning, double tol) {
    if (tol <= 0.0) throw std::invalid_argument("orthonormalize: tol must be positive");
    if (spanning.empty()) throw EmptySubspace("orthonormalize: no spanning vectors given");
    const std::size_t n = spanning.front().size();
    std::vector<Vec> basis;
    for (const Vec& v : spanning) {
        if (v.size() != n) throw DimensionMismatch("orthonormalize: inconsistent vector length");
        const double v0 = norm(v);
        Vec r = v;
        // two deflation passes
        for (int pass = 0; pass < 2; ++pass)
            for (const Vec& u : basis) r = axpy(-dot(r, u), u, r);
        const double rn = norm(r);
        if (rn > tol * v0 && v0 > 0.0) basis.push_back(scale(1.0 / rn, r));
    }
    if (basis.empty()) throw EmptySubspace("orthonormalize: all inputs dependent or below tolerance");
    ProjectionSubspace P;
    P.basis = Mat(n, basis.size());
    for (std::size_t j = 0; j < basis.size(); ++j)
        for (std::size_t i = 0; i < n; ++i) P.basis(i, j) = basis[j][i];
    return P;
}

Vec project(const ProjectionSubspace& P, const Vec& v) {
    if (v.size() != P.ambient()) throw DimensionMismatch("project: vector length != ambient dim");
    if (P.dim() == 0) return Vec(v.size(), 0.0);
    return matvec(P.basis, matvec_transposed(P.basis, v));
}

Mat projector_matrix(const ProjectionSubspace& P) {
    if (P.dim() == 0) return Mat::zero(P.ambient(), P.ambient());
    return matmul(P.basis, transpose(P.basis));
}

}  // namespace impfac
