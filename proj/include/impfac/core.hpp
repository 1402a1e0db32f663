#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

// Dense real linear-algebra substrate: vectors, row-major matrices,
// symmetric solves and eigenvalues, orthogonal projections.
//
// Every matrix product goes through the kernels in this header. Each kernel
// has a serial reference implementation (`*_serial`) and an OpenMP variant
// that parallelizes over output rows while keeping the per-element summation
// order identical, so results are bitwise equal for any thread count.

namespace impfac {

using Vec = std::vector<double>;

// ---------------------------------------------------------------------------
// Error types

struct DimensionMismatch : std::runtime_error {
    explicit DimensionMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct NotSymmetric : std::runtime_error {
    explicit NotSymmetric(const std::string& what) : std::runtime_error(what) {}
};
struct SingularOperator : std::runtime_error {
    explicit SingularOperator(const std::string& what) : std::runtime_error(what) {}
};
struct EmptySubspace : std::runtime_error {
    explicit EmptySubspace(const std::string& what) : std::runtime_error(what) {}
};
struct NegativeTime : std::runtime_error {
    explicit NegativeTime(const std::string& what) : std::runtime_error(what) {}
};
struct IndexOutOfRange : std::runtime_error {
    explicit IndexOutOfRange(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedBackend : std::runtime_error {
    explicit UnsupportedBackend(const std::string& what) : std::runtime_error(what) {}
};
struct NodeMismatch : std::runtime_error {
    explicit NodeMismatch(const std::string& what) : std::runtime_error(what) {}
};
struct MissingFrozenTrajectory : std::runtime_error {
    explicit MissingFrozenTrajectory(const std::string& what) : std::runtime_error(what) {}
};
struct EmptyTrajectory : std::runtime_error {
    explicit EmptyTrajectory(const std::string& what) : std::runtime_error(what) {}
};
struct UnknownFixture : std::runtime_error {
    explicit UnknownFixture(const std::string& what) : std::runtime_error(what) {}
};
struct UnsupportedGrowthKind : std::runtime_error {
    explicit UnsupportedGrowthKind(const std::string& what) : std::runtime_error(what) {}
};
struct ConfigError : std::runtime_error {
    std::string field_path;
    ConfigError(std::string path, const std::string& what)
        : std::runtime_error(path + ": " + what), field_path(std::move(path)) {}
};

// ---------------------------------------------------------------------------
// Matrix type (dense, row-major)

struct Mat {
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<double> a;  // row-major, rows*cols entries

    Mat() = default;
    Mat(std::size_t r, std::size_t c) : rows(r), cols(c), a(r * c, 0.0) {}

    double& operator()(std::size_t i, std::size_t j) { return a[i * cols + j]; }
    double operator()(std::size_t i, std::size_t j) const { return a[i * cols + j]; }

    static Mat identity(std::size_t n);
    static Mat zero(std::size_t r, std::size_t c) { return Mat(r, c); }

    bool empty() const { return rows == 0 || cols == 0; }
};

// Worker-count control. Reads IMPULSE_FAC_THREADS once and caps the OpenMP
// pool; safe to call when built without OpenMP.
void apply_thread_cap_from_env();
void set_worker_count(int n);
int worker_count();

// ---------------------------------------------------------------------------
// Kernels

Mat matmul_serial(const Mat& A, const Mat& B);
Mat matmul(const Mat& A, const Mat& B);
Mat transpose(const Mat& A);
Vec matvec(const Mat& A, const Vec& x);
Vec matvec_transposed(const Mat& A, const Vec& x);  // A^T x without forming A^T
Mat add(const Mat& A, const Mat& B);
Mat sub(const Mat& A, const Mat& B);
Mat scale(double s, const Mat& A);

double dot(const Vec& x, const Vec& y);
double norm(const Vec& x);
Vec add(const Vec& x, const Vec& y);
Vec sub(const Vec& x, const Vec& y);
Vec scale(double s, const Vec& x);
Vec axpy(double a, const Vec& x, const Vec& y);  // a*x + y
Vec unit_vector(std::size_t n, std::size_t i);

double max_abs(const Mat& A);
double frobenius(const Mat& A);
bool all_finite(const Vec& x);
bool all_finite(const Mat& A);

// max |a_ij - a_ji| <= rel_tol * max_abs(A)
bool is_symmetric(const Mat& A, double rel_tol = 1e-12);

// ---------------------------------------------------------------------------
// Symmetric solves (LDL^T, no pivot permutations)
//
// The operators handled here are Gramian sums and their alpha-shifted
// variants, which are symmetric positive semidefinite; a diagonal pivot
// falling below 1e-14 * max_abs(A) signals a singular operator.

struct LdltFactor {
    Mat unit_lower;  // strictly lower part holds L, unit diagonal implied
    Vec diag;
};

LdltFactor ldlt_factor(const Mat& A);
Vec ldlt_solve(const LdltFactor& F, const Vec& b);

Vec solve_sym(const Mat& A, const Vec& b);
Mat solve_sym_multi(const Mat& A, const Mat& B);  // one factorization, many rhs

// General solve with partial pivoting (used by the matrix exponential).
Mat solve_general(Mat A, Mat B);

// ---------------------------------------------------------------------------
// Symmetric eigenvalues (cyclic Jacobi)

struct SymEigen {
    Vec values;   // ascending
    Mat vectors;  // columns, same order
};

SymEigen eigh(const Mat& A);
double smallest_eigenvalue_sym(const Mat& A);
double largest_eigenvalue_sym(const Mat& A);

// 2-norm via the largest eigenvalue of A^T A.
double spectral_norm(const Mat& A);

// ---------------------------------------------------------------------------
// Orthogonal projections onto a finite-dimensional subspace

struct ProjectionSubspace {
    Mat basis;  // N x d, orthonormal columns; d == 0 means the zero projection

    std::size_t dim() const { return basis.cols; }
    std::size_t ambient() const { return basis.rows; }

    static ProjectionSubspace empty(std::size_t ambient_dim);
};

// Modified Gram-Schmidt with one re-orthogonalization pass. Inputs whose
// residual after deflation falls below tol * ||input|| are dropped; if all
// inputs are dropped the subspace would be empty and EmptySubspace is thrown
// (an empty subspace is only constructible via ProjectionSubspace::empty).
ProjectionSubspace orthonormalize(const std::vector<Vec>& spanning, double tol);

Vec project(const ProjectionSubspace& P, const Vec& v);
Mat projector_matrix(const ProjectionSubspace& P);  // Q Q^T

}  // namespace impfac
