#include "impfac/gramian.hpp"

#include <cmath>

namespace impfac {

namespace {

// S(t) * X without materializing S for spectral backends.
Mat semigroup_times(const Semigroup& S, double t, const Mat& X) {
    if (const auto* sp = std::get_if<SpectralSemigroup>(&S)) {
        Mat Y = X;
        for (std::size_t i = 0; i < Y.rows; ++i) {
            const double f = std::exp(-sp->decay_rates[i] * t);
            for (std::size_t j = 0; j < Y.cols; ++j) Y(i, j) *= f;
        }
        return Y;
    }
    return matmul(operator_matrix(S, t), X);
}

Mat jump_times(const ImpulsiveSystem& sys, std::size_t j, const Mat& X) {  // (I + B_j) X, 1-based
    return add(X, matmul(sys.jumps[j - 1], X));
}

double tail_start(const ImpulsiveSystem& sys) {
    const std::size_t p = sys.schedule.impulse_count();
    return p == 0 ? 0.0 : sys.schedule.impulse_times[p - 1];
}

double interval_delta(const ImpulsiveSystem& sys, std::size_t j) {  // t_j - t_{j-1}, 1-based
    return sys.schedule.impulse_times[j - 1] - (j == 1 ? 0.0 : sys.schedule.impulse_times[j - 2]);
}

}  // namespace

Mat free_final_map(const ImpulsiveSystem& sys) {
    sys.validate();
    const std::size_t p = sys.schedule.impulse_count();
    Mat W = Mat::identity(sys.dim());
    for (std::size_t j = 1; j <= p; ++j) W = jump_times(sys, j, semigroup_times(sys.semigroup, interval_delta(sys, j), W));
    return semigroup_times(sys.semigroup, sys.schedule.horizon - tail_start(sys), W);
}

Mat distributed_left_factor(const ImpulsiveSystem& sys, std::size_t i) {
    const std::size_t p = sys.schedule.impulse_count();
    if (i < 1 || i > p + 1) throw IndexOutOfRange("distributed_left_factor: i must be in 1..p+1");
    if (i == p + 1) return Mat::identity(sys.dim());
    Mat W = add(Mat::identity(sys.dim()), sys.jumps[i - 1]);  // (I + B_i)
    for (std::size_t j = i + 1; j <= p; ++j)
        W = jump_times(sys, j, semigroup_times(sys.semigroup, interval_delta(sys, j), W));
    return semigroup_times(sys.semigroup, sys.schedule.horizon - tail_start(sys), W);
}

Mat impulse_left_factor(const ImpulsiveSystem& sys, std::size_t k) {
    const std::size_t p = sys.schedule.impulse_count();
    if (k < 1 || k > p) throw IndexOutOfRange("impulse_left_factor: k must be in 1..p");
    Mat W = sys.impulse_maps[k - 1];
    for (std::size_t j = k + 1; j <= p; ++j)
        W = jump_times(sys, j, semigroup_times(sys.semigroup, interval_delta(sys, j), W));
    return semigroup_times(sys.semigroup, sys.schedule.horizon - tail_start(sys), W);
}

GramianBundle assemble(const ImpulsiveSystem& sys, const QuadratureRule& rule) {
    sys.validate();
    rule.validate();
    const std::size_t n = sys.dim();
    const std::size_t m = sys.control_dim();
    const std::size_t p = sys.schedule.impulse_count();

    GramianBundle B;
    B.free_map = free_final_map(sys);
    B.left_factors.reserve(p + 1);
    for (std::size_t i = 1; i <= p + 1; ++i) B.left_factors.push_back(distributed_left_factor(sys, i));
    B.impulse_factors.reserve(p);
    for (std::size_t k = 1; k <= p; ++k) B.impulse_factors.push_back(impulse_left_factor(sys, k));

    B.gamma = Mat::zero(n, n);
    B.theta = Mat::zero(n, n);
    B.gamma_tilde = Mat::zero(n, n);
    B.theta_tilde = Mat::zero(n, n);

    // Distributed blocks: stack sqrt(w_n) * L_i S(t_i - s_n) Omega over the
    // interval's nodes and take W W^T, which is symmetric by construction.
    for (std::size_t k = 0; k <= p; ++k) {
        const Mat& L = B.left_factors[k];
        if (max_abs(L) == 0.0) continue;
        const double a = sys.schedule.interval_start(k);
        const double b = sys.schedule.interval_end(k);
        IntervalNodes grid = interval_nodes(a, b, rule);
        const std::size_t M = grid.nodes.size();
        Mat W(n, M * m);
#pragma omp parallel for schedule(static)
        for (std::size_t nn = 0; nn < M; ++nn) {
            Mat E = semigroup_times(sys.semigroup, b - grid.nodes[nn], sys.control_map);
            if (k < p) E = matmul_serial(L, E);
            const double sw = std::sqrt(grid.weights[nn]);
            for (std::size_t i = 0; i < n; ++i)
                for (std::size_t j = 0; j < m; ++j) W(i, nn * m + j) = sw * E(i, j);
        }
        Mat block = matmul(W, transpose(W));
        if (k == p)
            B.gamma = block;
        else
            B.theta = add(B.theta, block);
    }

    // Impulse blocks K_k K_k^T: the last impulse feeds gamma_tilde, earlier
    // ones feed theta_tilde.
    for (std::size_t k = 1; k <= p; ++k) {
        const Mat& K = B.impulse_factors[k - 1];
        Mat block = matmul(K, transpose(K));
        if (k == p)
            B.gamma_tilde = block;
        else
            B.theta_tilde = add(B.theta_tilde, block);
    }

    B.total = add(add(B.gamma, B.gamma_tilde), add(B.theta, B.theta_tilde));
    return B;
}

Vec apply_M(const ImpulsiveSystem& sys, const std::vector<std::vector<Vec>>& u_nodes,
            const std::vector<Vec>& v_list, const QuadratureRule& rule) {
    sys.validate();
    const std::size_t p = sys.schedule.impulse_count();
    if (u_nodes.size() != p + 1) throw DimensionMismatch("apply_M: need one node block per interval");
    if (v_list.size() != p) throw DimensionMismatch("apply_M: need one impulse control per impulse");

    Vec out(sys.dim(), 0.0);
    for (std::size_t k = 0; k <= p; ++k) {
        const double a = sys.schedule.interval_start(k);
        const double b = sys.schedule.interval_end(k);
        IntervalNodes grid = interval_nodes(a, b, rule);
        if (u_nodes[k].size() != grid.nodes.size())
            throw NodeMismatch("apply_M: tabulation does not match the quadrature grid");
        Vec g(sys.dim(), 0.0);
        for (std::size_t nn = 0; nn < grid.nodes.size(); ++nn) {
            if (u_nodes[k][nn].size() != sys.control_dim())
                throw DimensionMismatch("apply_M: control value length");
            g = axpy(grid.weights[nn],
                     apply(sys.semigroup, b - grid.nodes[nn], matvec(sys.control_map, u_nodes[k][nn])), g);
        }
        out = add(out, matvec(distributed_left_factor(sys, k + 1), g));
    }
    for (std::size_t k = 1; k <= p; ++k)
        out = add(out, matvec(impulse_left_factor(sys, k), v_list[k - 1]));
    return out;
}

AdjointControls apply_M_star(const ImpulsiveSystem& sys, const Vec& phi, const QuadratureRule& rule) {
    sys.validate();
    if (phi.size() != sys.dim()) throw DimensionMismatch("apply_M_star: phi length");
    const std::size_t p = sys.schedule.impulse_count();
    AdjointControls out;
    out.u_nodes.resize(p + 1);
    for (std::size_t k = 0; k <= p; ++k) {
        const double a = sys.schedule.interval_start(k);
        const double b = sys.schedule.interval_end(k);
        IntervalNodes grid = interval_nodes(a, b, rule);
        const Vec seed = matvec_transposed(distributed_left_factor(sys, k + 1), phi);  // L_i^T phi
        out.u_nodes[k].resize(grid.nodes.size());
        for (std::size_t nn = 0; nn < grid.nodes.size(); ++nn)
            out.u_nodes[k][nn] = matvec_transposed(
                sys.control_map, apply_adjoint(sys.semigroup, b - grid.nodes[nn], seed));
    }
    out.v_list.resize(p);
    for (std::size_t k = 1; k <= p; ++k)
        out.v_list[k - 1] = matvec_transposed(impulse_left_factor(sys, k), phi);
    return out;
}

double control_inner_product(const ImpulsiveSystem& sys, const QuadratureRule& rule,
                             const AdjointControls& a, const AdjointControls& b) {
    const std::size_t p = sys.schedule.impulse_count();
    double s = 0.0;
    for (std::size_t k = 0; k <= p; ++k) {
        IntervalNodes grid =
            interval_nodes(sys.schedule.interval_start(k), sys.schedule.interval_end(k), rule);
        for (std::size_t nn = 0; nn < grid.nodes.size(); ++nn)
            s += grid.weights[nn] * dot(a.u_nodes[k][nn], b.u_nodes[k][nn]);
    }
    for (std::size_t k = 0; k < p; ++k) s += dot(a.v_list[k], b.v_list[k]);
    return s;
}

GramianBundle closed_form_bundle(const ImpulsiveSystem& sys) {
    sys.validate();
    const auto* sp = std::get_if<SpectralSemigroup>(&sys.semigroup);
    if (sp == nullptr)
        throw UnsupportedBackend("closed_form_bundle: analytic form needs the spectral backend");
    const std::size_t n = sys.dim();
    const std::size_t p = sys.schedule.impulse_count();

    // psi(s, D) = int_0^D exp(-s * tau) d tau, stable near s = 0.
    auto psi = [](double s, double D) {
        if (s == 0.0) return D;
        return -std::expm1(-s * D) / s;
    };

    const Mat OmOmT = matmul(sys.control_map, transpose(sys.control_map));
    auto interval_gram = [&](double D) {
        Mat G(n, n);
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = 0; j < n; ++j)
                G(i, j) = OmOmT(i, j) * psi(sp->decay_rates[i] + sp->decay_rates[j], D);
        return G;
    };

    GramianBundle B;
    B.free_map = free_final_map(sys);
    for (std::size_t i = 1; i <= p + 1; ++i) B.left_factors.push_back(distributed_left_factor(sys, i));
    for (std::size_t k = 1; k <= p; ++k) B.impulse_factors.push_back(impulse_left_factor(sys, k));

    B.gamma = interval_gram(sys.schedule.horizon - tail_start(sys));
    B.theta = Mat::zero(n, n);
    for (std::size_t k = 0; k < p; ++k) {
        const Mat& L = B.left_factors[k];
        if (max_abs(L) == 0.0) continue;
        Mat G = interval_gram(sys.schedule.interval_end(k) - sys.schedule.interval_start(k));
        B.theta = add(B.theta, matmul(matmul(L, G), transpose(L)));
    }
    B.gamma_tilde = Mat::zero(n, n);
    B.theta_tilde = Mat::zero(n, n);
    for (std::size_t k = 1; k <= p; ++k) {
        const Mat& K = B.impulse_factors[k - 1];
        Mat block = matmul(K, transpose(K));
        if (k == p)
            B.gamma_tilde = block;
        else
            B.theta_tilde = add(B.theta_tilde, block);
    }
    B.total = add(add(B.gamma, B.gamma_tilde), add(B.theta, B.theta_tilde));
    return B;
}

}  // namespace impfac
