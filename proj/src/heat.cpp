#include "impfac/heat.hpp"

#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "impfac/rng.hpp"

namespace impfac {

ImpulsiveSystem build_heat(const HeatConfig& cfg) {
    if (cfg.modes < 2) throw ConfigError("system.modes", "heat testbed needs at least 2 modes");
    cfg.schedule.validate();
    const std::size_t N = cfg.modes;
    const std::size_t p = cfg.schedule.impulse_count();

    SpectralSemigroup sg;
    sg.decay_rates.resize(N);
    const double pi = 3.14159265358979323846264338327950288;
    for (std::size_t n = 1; n <= N; ++n) {
        const double n2 = static_cast<double>(n) * static_cast<double>(n);
        sg.decay_rates[n - 1] = (cfg.convention == EigenConvention::Dirichlet) ? n2 * pi * pi : n2;
    }

    // columns are input modes 2..N: mode 2 -> 2 e_1 + e_2, mode n -> e_n
    Mat Omega(N, N - 1);
    Omega(0, 0) = 2.0;
    Omega(1, 0) = 1.0;
    for (std::size_t n = 3; n <= N; ++n) Omega(n - 1, n - 2) = 1.0;

    ImpulsiveSystem sys;
    sys.semigroup = sg;
    sys.control_map = Omega;
    sys.jumps.assign(p, scale(-1.0, Mat::identity(N)));
    sys.impulse_maps.assign(p, scale(-1.0, Mat::identity(N)));
    sys.initial_state = Vec(N, 0.0);
    sys.schedule = cfg.schedule;
    return sys;
}

Vec build_target_eigenmode(std::size_t mode, std::size_t N) {
    if (mode < 1 || mode > N) throw IndexOutOfRange("build_target_eigenmode: mode out of range");
    return unit_vector(N, mode - 1);
}

Vec build_target_smooth_random(double decay, std::uint64_t seed, std::size_t N) {
    if (!(decay > 0.5)) throw std::invalid_argument("build_target_smooth_random: decay must exceed 1/2");
    Rng rng(seed);
    Vec h(N);
    for (std::size_t n = 1; n <= N; ++n)
        h[n - 1] = rng.normal() * std::pow(static_cast<double>(n), -decay);
    const double hn = norm(h);
    if (hn == 0.0) return h;
    return scale(1.0 / hn, h);
}

ProjectionSubspace build_subspace(std::size_t d, std::size_t N) {
    if (d > N) throw IndexOutOfRange("build_subspace: d > N");
    ProjectionSubspace P;
    P.basis = Mat(N, d);
    for (std::size_t j = 0; j < d; ++j) P.basis(j, j) = 1.0;
    return P;
}

std::vector<SweepRow> alpha_sweep(const ImpulsiveSystem& sys, const ProjectionSubspace& P,
                                  const Vec& h, const Vec& alphas, const Nonlinearity& mu,
                                  const QuadratureRule& rule, const PicardConfig& picard) {
    if (alphas.empty()) throw std::invalid_argument("alpha_sweep: empty alpha grid");
    for (std::size_t i = 0; i + 1 < alphas.size(); ++i)
        if (!(alphas[i] > alphas[i + 1]))
            throw std::invalid_argument("alpha_sweep: alphas must be strictly descending");
    for (double a : alphas)
        if (!(a > 0.0)) throw std::invalid_argument("alpha_sweep: alphas must be positive");

    GramianBundle bundle = assemble(sys, rule);
    const double min_eig = smallest_eigenvalue_sym(bundle.total);
    const double margin =
        P.dim() > 0 ? delta_margin(bundle.total, P) : std::numeric_limits<double>::quiet_NaN();

    std::vector<SweepRow> rows(alphas.size());
#pragma omp parallel for schedule(dynamic)
    for (std::size_t i = 0; i < alphas.size(); ++i) {
        SweepRow& row = rows[i];
        row.alpha = alphas[i];
        row.delta = margin;
        row.total_min_eig = min_eig;
        try {
            if (mu.is_zero()) {
                SynthesisResult res = synthesize(sys, bundle, P, alphas[i], h, rule);
                Trajectory traj = propagate(sys, res.control, rule, mu, nullptr);
                Vec residual = sub(traj.terminal_state(), h);
                row.residual_norm = norm(residual);
                row.projected_residual_norm = norm(project(P, residual));
                row.predicted_residual_norm = norm(res.predicted_residual);
                row.picard_iterations = 0;
            } else {
                PicardResult pr = picard_solve(sys, bundle, P, alphas[i], h, mu, rule, picard);
                row.picard_iterations = pr.iterations;
                if (!pr.converged) {
                    row.status = "no_convergence";
                }
                Vec residual = sub(pr.trajectory.terminal_state(), h);
                row.residual_norm = norm(residual);
                row.projected_residual_norm = norm(project(P, residual));
                row.predicted_residual_norm = norm(pr.synthesis.predicted_residual);
            }
        } catch (const SingularOperator&) {
            row.status = "singular";
        } catch (const std::exception& e) {
            row.status = std::string("error:") + e.what();
        }
    }
    return rows;
}

std::string format_double(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

std::string sweep_csv(const std::vector<SweepRow>& rows) {
    std::ostringstream os;
    os << "alpha,residual_norm,projected_residual_norm,predicted_residual_norm,"
          "picard_iterations,delta,total_min_eig,status\n";
    for (const SweepRow& r : rows) {
        os << format_double(r.alpha) << ',' << format_double(r.residual_norm) << ','
           << format_double(r.projected_residual_norm) << ','
           << format_double(r.predicted_residual_norm) << ',' << r.picard_iterations << ','
           << format_double(r.delta) << ',' << format_double(r.total_min_eig) << ',' << r.status
           << '\n';
    }
    return os.str();
}

}  // namespace impfac
