// Timings for the OpenMP kernels against their serial references, plus the
// Gramian assembly at worker counts 1 and max. The parallel kernels keep the
// per-element summation order of the serial ones, so the max deviation
// printed at the end must be exactly zero.

#include <chrono>
#include <cstdio>

#include "impfac/gramian.hpp"
#include "impfac/verify.hpp"

using namespace impfac;

namespace {

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

template <typename F>
double time_best_of(int reps, F&& f) {
    double best = 1e300;
    for (int r = 0; r < reps; ++r) {
        auto t0 = std::chrono::steady_clock::now();
        f();
        best = std::min(best, seconds_since(t0));
    }
    return best;
}

}  // namespace

int main() {
    apply_thread_cap_from_env();
    const int max_workers = worker_count();
    std::printf("workers available: %d\n\n", max_workers);

    std::printf("%-28s %10s %10s %8s %10s\n", "kernel", "serial[s]", "omp[s]", "speedup", "maxdiff");
    double worst_diff = 0.0;

    for (std::size_t n : {128, 256, 512}) {
        Mat A = random_spd(11, n, 0.1);
        Mat B = random_spd(12, n, 0.1);
        set_worker_count(max_workers);
        Mat C_omp;
        const double t_omp = time_best_of(3, [&] { C_omp = matmul(A, B); });
        Mat C_ser;
        const double t_ser = time_best_of(3, [&] { C_ser = matmul_serial(A, B); });
        double diff = max_abs(sub(C_omp, C_ser));
        worst_diff = std::max(worst_diff, diff);
        std::printf("matmul n=%-21zu %10.4f %10.4f %8.2f %10.2e\n", n, t_ser, t_omp,
                    t_ser / t_omp, diff);
    }

    {
        // fixed-size spectral system with live transport factors on every interval
        ImpulsiveSystem sys;
        Rng rng(5);
        SpectralSemigroup sg;
        sg.decay_rates.resize(64);
        for (double& r : sg.decay_rates) r = rng.uniform(0.0, 3.0);
        sys.semigroup = sg;
        sys.control_map = Mat(64, 32);
        for (double& x : sys.control_map.a) x = rng.uniform(-1.0, 1.0);
        for (int k = 0; k < 3; ++k) {
            Mat B(64, 64), D(64, 8);
            for (double& x : B.a) x = rng.uniform(-0.5, 0.5) / 64.0;
            for (double& x : D.a) x = rng.uniform(-1.0, 1.0);
            sys.jumps.push_back(std::move(B));
            sys.impulse_maps.push_back(std::move(D));
        }
        sys.initial_state = Vec(64, 0.0);
        sys.schedule.horizon = 1.0;
        sys.schedule.impulse_times = {0.25, 0.5, 0.75};
        QuadratureRule rule{20, 16};
        set_worker_count(1);
        GramianBundle b1;
        const double t1 = time_best_of(2, [&] { b1 = assemble(sys, rule); });
        set_worker_count(max_workers);
        GramianBundle bN;
        const double tN = time_best_of(2, [&] { bN = assemble(sys, rule); });
        double diff = max_abs(sub(b1.total, bN.total));
        worst_diff = std::max(worst_diff, diff);
        std::printf("%-28s %10.4f %10.4f %8.2f %10.2e\n", "gramian assemble (N=64)", t1, tN,
                    t1 / tN, diff);
    }

    {
        ImpulsiveSystem sys = random_system(6, 16, 2, false, 2);
        QuadratureRule rule{20, 8};
        ControlLaw law = random_control(7, sys, rule);
        set_worker_count(1);
        Trajectory tr1;
        const double t1 =
            time_best_of(2, [&] { tr1 = propagate(sys, law, rule, Nonlinearity::zero(), nullptr); });
        set_worker_count(max_workers);
        Trajectory trN;
        const double tN =
            time_best_of(2, [&] { trN = propagate(sys, law, rule, Nonlinearity::zero(), nullptr); });
        double diff = pc_diff_norm(tr1, trN);
        worst_diff = std::max(worst_diff, diff);
        std::printf("%-28s %10.4f %10.4f %8.2f %10.2e\n", "propagate (N<=16)", t1, tN, t1 / tN, diff);
    }

    std::printf("\nmax serial-vs-parallel deviation: %.3e %s\n", worst_diff,
                worst_diff == 0.0 ? "(bitwise identical)" : "(MISMATCH)");
    return worst_diff == 0.0 ? 0 : 1;
}
