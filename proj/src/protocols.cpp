#include "kerrlat/protocols.hpp"

#include <atomic>
#include <cmath>
#include <mutex>
#include <thread>

#include "kerrlat/errors.hpp"
#include "kerrlat/rng.hpp"
#include "kerrlat/schedule.hpp"

namespace kerrlat {

void for_each_trajectory(int n, int workers, const std::function<void(int)>& fn) {
    if (workers <= 0) workers = int(std::thread::hardware_concurrency());
    if (workers < 1) workers = 1;
    workers = std::min(workers, n);
    if (workers <= 1) {
        for (int i = 0; i < n; ++i) fn(i);
        return;
    }
    std::atomic<int> next{0};
    std::exception_ptr err;
    std::mutex err_mtx;
    auto body = [&] {
        for (;;) {
            const int i = next.fetch_add(1);
            if (i >= n) return;
            try {
                fn(i);
            } catch (...) {
                std::lock_guard lk(err_mtx);
                if (!err) err = std::current_exception();
                return;
            }
        }
    };
    std::vector<std::thread> pool;
    pool.reserve(size_t(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(body);
    for (auto& th : pool) th.join();
    if (err) std::rethrow_exception(err);
}

std::vector<double> sample_times_for(double duration, int n_samples) {
    std::vector<double> out(static_cast<size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k)
        out[size_t(k)] =
            n_samples > 1 ? duration * double(k) / double(n_samples - 1) : duration;
    return out;
}

TrajectoryOutcome stage_trajectory(const GaussianTrajectoryState& init, const ModelParams& p,
                                   const LatticeGraph& g, const Schedule& sched,
                                   const ProtocolOptions& opt, const std::string& stage_tag,
                                   int i) {
    NoiseStream stream(opt.seed, uint64_t(i), salt_from_tag(stage_tag.c_str()));
    TrajectoryOptions topt;
    topt.h = opt.h;
    topt.negate_noise = opt.negate_noise;
    topt.check_positivity = opt.check_positivity;
    topt.diag_tol = opt.diag_tol;
    topt.eig_tol = opt.eig_tol;
    topt.label = stage_tag + "/traj" + std::to_string(i);
    return run_trajectory(init, p, g, sched, sample_times_for(sched.duration, opt.n_samples),
                          stream, topt);
}

namespace {

// Window average of per-trajectory samples in [k0, k1), then mean/stderr over
// trajectories. Used by the stationarity diagnostic.
std::pair<double, double> window_stats(const std::vector<std::vector<double>>& rows,
                                       size_t k0, size_t k1, bool square) {
    const int n = int(rows.size());
    std::vector<double> w(size_t(n), 0.0);
    for (int i = 0; i < n; ++i) {
        double acc = 0;
        for (size_t k = k0; k < k1; ++k) {
            const double val = rows[size_t(i)][k];
            acc += square ? val * val : val;
        }
        w[size_t(i)] = acc / double(k1 - k0);
    }
    double mean = 0;
    for (double x : w) mean += x;
    mean /= n;
    double var = 0;
    for (double x : w) var += (x - mean) * (x - mean);
    const double se = std::sqrt(var / (double(n) * double(n - 1)));
    return {mean, se};
}

EnsembleSeries run_ensemble(const ModelParams& p, const LatticeGraph& g,
                            const Schedule& sched, const ProtocolOptions& opt,
                            const std::string& stage_tag,
                            const std::function<const GaussianTrajectoryState&(int)>& init_of,
                            std::vector<GaussianTrajectoryState>* final_states) {
    if (opt.n_traj < 2) throw ConfigError("ensemble needs at least 2 trajectories");
    if (opt.n_samples < 2) throw ConfigError("need at least 2 samples");
    p.validate();

    EnsembleSeries out;
    out.abar.resize(size_t(opt.n_traj));
    out.nk0.resize(size_t(opt.n_traj));
    if (final_states) final_states->resize(size_t(opt.n_traj));

    std::vector<double> actual_t;
    std::once_flag t_once;

    for_each_trajectory(opt.n_traj, opt.workers, [&](int i) {
        TrajectoryOutcome r = stage_trajectory(init_of(i), p, g, sched, opt, stage_tag, i);
        std::call_once(t_once, [&] { actual_t = r.samples.t; });
        out.abar[size_t(i)] = std::move(r.samples.abar);
        out.nk0[size_t(i)] = std::move(r.samples.nk0);
        if (final_states) (*final_states)[size_t(i)] = std::move(r.final_state);
    });
    out.t = actual_t;
    return out;
}

} // namespace

StationarityReport stationarity_from_series(const EnsembleSeries& s) {
    if (s.n_traj() < 2) throw ConfigError("stationarity check needs >= 2 trajectories");
    const size_t m = s.t.size();
    if (m < 8) throw ConfigError("stationarity check needs >= 8 samples");
    const size_t k0 = m / 2, k1 = (3 * m) / 4;
    const auto [m2a, se2a] = window_stats(s.abar, k0, k1, true);
    const auto [m2b, se2b] = window_stats(s.abar, k1, m, true);
    const auto [nka, sena] = window_stats(s.nk0, k0, k1, false);
    const auto [nkb, senb] = window_stats(s.nk0, k1, m, false);
    StationarityReport st;
    st.drift_m2 = std::abs(m2b - m2a);
    st.tol_m2 = 2.0 * std::sqrt(se2a * se2a + se2b * se2b);
    st.drift_nk0 = std::abs(nkb - nka);
    st.tol_nk0 = 2.0 * std::sqrt(sena * sena + senb * senb);
    st.ok = st.drift_m2 <= st.tol_m2 && st.drift_nk0 <= st.tol_nk0;
    return st;
}

PreparedEnsemble prepare_steady_ensemble(const ModelParams& p, const LatticeGraph& g,
                                         double t_burn, const ProtocolOptions& opt,
                                         const std::string& stage_tag) {
    if (!(t_burn > 0)) throw ConfigError("burn-in time must be positive");
    const GaussianTrajectoryState vac = GaussianTrajectoryState::vacuum(g.n_sites);
    PreparedEnsemble out;
    const EnsembleSeries series =
        run_ensemble(p, g, Schedule::hold(p.g_drive, t_burn), opt, stage_tag,
                     [&](int) -> const GaussianTrajectoryState& { return vac; }, &out.states);
    out.record = reduce_series(series);
    out.stationarity = stationarity_from_series(series);
    return out;
}

QuenchRun linear_quench(const ModelParams& p, const LatticeGraph& g,
                        const std::vector<GaussianTrajectoryState>& init, double g0,
                        double g1, double velocity, const ProtocolOptions& opt,
                        const std::string& stage_tag, bool store_states) {
    if (!(velocity > 0)) throw ConfigError("quench velocity must be positive");
    if (!(g1 > g0)) throw ConfigError("quench must ramp the drive upward");
    if (int(init.size()) < opt.n_traj)
        throw ConfigError("fewer prepared states than requested trajectories");

    QuenchRun out;
    out.velocity = velocity;
    out.duration = (g1 - g0) / velocity;
    const Schedule sched = Schedule::ramp(g0, g1, out.duration);
    ModelParams pq = p;
    pq.g_drive = g1; // schedule overrides the drive during the ramp
    const EnsembleSeries series = run_ensemble(
        pq, g, sched, opt, stage_tag,
        [&](int i) -> const GaussianTrajectoryState& { return init[size_t(i)]; },
        store_states ? &out.states : nullptr);
    out.record = reduce_series(series);
    out.abar_final.resize(size_t(opt.n_traj));
    for (int i = 0; i < opt.n_traj; ++i) out.abar_final[size_t(i)] = series.abar[size_t(i)].back();
    return out;
}

RelaxRun relaxation_run(const ModelParams& p, const LatticeGraph& g, double g_hold,
                        double amp, double t_max, const ProtocolOptions& opt,
                        const std::string& stage_tag) {
    if (!(t_max > 0)) throw ConfigError("relaxation time must be positive");
    ModelParams ph = p;
    ph.g_drive = g_hold;
    const GaussianTrajectoryState init =
        GaussianTrajectoryState::polarized(g.n_sites, cplx(0.0, amp));
    RelaxRun out;
    out.g = g_hold;
    out.series = run_ensemble(ph, g, Schedule::hold(g_hold, t_max), opt, stage_tag,
                              [&](int) -> const GaussianTrajectoryState& { return init; },
                              nullptr);
    out.record = reduce_series(out.series);
    return out;
}

} // namespace kerrlat
