// kerrlat: one binary driving the whole scaling study. Subcommands map to the
// experiment stages (quench sweeps, relaxation/gap scans, data collapse, the
// classical spin reference, snapshot export) plus an oracle self-check that
// re-derives the small-system answers through independent routes.
//
// Every ensemble stage writes a .progress checkpoint keyed by a hash of the
// physics config; interrupting and re-running (or pointing --resume at an old
// output directory) recomputes only missing trajectories, bit-identically,
// because trajectory noise is a pure function of (seed, stage tag, index).
#include <CLI11.hpp>
#include <Eigen/Dense>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <complex>
#include <cstdarg>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "kerrlat/analysis.hpp"
#include "kerrlat/checkpoint.hpp"
#include "kerrlat/config.hpp"
#include "kerrlat/errors.hpp"
#include "kerrlat/fock.hpp"
#include "kerrlat/gaussian_state.hpp"
#include "kerrlat/gta.hpp"
#include "kerrlat/ising.hpp"
#include "kerrlat/model.hpp"
#include "kerrlat/protocols.hpp"
#include "kerrlat/record.hpp"
#include "kerrlat/rng.hpp"
#include "kerrlat/schedule.hpp"

namespace fs = std::filesystem;
using namespace kerrlat;

namespace {

std::string strf(const char* fmt, ...) {
    char buf[2048];
    va_list ap;
    va_start(ap, fmt);
    vsnprintf(buf, sizeof buf, fmt, ap);
    va_end(ap);
    return std::string(buf);
}

struct WallTimer {
    std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
    double seconds() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    }
};

// Reads prefer the output directory (fresh files win), then the --resume
// directory; all writes go to the output directory.
struct Paths {
    fs::path out;
    fs::path resume;

    fs::path dst(const std::string& name) const { return out / name; }
    fs::path src(const std::string& name) const {
        if (fs::exists(out / name)) return out / name;
        if (!resume.empty() && fs::exists(resume / name)) return resume / name;
        return out / name;
    }
};

// Checkpoints are keyed by the config hash minus run-shape knobs that cannot
// change the data: worker count and the pure-analysis sections.
uint64_t data_hash(RunConfig c) {
    c.workers = 0;
    c.collapse = CollapseConfig{};
    c.gapfit = GapFitConfig{};
    return config_hash(c);
}

std::string tag_burn(int L, double g) { return strf("burn/L%d/G%.17g", L, g); }
std::string tag_ramp(int L, double v) { return strf("ramp/L%d/v%.17g", L, v); }
std::string tag_relax(int L, double g) { return strf("relax/L%d/G%.17g", L, g); }
std::string tag_ising(int L, double v) { return strf("isingkz/L%d/v%.17g", L, v); }
std::string tag_binder(int L, double t) { return strf("binder/L%d/T%.17g", L, t); }

int traj_count(const QuenchConfig& q, double v) {
    if (q.n_traj_override > 0) return q.n_traj_override;
    return v >= q.slow_threshold ? q.n_traj_fast : q.n_traj_slow;
}

ProtocolOptions proto_options(const RunConfig& c, int n_traj) {
    ProtocolOptions o;
    o.h = c.h;
    o.n_traj = n_traj;
    o.workers = c.workers;
    o.seed = c.seed;
    o.n_samples = c.n_samples;
    // the benign covariance dip from Euler error is O(h) (about 0.25 h at the
    // squeezing transient), so the abort ceiling scales with the step
    const double scale = std::max(1.0, c.h / 1e-4);
    o.diag_tol *= scale;
    o.eig_tol *= scale;
    return o;
}

std::pair<double, double> mean_se(const std::vector<double>& xs) {
    const double n = double(xs.size());
    double m = 0;
    for (double x : xs) m += x;
    m /= n;
    double ss = 0;
    for (double x : xs) ss += (x - m) * (x - m);
    const double se = xs.size() > 1 ? std::sqrt(ss / (n * (n - 1.0))) : 0.0;
    return {m, se};
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out;
    size_t start = 0;
    while (true) {
        size_t pos = line.find(',', start);
        if (pos == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, pos - start));
        start = pos + 1;
    }
    return out;
}

// Plain numeric table with one header line; '#' lines are skipped.
std::vector<std::vector<double>> read_table_csv(const fs::path& path,
                                                std::vector<std::string>& header) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open " + path.string());
    header.clear();
    std::vector<std::vector<double>> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        if (header.empty()) {
            header = split_csv_line(line);
            continue;
        }
        std::vector<double> row;
        for (const auto& tok : split_csv_line(line)) {
            char* end = nullptr;
            const double x = std::strtod(tok.c_str(), &end);
            if (end == tok.c_str() || *end != '\0')
                throw ConfigError("bad numeric field '" + tok + "' in " + path.string());
            row.push_back(x);
        }
        rows.push_back(std::move(row));
    }
    return rows;
}

int column_index(const std::vector<std::string>& header, const std::string& name,
                 const fs::path& path) {
    for (size_t i = 0; i < header.size(); ++i)
        if (header[i] == name) return int(i);
    throw ConfigError("column '" + name + "' missing from " + path.string());
}

void write_manifest(const Paths& paths, const std::string& sub, const RunConfig& c,
                    double wall_seconds, const std::vector<std::string>& notes) {
    std::ofstream out(paths.dst("manifest_" + sub + ".txt"));
    out << "# kerrlat manifest\n";
    out << "# subcommand: " << sub << "\n";
    out << "# version: kerrlat 1.0.0\n";
    out << "# compiler: " << __VERSION__ << "\n";
    out << strf("# eigen: %d.%d.%d\n", EIGEN_WORLD_VERSION, EIGEN_MAJOR_VERSION,
                EIGEN_MINOR_VERSION);
    out << strf("# seed: %llu\n", (unsigned long long)c.seed);
    out << strf("# workers: %d (0 means hardware concurrency; %u here)\n", c.workers,
                std::thread::hardware_concurrency());
    out << strf("# config_hash: %016llx\n", (unsigned long long)config_hash(c));
    out << strf("# data_hash: %016llx\n", (unsigned long long)data_hash(c));
    out << strf("# wall_seconds: %.3f\n", wall_seconds);
    for (const auto& n : notes) out << "# note: " << n << "\n";
    out << "# config: the last line is the canonical config; feed it back via --config\n";
    out << serialize_config(c) << "\n";
}

// ---------------------------------------------------------------------------
// Checkpointed ensemble stage. `inits` holds either one shared initial state
// or one per trajectory; rows/states always end up ordered by trajectory
// index, so the files never depend on worker scheduling.

struct StageResult {
    EnsembleSeries series;
    std::vector<GaussianTrajectoryState> states; // filled iff want_states
    int reused = 0;
};

StageResult run_stage_checkpointed(const std::vector<GaussianTrajectoryState>& inits,
                                   const ModelParams& p, const LatticeGraph& g,
                                   const Schedule& sched, const ProtocolOptions& opt,
                                   const std::string& tag, const Paths& paths,
                                   const std::string& base, uint64_t guard,
                                   bool want_states) {
    const std::vector<double> times = sample_times_for(sched.duration, opt.n_samples);
    const std::string prog_name = base + ".progress";
    const std::string states_name = base + ".states";
    const int n = opt.n_traj;

    std::vector<std::vector<double>> abar(n), nk0(n);
    std::vector<char> have(n, 0);
    std::vector<GaussianTrajectoryState> states(want_states ? n : 0);

    auto pf = load_progress(paths.src(prog_name).string(), guard);
    if (pf) {
        if (pf->stage != tag)
            throw ConfigError("checkpoint " + prog_name + " belongs to stage '" + pf->stage +
                              "', expected '" + tag + "'");
        if (pf->t != times)
            throw ConfigError("checkpoint " + prog_name +
                              " was sampled on a different time grid");
    }

    if (want_states) {
        // states are only persisted for completed stages, so either the whole
        // stage loads or the whole stage is recomputed (identical either way)
        const fs::path sp = paths.src(states_name);
        bool complete = false;
        if (pf && fs::exists(sp)) {
            StatesFile sf = load_states(sp.string(), guard);
            if (sf.stage == tag && int(sf.states.size()) == n &&
                int(pf->traj_index.size()) >= n) {
                std::vector<char> seen(n, 0);
                for (size_t k = 0; k < pf->traj_index.size(); ++k) {
                    const int i = pf->traj_index[k];
                    if (i < 0 || i >= n || seen[i]) continue;
                    if (pf->abar[k].size() != times.size()) break;
                    abar[i] = pf->abar[k];
                    nk0[i] = pf->nk0[k];
                    seen[i] = 1;
                }
                complete = std::count(seen.begin(), seen.end(), 1) == n;
                if (complete) {
                    states = std::move(sf.states);
                    std::fill(have.begin(), have.end(), 1);
                }
            }
        }
        if (!complete) std::fill(have.begin(), have.end(), 0);
    } else if (pf) {
        for (size_t k = 0; k < pf->traj_index.size(); ++k) {
            const int i = pf->traj_index[k];
            if (i < 0 || i >= n || have[i]) continue;
            if (pf->abar[k].size() != times.size())
                throw ConfigError("checkpoint " + prog_name + " has a malformed row");
            abar[i] = std::move(pf->abar[k]);
            nk0[i] = std::move(pf->nk0[k]);
            have[i] = 1;
        }
    }
    pf.reset();

    std::vector<int> missing;
    for (int i = 0; i < n; ++i)
        if (!have[i]) missing.push_back(i);
    const int reused = n - int(missing.size());
    fprintf(stderr, "[%s] %d/%d trajectories from checkpoint, computing %zu\n", tag.c_str(),
            reused, n, missing.size());

    auto snapshot_progress = [&]() {
        ProgressFile out;
        out.hash = guard;
        out.stage = tag;
        out.t = times;
        for (int i = 0; i < n; ++i) {
            if (!have[i]) continue;
            out.traj_index.push_back(i);
            out.abar.push_back(abar[i]);
            out.nk0.push_back(nk0[i]);
        }
        save_progress(paths.dst(prog_name).string(), out);
    };

    if (!missing.empty()) {
        std::mutex mtx;
        int completed = 0;
        const int save_every = std::max<int>(1, int(missing.size()) / 20);
        for_each_trajectory(int(missing.size()), opt.workers, [&](int k) {
            const int i = missing[size_t(k)];
            const GaussianTrajectoryState& init = inits.size() == 1 ? inits[0] : inits.at(i);
            TrajectoryOutcome res = stage_trajectory(init, p, g, sched, opt, tag, i);
            std::lock_guard<std::mutex> lock(mtx);
            abar[i] = std::move(res.samples.abar);
            nk0[i] = std::move(res.samples.nk0);
            if (want_states) states[i] = std::move(res.final_state);
            have[i] = 1;
            ++completed;
            if (completed % save_every == 0 && completed < int(missing.size()))
                snapshot_progress();
        });
    }
    snapshot_progress();
    if (want_states) {
        StatesFile sf;
        sf.hash = guard;
        sf.stage = tag;
        sf.states = states;
        save_states(paths.dst(states_name).string(), sf);
    }

    StageResult res;
    res.series.t = times;
    res.series.abar = std::move(abar);
    res.series.nk0 = std::move(nk0);
    res.states = std::move(states);
    res.reused = reused;
    return res;
}

// ---------------------------------------------------------------------------
// quench: burn in at G0 (states cached), then ramp to G1 at each velocity.

void cmd_quench(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    const QuenchConfig& q = c.quench;
    const uint64_t guard = data_hash(c);
    std::vector<std::string> notes;

    for (size_t Li = 0; Li < q.sizes.size(); ++Li) {
        const int L = q.sizes[Li];
        const LatticeGraph g = build_lattice(L, c.periodic);
        ModelParams p = c.model;
        p.g_drive = q.g_start;

        int burn_traj = 0;
        for (double v : q.velocities) burn_traj = std::max(burn_traj, traj_count(q, v));

        ProtocolOptions bopt = proto_options(c, burn_traj);

        auto burn = run_stage_checkpointed(
            {GaussianTrajectoryState::vacuum(g.n_sites)}, p, g,
            Schedule::hold(q.g_start, c.burn_in), bopt, tag_burn(L, q.g_start), paths,
            strf("burn_L%d", L), guard, /*want_states=*/true);
        EnsembleRecord brec = reduce_series(burn.series);
        write_record_csv(paths.dst(strf("burn_L%d.csv", L)).string(), brec);

        if (burn_traj >= 2 && c.n_samples >= 8) {
            StationarityReport st = stationarity_from_series(burn.series);
            notes.push_back(strf("L=%d burn stationarity %s (m2 drift %.3g tol %.3g, nk0 "
                                 "drift %.3g tol %.3g)",
                                 L, st.ok ? "ok" : "NOT REACHED", st.drift_m2, st.tol_m2,
                                 st.drift_nk0, st.tol_nk0));
        }

        std::vector<std::vector<double>> summary;
        for (size_t vi = 0; vi < q.velocities.size(); ++vi) {
            const double v = q.velocities[vi];
            const int nt = traj_count(q, v);
            const double dur = (q.g_end - q.g_start) / v;
            ProtocolOptions opt = bopt;
            opt.n_traj = nt;

            auto run = run_stage_checkpointed(burn.states, p, g,
                                              Schedule::ramp(q.g_start, q.g_end, dur), opt,
                                              tag_ramp(L, v), paths,
                                              strf("quench_L%d_v%zu", L, vi), guard,
                                              q.store_states);
            EnsembleRecord rec = reduce_series(run.series);
            write_record_csv(paths.dst(strf("quench_L%d_v%zu.csv", L, vi)).string(), rec);
            summary.push_back({v, rec.m2.back(), rec.se_m2.back(), double(nt), dur});
        }
        write_csv(paths.dst(strf("kz_summary_L%d.csv", L)).string(),
                  {"velocity", "m2_final", "stderr_m2", "n_traj", "duration"}, summary);
        notes.push_back(strf("L=%d: %zu velocities, %d-trajectory burn-in", L,
                             q.velocities.size(), burn_traj));
    }
    write_manifest(paths, "quench", c, timer.seconds(), notes);
}

// ---------------------------------------------------------------------------
// relax: polarized start, hold at each G, fit the order-parameter decay.

void cmd_relax(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    const RelaxConfig& r = c.relax;
    const uint64_t guard = data_hash(c);
    std::vector<std::string> notes;

    for (int L : r.sizes) {
        const LatticeGraph g = build_lattice(L, c.periodic);
        std::vector<std::vector<double>> rows;
        for (size_t gi = 0; gi < r.g_values.size(); ++gi) {
            const double gv = r.g_values[gi];
            ModelParams p = c.model;
            p.g_drive = gv;
            ProtocolOptions opt = proto_options(c, r.n_traj);

            auto init = GaussianTrajectoryState::polarized(g.n_sites, cplx(0.0, r.amp));
            auto run =
                run_stage_checkpointed({init}, p, g, Schedule::hold(gv, r.t_max), opt,
                                       tag_relax(L, gv), paths,
                                       strf("relax_L%d_g%zu", L, gi), guard, false);
            EnsembleRecord rec = reduce_series(run.series);
            write_record_csv(paths.dst(strf("relax_L%d_g%zu.csv", L, gi)).string(), rec);

            const double tmin = r.t_min_fit > 0 ? r.t_min_fit : default_t_min_fit(L);
            ExpFit fit = fit_exp_decay(rec.t, rec.mean, rec.se_mean, tmin);
            rows.push_back({gv, fit.lambda, fit.se_lambda, fit.amplitude, fit.r2,
                            double(fit.n_used), fit.t_lo, fit.t_hi});
            notes.push_back(strf("L=%d G=%.4g: lambda %.6g +- %.2g (r2 %.5f, %d pts)", L,
                                 gv, fit.lambda, fit.se_lambda, fit.r2, fit.n_used));
        }
        write_csv(paths.dst(strf("gaps_L%d.csv", L)).string(),
                  {"g", "lambda", "stderr_lambda", "amplitude", "r2", "n_used", "t_lo",
                   "t_hi"},
                  rows);
        bool mono = true;
        for (size_t k = 1; k < rows.size(); ++k)
            if (rows[k][1] >= rows[k - 1][1]) mono = false;
        notes.push_back(strf("L=%d: lambda(G) strictly decreasing toward G_c: %s", L,
                             mono ? "yes" : "NO"));
    }
    write_manifest(paths, "relax", c, timer.seconds(), notes);
}

// ---------------------------------------------------------------------------
// gap-scan: power law of the fitted rates against |G - G_c|, short-xi regime.

void cmd_gap_scan(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    std::vector<std::string> notes;
    std::vector<GapPoint> pts;
    for (int L : c.relax.sizes) {
        const fs::path file = paths.src(strf("gaps_L%d.csv", L));
        if (!fs::exists(file)) continue;
        std::vector<std::string> header;
        auto rows = read_table_csv(file, header);
        const int cg = column_index(header, "g", file);
        const int cl = column_index(header, "lambda", file);
        for (const auto& row : rows) pts.push_back({double(L), row[cg], row[cl]});
    }
    if (pts.empty())
        throw ConfigError("no gaps_L*.csv tables found; run `relax` first");

    const GapFitConfig& gf = c.gapfit;
    GapPowerLaw fit = gap_power_law(pts, gf.g_c, gf.nu, gf.regime_cutoff);

    std::ofstream out(paths.dst("gap_power_law.txt"));
    out << "# asymptotic-decay-rate power law, short-correlation regime only\n";
    out << strf("# g_c %.17g  nu %.17g  regime_cutoff %.17g\n", gf.g_c, gf.nu,
                gf.regime_cutoff);
    out << strf("# slope %.10g  stderr %.3g  r2 %.6f  points %d of %zu\n", fit.slope,
                fit.se_slope, fit.r2, fit.n_used, pts.size());
    out << "# L g lambda in_regime\n";
    for (const auto& pt : pts) {
        const bool in = std::pow(pt.size_L, 1.0 / gf.nu) * (pt.g - gf.g_c) < gf.regime_cutoff;
        out << strf("%g %.17g %.17g %d\n", pt.size_L, pt.g, pt.lambda, in ? 1 : 0);
    }
    notes.push_back(strf("slope %.4g +- %.2g over %d points (expect z*nu)", fit.slope,
                         fit.se_slope, fit.n_used));
    write_manifest(paths, "gap-scan", c, timer.seconds(), notes);
    printf("gap power law: slope %.6g +- %.3g (r2 %.5f, %d points)\n", fit.slope,
           fit.se_slope, fit.r2, fit.n_used);
}

// ---------------------------------------------------------------------------
// collapse: rescale the quench curves, scan z, bootstrap the CI. Reads the
// per-trajectory progress files so resampling sees the raw ensemble.

void cmd_collapse(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    const QuenchConfig& q = c.quench;
    const uint64_t guard = data_hash(c);
    const CollapseMode mode = c.collapse.mode == "f2" ? CollapseMode::f2 : CollapseMode::f1;
    std::vector<std::string> notes;

    std::vector<ScalingCurve> curves;
    std::vector<QuenchEnsembleData> data;
    std::vector<std::vector<double>> curve_rows;
    for (int L : q.sizes) {
        // locate the size index for file naming
        QuenchEnsembleData d;
        d.size_L = L;
        ScalingCurve cur;
        cur.size_L = L;
        for (size_t vi = 0; vi < q.velocities.size(); ++vi) {
            const double v = q.velocities[vi];
            const int nt = traj_count(q, v);
            const std::string name = strf("quench_L%d_v%zu.progress", L, vi);
            auto pf = load_progress(paths.src(name).string(), guard);
            if (!pf)
                throw ConfigError("missing " + name + "; run `quench` first");
            if (pf->stage != tag_ramp(L, v))
                throw ConfigError(name + " belongs to a different stage");
            std::vector<double> finals(nt);
            std::vector<char> seen(nt, 0);
            for (size_t k = 0; k < pf->traj_index.size(); ++k) {
                const int i = pf->traj_index[k];
                if (i < 0 || i >= nt || seen[i] || pf->abar[k].empty()) continue;
                finals[i] = pf->abar[k].back();
                seen[i] = 1;
            }
            if (std::count(seen.begin(), seen.end(), 1) != nt)
                throw ConfigError(name + " is incomplete; re-run `quench` to finish it");

            std::vector<double> sq(finals.size());
            for (size_t k = 0; k < finals.size(); ++k) sq[k] = finals[k] * finals[k];
            auto [m2, se] = mean_se(sq);
            cur.x.push_back(v);
            cur.y.push_back(m2);
            d.velocity.push_back(v);
            d.abar_final.push_back(std::move(finals));
            curve_rows.push_back({double(L), v, m2, se, double(nt)});
        }
        curves.push_back(std::move(cur));
        data.push_back(std::move(d));
    }
    write_csv(paths.dst("collapse_curves.csv").string(),
              {"size_L", "velocity", "m2_final", "stderr_m2", "n_traj"}, curve_rows);

    const CriticalExponents& e = c.collapse.exponents;
    ScanResult scan = scan_z(curves, e, mode, c.collapse.grid, c.collapse.x_lo,
                             c.collapse.x_hi);
    BootstrapResult boot = scan_z_bootstrap(data, e, mode, c.collapse.grid,
                                            c.collapse.bootstrap, c.seed, c.collapse.x_lo,
                                            c.collapse.x_hi);

    if (!scan.z_grid.empty()) {
        std::vector<std::vector<double>> res_rows;
        for (size_t k = 0; k < scan.z_grid.size(); ++k)
            res_rows.push_back({scan.z_grid[k], scan.residual[k]});
        write_csv(paths.dst(strf("collapse_residual_%s.csv", c.collapse.mode.c_str())).string(),
                  {"z", "residual"}, res_rows);
    }

    std::ofstream out(paths.dst(strf("collapse_%s.txt", c.collapse.mode.c_str())));
    out << "# finite-size collapse of the quench curves\n";
    out << strf("# mode %s  beta %.17g  nu %.17g  d %d\n", c.collapse.mode.c_str(), e.beta,
                e.nu, e.d);
    out << strf("# x window [%.17g, %.17g] (f2 master-curve fit)\n", c.collapse.x_lo,
                c.collapse.x_hi);
    out << strf("# z_star %.10g\n", scan.z_star);
    out << strf("# residual_min %.6g  flat %s\n", scan.residual_min,
                scan.flat ? "yes" : "no");
    out << strf("# bootstrap: %d resamples, seed %llu\n", boot.n_resamples,
                (unsigned long long)c.seed);
    out << strf("# z 95%% CI [%.10g, %.10g]  flat_fraction %.3g\n", boot.ci_lo, boot.ci_hi,
                boot.flat_fraction);

    notes.push_back(strf("mode %s: z* = %.4g, 95%% CI [%.4g, %.4g]%s",
                         c.collapse.mode.c_str(), scan.z_star, boot.ci_lo, boot.ci_hi,
                         scan.flat ? " (FLAT scan)" : ""));
    write_manifest(paths, "collapse", c, timer.seconds(), notes);
    printf("collapse (%s): z* = %.6g, 95%% CI [%.6g, %.6g], flat_fraction %.3g\n",
           c.collapse.mode.c_str(), scan.z_star, boot.ci_lo, boot.ci_hi,
           boot.flat_fraction);
}

// ---------------------------------------------------------------------------
// ising-kz: temperature ramps of the Metropolis lattice plus equilibrium
// Binder points; the same collapse machinery then extracts z.

void cmd_ising(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    const IsingConfig& is = c.ising;
    const uint64_t guard = data_hash(c);
    const double tc = ising_tc_exact();
    std::vector<std::string> notes;

    IsingOptions iopt;
    iopt.n_real = is.n_real;
    iopt.workers = c.workers;
    iopt.seed = c.seed;
    iopt.n_samples = c.n_samples;
    iopt.equil_sweeps = is.equil_sweeps;

    std::vector<QuenchEnsembleData> data;
    std::vector<ScalingCurve> curves;
    for (int L : is.sizes) {
        QuenchEnsembleData d;
        d.size_L = L;
        ScalingCurve cur;
        cur.size_L = L;
        std::vector<std::vector<double>> summary;
        for (size_t vi = 0; vi < is.velocities.size(); ++vi) {
            const double v = is.velocities[vi];
            const std::string tag = tag_ising(L, v);
            const std::string base = strf("ising_L%d_v%zu", L, vi);

            std::vector<std::vector<double>> rows(is.n_real);
            std::vector<double> tgrid;
            bool loaded = false;
            if (auto pf = load_progress(paths.src(base + ".progress").string(), guard)) {
                if (pf->stage == tag && int(pf->traj_index.size()) >= is.n_real) {
                    std::vector<char> seen(is.n_real, 0);
                    for (size_t k = 0; k < pf->traj_index.size(); ++k) {
                        const int i = pf->traj_index[k];
                        if (i < 0 || i >= is.n_real || seen[i]) continue;
                        rows[i] = std::move(pf->abar[k]);
                        seen[i] = 1;
                    }
                    loaded = std::count(seen.begin(), seen.end(), 1) == is.n_real;
                    tgrid = pf->t;
                }
            }
            if (!loaded) {
                fprintf(stderr, "[%s] running %d realizations\n", tag.c_str(), is.n_real);
                IsingQuenchRun run = ising_linear_quench(L, tc, is.eps0, v, iopt, tag);
                rows = std::move(run.m_rows);
                tgrid = run.t;
                ProgressFile out;
                out.hash = guard;
                out.stage = tag;
                out.t = tgrid;
                for (int i = 0; i < is.n_real; ++i) {
                    out.traj_index.push_back(i);
                    out.abar.push_back(rows[i]);
                    out.nk0.push_back(rows[i]); // same quantity; keeps row shape
                }
                save_progress(paths.dst(base + ".progress").string(), out);
            } else {
                fprintf(stderr, "[%s] %d realizations from checkpoint\n", tag.c_str(),
                        is.n_real);
            }

            std::vector<double> finals(is.n_real), sq(is.n_real);
            for (int i = 0; i < is.n_real; ++i) {
                finals[i] = rows[i].back();
                sq[i] = finals[i] * finals[i];
            }
            auto [m2, se] = mean_se(sq);
            summary.push_back({v, m2, se, double(is.n_real), tgrid.back()});
            cur.x.push_back(v);
            cur.y.push_back(m2);
            d.velocity.push_back(v);
            d.abar_final.push_back(std::move(finals));
        }
        write_csv(paths.dst(strf("ising_kz_L%d.csv", L)).string(),
                  {"velocity", "m2_final", "stderr_m2", "n_real", "sweeps"}, summary);
        curves.push_back(std::move(cur));
        data.push_back(std::move(d));
    }

    // z both ways: f2 master-curve inversion (the quantitative route) and the
    // f1 grid scan as a cross-check
    const double vmin = *std::min_element(is.velocities.begin(), is.velocities.end());
    const double vmax = *std::max_element(is.velocities.begin(), is.velocities.end());
    CriticalExponents e = c.collapse.exponents;
    ScanResult f2 = scan_z(curves, e, CollapseMode::f2, c.collapse.grid, vmin, vmax);
    ScanResult f1 = scan_z(curves, e, CollapseMode::f1, c.collapse.grid, vmin, vmax);
    BootstrapResult boot = scan_z_bootstrap(data, e, CollapseMode::f2, c.collapse.grid,
                                            c.collapse.bootstrap, c.seed, vmin, vmax);

    // equilibrium Binder points; cheap enough to recompute every run
    std::vector<std::vector<double>> brow;
    std::vector<std::vector<double>> ub_by_size;
    IsingOptions bopt = iopt;
    bopt.n_real = is.binder_n_real;
    for (int L : is.binder_sizes) {
        std::vector<double> ubs;
        for (double T : is.binder_ts) {
            BinderPoint bp = ising_equilibrium_binder(L, T, is.binder_n_eq, is.binder_n_samp,
                                                      is.binder_thin, bopt, tag_binder(L, T));
            brow.push_back({T, double(L), bp.m2, bp.m4, bp.ub, bp.se_ub});
            ubs.push_back(bp.ub);
        }
        ub_by_size.push_back(std::move(ubs));
        fprintf(stderr, "[binder] L=%d done\n", L);
    }
    write_csv(paths.dst("ising_binder.csv").string(),
              {"T", "L", "m2", "m4", "ub", "stderr_ub"}, brow);

    std::optional<double> tcross;
    if (is.binder_sizes.size() >= 2)
        tcross = binder_crossing(is.binder_ts, ub_by_size.front(), ub_by_size.back());

    std::ofstream out(paths.dst("ising_summary.txt"));
    out << "# classical spin reference: dynamical exponent and Binder crossing\n";
    out << strf("# T_c exact %.17g\n", tc);
    out << strf("# z (f2 master-curve inversion) %.10g\n", f2.z_star);
    out << strf("# z 95%% CI [%.10g, %.10g] over %d resamples, flat_fraction %.3g\n",
                boot.ci_lo, boot.ci_hi, boot.n_resamples, boot.flat_fraction);
    out << strf("# z (f1 grid scan, cross-check) %.10g%s\n", f1.z_star,
                f1.flat ? " (flat)" : "");
    if (tcross) {
        out << strf("# binder crossing T* %.10g  |T*-T_c|/T_c %.3g\n", *tcross,
                    std::abs(*tcross - tc) / tc);
        notes.push_back(strf("binder crossing at T* = %.6g (off T_c by %.3g rel)", *tcross,
                             std::abs(*tcross - tc) / tc));
    } else {
        out << "# binder crossing: none found on the T grid\n";
        notes.push_back("binder crossing not bracketed by the T grid");
    }
    notes.push_back(strf("z = %.4g [%.4g, %.4g] (f2), %.4g (f1)", f2.z_star, boot.ci_lo,
                         boot.ci_hi, f1.z_star));
    write_manifest(paths, "ising-kz", c, timer.seconds(), notes);
    printf("ising: z = %.6g, 95%% CI [%.6g, %.6g]; ", f2.z_star, boot.ci_lo, boot.ci_hi);
    if (tcross)
        printf("binder T* = %.8g (T_c %.8g)\n", *tcross, tc);
    else
        printf("no binder crossing on grid\n");
}

// ---------------------------------------------------------------------------
// snapshot: sign(Im alpha) fields of stored quench final states.

void cmd_snapshot(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    const QuenchConfig& q = c.quench;
    const uint64_t guard = data_hash(c);
    std::vector<std::string> notes;
    std::vector<std::vector<double>> summary;
    int files = 0;

    for (int L : q.sizes) {
        for (size_t vi = 0; vi < q.velocities.size(); ++vi) {
            const double v = q.velocities[vi];
            const fs::path sp = paths.src(strf("quench_L%d_v%zu.states", L, vi));
            if (!fs::exists(sp)) continue;
            StatesFile sf = load_states(sp.string(), guard);
            if (sf.stage != tag_ramp(L, v))
                throw ConfigError(sp.string() + " belongs to a different stage");

            std::ofstream out(paths.dst(strf("snapshots_L%d_v%zu.txt", L, vi)));
            out << "# sign(Im alpha) on the lattice, row-major, one lattice row per line\n";
            out << strf("# L: %d\n# velocity: %.17g\n# members: %zu\n# stage: %s\n", L, v,
                        sf.states.size(), sf.stage.c_str());
            out << strf("# config_hash: %016llx\n", (unsigned long long)guard);
            for (size_t m = 0; m < sf.states.size(); ++m) {
                const auto& st = sf.states[m];
                double acc = 0;
                for (int k = 0; k < st.n(); ++k) acc += st.alpha(k).imag() < 0 ? -1.0 : 1.0;
                const double msign = acc / double(st.n());
                out << strf("# member %zu msign %.17g\n", m, msign);
                for (int y = 0; y < L; ++y) {
                    for (int x = 0; x < L; ++x) {
                        const int i = y * L + x;
                        out << (st.alpha(i).imag() < 0 ? "-1" : "+1")
                            << (x + 1 < L ? " " : "\n");
                    }
                }
                out << "\n";
                summary.push_back({double(L), v, double(m), msign});
            }
            ++files;
        }
    }
    if (files == 0)
        throw ConfigError("no quench .states files found; run `quench` with "
                          "quench.store_states = true first");
    write_csv(paths.dst("snapshot_summary.csv").string(),
              {"size_L", "velocity", "member", "msign"}, summary);
    notes.push_back(strf("%d snapshot files, %zu members total", files, summary.size()));
    write_manifest(paths, "snapshot", c, timer.seconds(), notes);
    printf("snapshot: wrote %d grid files (%zu members)\n", files, summary.size());
}

// ---------------------------------------------------------------------------
// oracle-check: every cheap cross-validation this code base rests on, each
// computed through two independent routes (or against a frozen reference).

// quadrature-covariance flow in (x1,p1,x2,p2,...) coordinates; conditional
// form subtracts the homodyne back-action term for every measured site
struct QuadRiccati {
    Eigen::MatrixXd A;
    double gamma = 1.0;
    bool conditional = true;

    Eigen::MatrixXd deriv(const Eigen::MatrixXd& s) const {
        const int m = int(s.rows());
        Eigen::MatrixXd d = A * s + s * A.transpose() +
                            0.5 * gamma * Eigen::MatrixXd::Identity(m, m);
        if (conditional) {
            const Eigen::MatrixXd sh = s - 0.5 * Eigen::MatrixXd::Identity(m, m);
            for (int j = 0; j < m; j += 2) {
                const Eigen::VectorXd chi = std::sqrt(2.0 * gamma) * sh.col(j);
                d.noalias() -= chi * chi.transpose();
            }
        }
        return d;
    }

    Eigen::MatrixXd integrate(Eigen::MatrixXd s, double T, double h) const {
        const long n = std::lround(T / h);
        for (long k = 0; k < n; ++k) {
            const Eigen::MatrixXd k1 = deriv(s);
            const Eigen::MatrixXd k2 = deriv(s + 0.5 * h * k1);
            const Eigen::MatrixXd k3 = deriv(s + 0.5 * h * k2);
            const Eigen::MatrixXd k4 = deriv(s + h * k3);
            s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
        }
        return s;
    }
};

Eigen::MatrixXd quad_drift_matrix(int n_sites, double delta, double gval, double gamma,
                                  double j,
                                  const std::vector<std::pair<int, int>>& bonds) {
    Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2 * n_sites, 2 * n_sites);
    for (int i = 0; i < n_sites; ++i) {
        A(2 * i, 2 * i) = -0.5 * gamma;
        A(2 * i + 1, 2 * i + 1) = -0.5 * gamma;
        A(2 * i, 2 * i + 1) = -(delta + gval);
        A(2 * i + 1, 2 * i) = delta - gval;
    }
    for (auto [a, b] : bonds) {
        A(2 * a, 2 * b + 1) = -j;
        A(2 * a + 1, 2 * b) = j;
        A(2 * b, 2 * a + 1) = -j;
        A(2 * b + 1, 2 * a) = j;
    }
    return A;
}

void quad_to_uv(const Eigen::MatrixXd& s, Eigen::MatrixXcd& u, Eigen::MatrixXcd& v) {
    const int n = int(s.rows()) / 2;
    u.resize(n, n);
    v.resize(n, n);
    for (int i = 0; i < n; ++i) {
        for (int j = 0; j < n; ++j) {
            const double sxx = s(2 * i, 2 * j), spp = s(2 * i + 1, 2 * j + 1);
            const double sxp = s(2 * i, 2 * j + 1), spx = s(2 * i + 1, 2 * j);
            u(i, j) = cplx(0.5 * (sxx - spp), 0.5 * (sxp + spx));
            v(i, j) = cplx(0.5 * (sxx + spp - (i == j ? 1.0 : 0.0)), 0.5 * (sxp - spx));
        }
    }
}

GaussianTrajectoryState gta_noise_free(const ModelParams& p, const LatticeGraph& g,
                                       double T, double h) {
    auto s = GaussianTrajectoryState::vacuum(g.n_sites);
    GtaWorkspace ws;
    ws.resize(g.n_sites);
    const Eigen::VectorXd dw = Eigen::VectorXd::Zero(g.n_sites);
    const long n = std::lround(T / h);
    for (long k = 0; k < n; ++k) em_step(s, p, g, p.g_drive, h, dw, ws);
    return s;
}

struct OracleReport {
    std::ofstream file;
    bool all_ok = true;

    void item(const std::string& name, bool ok, const std::string& detail) {
        const std::string line =
            strf("%-4s %-28s %s", ok ? "ok" : "FAIL", name.c_str(), detail.c_str());
        printf("%s\n", line.c_str());
        fflush(stdout);
        file << line << "\n";
        if (!ok) all_ok = false;
    }
};

bool cmd_oracle(const RunConfig& c, const Paths& paths) {
    WallTimer timer;
    OracleReport rep;
    rep.file.open(paths.dst("oracle_report.txt"));
    rep.file << "# oracle cross-checks, two independent routes per quantity\n";

    { // counter-based generator known answers
        const auto r0 = detail::philox4x32_10({0u, 0u, 0u, 0u}, 0u, 0u);
        const auto r1 = detail::philox4x32_10(
            {0xffffffffu, 0xffffffffu, 0xffffffffu, 0xffffffffu}, 0xffffffffu, 0xffffffffu);
        const auto r2 = detail::philox4x32_10({0x243f6a88u, 0x85a308d3u, 0x13198a2eu,
                                               0x03707344u},
                                              0xa4093822u, 0x299f31d0u);
        const bool ok =
            r0 == std::array<uint32_t, 4>{0x6627e8d5u, 0xe169c58du, 0xbc57ac4cu,
                                          0x9b00dbd8u} &&
            r1 == std::array<uint32_t, 4>{0x408f276du, 0x41c83b0eu, 0xa20bc7c6u,
                                          0x6d5451fdu} &&
            r2 == std::array<uint32_t, 4>{0xd16cfe09u, 0x94fdccebu, 0x5001e420u,
                                          0x24126ea1u};
        rep.item("philox-kat", ok, "3 published test vectors");
    }

    { // bright mean-field root: closed form must null the drift
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 1.0;
        p.g_drive = 0.86;
        p.gamma = 1.0;
        p.j_hop = 1.0;
        const double dj = p.delta + p.j_hop;
        const double r2 = (dj + std::sqrt(p.g_drive * p.g_drive -
                                          0.25 * p.gamma * p.gamma)) /
                          p.u_kerr;
        const cplx e2 = (cplx(dj - p.u_kerr * r2, 0.5 * p.gamma)) / p.g_drive;
        const double theta = -0.5 * std::arg(e2);
        const cplx alpha = std::sqrt(r2) * std::exp(cplx(0.0, theta));
        const double drift = std::abs(mean_field_drift(alpha, p));
        const double vth = vacuum_stability_threshold(p);
        const bool ok = drift < 1e-12 && std::abs(r2 - 0.69971422738143607) < 1e-14 &&
                        std::abs(vth - 0.5) < 1e-15 && std::abs(e2) - 1.0 < 1e-12;
        rep.item("mean-field-root", ok,
                 strf("|drift| %.2e, r^2 %.17g, vacuum threshold %.3g", drift, r2, vth));
    }

    { // single site, no Kerr: stepped covariances against the quadrature
      // Riccati flow (RK4, independent coordinates) and frozen steady values
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 0.0;
        p.g_drive = 0.3;
        p.gamma = 1.0;
        p.j_hop = 0.0;
        const auto g1 = build_lattice(1);
        const auto s = gta_noise_free(p, g1, 80.0, 1e-3);
        QuadRiccati ric{quad_drift_matrix(1, p.delta, p.g_drive, p.gamma, 0.0, {}),
                        p.gamma, true};
        const Eigen::MatrixXd sig =
            ric.integrate(0.5 * Eigen::MatrixXd::Identity(2, 2), 80.0, 1e-3);
        Eigen::MatrixXcd u, v;
        quad_to_uv(sig, u, v);
        const double cross = std::abs(s.u(0, 0) - u(0, 0)) + std::abs(s.v(0, 0) - v(0, 0));
        const double frozen =
            std::abs(s.u(0, 0) - cplx(-0.132233241526061, -0.061827332294999433)) +
            std::abs(s.v(0, 0) - cplx(0.020872584403526684, 0.0));
        rep.item("riccati-single-site", cross < 1e-8 && frozen < 1e-8,
                 strf("route diff %.2e, frozen diff %.2e", cross, frozen));
    }

    { // coupled pair with a full-weight bond
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 0.0;
        p.g_drive = 0.3;
        p.gamma = 1.0;
        p.j_hop = 1.0;
        LatticeGraph pg;
        pg.L = 0;
        pg.n_sites = 2;
        pg.n_nbrs = 4;
        pg.neighbors = {{1, 1, 1, 1}, {0, 0, 0, 0}}; // 4 * J/4 = one full bond
        const auto s = gta_noise_free(p, pg, 80.0, 1e-3);
        QuadRiccati ric{quad_drift_matrix(2, p.delta, p.g_drive, p.gamma, p.j_hop,
                                          {{0, 1}}),
                        p.gamma, true};
        const Eigen::MatrixXd sig =
            ric.integrate(0.5 * Eigen::MatrixXd::Identity(4, 4), 80.0, 1e-3);
        Eigen::MatrixXcd u, v;
        quad_to_uv(sig, u, v);
        const double cross = std::abs(s.u(0, 0) - u(0, 0)) + std::abs(s.u(0, 1) - u(0, 1)) +
                             std::abs(s.v(0, 0) - v(0, 0)) + std::abs(s.v(0, 1) - v(0, 1));
        const double frozen =
            std::abs(s.u(0, 0) - cplx(-0.0073361863195289811, -0.14481228939630764)) +
            std::abs(s.u(0, 1) - cplx(0.064801014860503547, -0.12781715040049091)) +
            std::abs(s.v(0, 0) - cplx(0.038925819116428118, 0.0)) +
            std::abs(s.v(0, 1).real() - 0.03346305041473141) + std::abs(s.v(0, 1).imag());
        rep.item("riccati-pair", cross < 1e-8 && frozen < 1e-8,
                 strf("route diff %.2e, frozen diff %.2e", cross, frozen));
    }

    { // unconditional occupation: algebraic Lyapunov solve vs integrated flow
        const double delta = -1.0, gval = 0.3, gamma = 1.0;
        const double a11 = -0.5 * gamma, a12 = -(delta + gval), a21 = delta - gval;
        Eigen::Matrix3d M;
        M << 2 * a11, 0, 2 * a12, 0, 2 * a11, 2 * a21, a21, a12, 2 * a11;
        const Eigen::Vector3d rhs(-0.5 * gamma, -0.5 * gamma, 0.0);
        const Eigen::Vector3d sol = M.colPivHouseholderQr().solve(rhs);
        const double n_alg = 0.5 * (sol(0) + sol(1) - 1.0);
        QuadRiccati lyap{quad_drift_matrix(1, delta, gval, gamma, 0.0, {}), gamma, false};
        const Eigen::MatrixXd sig =
            lyap.integrate(0.5 * Eigen::MatrixXd::Identity(2, 2), 80.0, 1e-3);
        const double n_ode = 0.5 * (sig(0, 0) + sig(1, 1) - 1.0);
        const bool ok = std::abs(n_alg - 0.0387931034482759) < 1e-12 &&
                        std::abs(n_alg - n_ode) < 1e-9;
        rep.item("lyapunov-occupation", ok,
                 strf("solve %.16g, integrated %.16g", n_alg, n_ode));
    }

    { // identical Wiener increments through the moment engine and the
      // truncated-Fock quadrature unraveling
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 0.0;
        p.g_drive = 0.3;
        p.gamma = 1.0;
        p.j_hop = 0.0;
        const auto g1 = build_lattice(1);
        const auto site = FockSite::make(p, 30);
        Vec psi0 = Vec::Zero(31);
        psi0(0) = 1.0;
        std::vector<double> ts;
        for (int k = 1; k <= 20; ++k) ts.push_back(0.25 * k);
        const double h = 1e-4;
        NoiseStream ns(20260819u, 7, salt_from_tag("oracle-shared-noise"));
        SseOptions sopt;
        sopt.h = h;
        const auto sse = fock_sse_trajectory(site.h0, site.hdrive, Schedule::hold(0.3, 5.0),
                                             {site.a}, p.gamma, psi0, ts, ns, sopt);
        auto s = GaussianTrajectoryState::vacuum(1);
        GtaWorkspace ws;
        ws.resize(1);
        Eigen::VectorXd dw(1);
        double worst = 0;
        size_t si = 0;
        for (long k = 0; k <= 50000; ++k) {
            if (si < ts.size() && k == std::llround(ts[si] / h)) {
                worst = std::max(worst, std::abs(s.alpha(0) - sse.amp[si](0)));
                ++si;
            }
            if (k == 50000) break;
            ns.fill_normals(uint64_t(k), dw.data(), 1, std::sqrt(h), false);
            em_step(s, p, g1, 0.3, h, dw, ws);
        }
        rep.item("shared-noise-unraveling", si == ts.size() && worst < 1e-3,
                 strf("max |alpha_gta - alpha_fock| = %.3e over t <= 5", worst));
    }

    { // driven Kerr steady state against the frozen truncated-Fock solve
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 1.0;
        p.g_drive = 0.7;
        p.gamma = 1.0;
        p.j_hop = 0.0;
        const auto site = FockSite::make(p, 20);
        const Mat L = liouvillian_matrix(site.h0 + 0.7 * site.hdrive, {site.a});
        const Mat rho = steady_state(L);
        const double n = (site.num * rho).trace().real();
        rep.item("fock-steady-occupation", std::abs(n - 0.0993362410398487) < 1e-9,
                 strf("<n> = %.16g", n));
    }

    { // asymptotic decay rate two ways at G = 0.4 plus frozen value
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 1.0;
        p.g_drive = 0.4;
        p.gamma = 1.0;
        p.j_hop = 0.0;
        const auto site = FockSite::make(p, 14);
        const Mat L = liouvillian_matrix(site.h0 + 0.4 * site.hdrive, {site.a});
        const double gs = spectral_gap(L);
        const Mat rho0 = coherent_dm(14, cplx(0.0, 0.5));
        const auto fit = decay_gap(L, rho0, site.a, 0.05, 5.0, 25.0);
        const bool ok = std::abs(gs - 0.512712194) < 1e-6 &&
                        std::abs(fit.lambda - gs) / gs < 5e-3 && fit.r2 > 0.999;
        rep.item("gap-two-routes", ok,
                 strf("spectral %.9g, decay fit %.9g (r2 %.5f)", gs, fit.lambda, fit.r2));
    }

    { // at G = 0 the gap is exactly gamma/2
        ModelParams p;
        p.delta = -1.0;
        p.u_kerr = 1.0;
        p.g_drive = 0.0;
        p.gamma = 1.0;
        p.j_hop = 0.0;
        const auto site = FockSite::make(p, 12);
        const Mat L = liouvillian_matrix(site.h0, {site.a});
        const double gs = spectral_gap(L);
        rep.item("gap-zero-drive", std::abs(gs - 0.5) < 1e-9,
                 strf("spectral %.12g vs gamma/2", gs));
    }

    { // spin reference basics: exact T_c, limits, tallies
        bool ok = std::abs(ising_tc_exact() - 2.2691853142130221) < 1e-15;
        auto lat = IsingLattice::uniform(6, 1);
        ok = ok && lat.m_sum == 36 && lat.energy == -72;
        NoiseStream st(9090, 0, salt_from_tag("oracle-ising"));
        int acc_cold = 0;
        for (int k = 0; k < 5; ++k) acc_cold += metropolis_sweep(lat, 0.05, st, uint64_t(k));
        ok = ok && acc_cold == 0;
        auto hot = IsingLattice::random(8, NoiseStream(9091, 1, salt_from_tag("oracle-ising")));
        for (int k = 0; k < 10; ++k)
            metropolis_sweep(hot, ising_tc_exact(), st, uint64_t(100 + k));
        ok = ok && hot.energy == hot.recompute_energy() && hot.m_sum == hot.recompute_m();
        rep.item("ising-reference", ok, "T_c literal, cold rejection, running tallies");
    }

    { // displaced-Wick contraction on a coherent product state
        auto s = GaussianTrajectoryState::vacuum(2);
        s.alpha(0) = cplx(0.3, 0.2);
        s.alpha(1) = cplx(0.0, -0.1);
        const cplx n0 = gaussian_moment(s, {{0, true}, {0, false}});
        const cplx n2 = gaussian_moment(s, {{0, true}, {0, true}, {0, false}, {0, false}});
        const cplx x01 = gaussian_moment(s, {{0, false}, {1, false}});
        const double d = std::abs(n0 - cplx(std::norm(s.alpha(0)), 0.0)) +
                         std::abs(n2 - cplx(std::norm(s.alpha(0)) * std::norm(s.alpha(0)),
                                            0.0)) +
                         std::abs(x01 - s.alpha(0) * s.alpha(1));
        rep.item("wick-coherent", d < 1e-14, strf("factorization residual %.2e", d));
    }

    { // structural invariants survive stepping with real noise
        ModelParams p = c.model;
        p.g_drive = 0.86;
        const auto g = build_lattice(3);
        auto s = GaussianTrajectoryState::vacuum(g.n_sites);
        GtaWorkspace ws;
        ws.resize(g.n_sites);
        Eigen::VectorXd dw(g.n_sites);
        NoiseStream ns(7171, 0, salt_from_tag("oracle-structure"));
        bool ok = true;
        for (long k = 0; k < 2000; ++k) {
            ns.fill_normals(uint64_t(k), dw.data(), g.n_sites, std::sqrt(1e-3), false);
            em_step(s, p, g, 0.86, 1e-3, dw, ws);
            ok = ok && s.u == s.u.transpose().eval() && s.v == s.v.adjoint().eval();
        }
        ok = ok && s.finite() && s.min_v_eigenvalue() > -1e-6;
        rep.item("structure-enforcement", ok, "u symmetric, v Hermitian, bitwise, 2e3 steps");
    }

    write_manifest(paths, "oracle-check", c, timer.seconds(),
                   {rep.all_ok ? "all oracles passed" : "ORACLE FAILURES, see report"});
    return rep.all_ok;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"critical dynamics of a quadratically driven Kerr-resonator lattice"};
    app.set_version_flag("--version", "kerrlat 1.0.0");
    std::string config_path, out_dir = "out", resume_dir;
    unsigned long long seed = 0;
    int workers = -1;
    app.add_option("--config", config_path, "JSON run configuration")
        ->check(CLI::ExistingFile);
    app.add_option("--out", out_dir, "output directory")->capture_default_str();
    app.add_option("--seed", seed, "master seed (overrides config and environment)");
    app.add_option("--workers", workers, "worker threads (0 = hardware concurrency)");
    app.add_option("--resume", resume_dir,
                   "directory holding checkpoints from an earlier run")
        ->check(CLI::ExistingPath);
    app.require_subcommand(1);

    auto* s_quench = app.add_subcommand(
        "quench", "burn in at G0, ramp to G1 over the velocity grid");
    auto* s_relax = app.add_subcommand(
        "relax", "order-parameter relaxation at each drive, with decay fits");
    auto* s_gap = app.add_subcommand(
        "gap-scan", "power law of the fitted rates vs |G - G_c| (needs relax output)");
    auto* s_coll = app.add_subcommand(
        "collapse", "finite-size collapse of quench data (needs quench output)");
    auto* s_ising = app.add_subcommand(
        "ising-kz", "classical Metropolis reference: ramps, Binder points, z");
    auto* s_oracle = app.add_subcommand(
        "oracle-check", "cross-validate the engines against independent solutions");
    auto* s_snap = app.add_subcommand(
        "snapshot", "export sign(Im alpha) grids from stored quench states");
    for (auto* s : {s_quench, s_relax, s_gap, s_coll, s_ising, s_oracle, s_snap})
        s->fallthrough();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        RunConfig c = config_path.empty() ? RunConfig{} : load_config(config_path);
        apply_env_overrides(c);
        if (app.count("--seed")) c.seed = seed;
        if (app.count("--workers")) {
            if (workers < 0) throw ConfigError("--workers must be >= 0");
            c.workers = workers;
        }
        c.validate();

        Paths paths;
        paths.out = out_dir;
        if (!resume_dir.empty()) {
            fs::path r = resume_dir;
            paths.resume = fs::is_directory(r) ? r : r.parent_path();
        }
        fs::create_directories(paths.out);

        if (app.got_subcommand(s_quench)) cmd_quench(c, paths);
        else if (app.got_subcommand(s_relax)) cmd_relax(c, paths);
        else if (app.got_subcommand(s_gap)) cmd_gap_scan(c, paths);
        else if (app.got_subcommand(s_coll)) cmd_collapse(c, paths);
        else if (app.got_subcommand(s_ising)) cmd_ising(c, paths);
        else if (app.got_subcommand(s_snap)) cmd_snapshot(c, paths);
        else if (app.got_subcommand(s_oracle)) {
            if (!cmd_oracle(c, paths)) {
                fprintf(stderr, "oracle-check: FAILURES (see oracle_report.txt)\n");
                return 3;
            }
        }
        return 0;
    } catch (const ConfigError& e) {
        fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const fs::filesystem_error& e) {
        fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    } catch (const NumericError& e) {
        fprintf(stderr, "numeric abort: %s\n", e.what());
        return 3;
    } catch (const std::exception& e) {
        fprintf(stderr, "error: %s\n", e.what());
        return 3;
    }
}
