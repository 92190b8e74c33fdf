#pragma once
// Measurement protocols over trajectory ensembles: steady-state preparation,
// linear drive ramps, and relaxation from a polarized state. Trajectory i of a
// stage always consumes the stream (seed, i, salt(stage)), so every ensemble
// is reproducible bit-for-bit regardless of worker count or interruption.
#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "kerrlat/gaussian_state.hpp"
#include "kerrlat/gta.hpp"
#include "kerrlat/model.hpp"
#include "kerrlat/record.hpp"

namespace kerrlat {

struct ProtocolOptions {
    double h = 1e-4;
    int n_traj = 100;
    int workers = 0; // 0 = hardware concurrency
    uint64_t seed = 1;
    int n_samples = 200;
    bool negate_noise = false;
    bool check_positivity = true;
    double diag_tol = TrajectoryOptions{}.diag_tol;
    double eig_tol = TrajectoryOptions{}.eig_tol;
};

// Runs fn(i) for i in [0, n) on `workers` threads; first exception rethrown.
void for_each_trajectory(int n, int workers, const std::function<void(int)>& fn);

// Evenly spaced sample times including both endpoints.
std::vector<double> sample_times_for(double duration, int n_samples);

// Single trajectory of an ensemble stage: trajectory `i` under stage
// `stage_tag` always sees the identical noise, whether it is run here, inside
// the ensemble drivers below, or by a resumed run.
TrajectoryOutcome stage_trajectory(const GaussianTrajectoryState& init, const ModelParams& p,
                                   const LatticeGraph& g, const Schedule& sched,
                                   const ProtocolOptions& opt, const std::string& stage_tag,
                                   int i);

// Steady-state drift diagnostic: the two halves of the second burn-in half
// are compared, per quantity, against twice the combined standard error.
struct StationarityReport {
    double drift_m2 = 0.0, tol_m2 = 0.0;
    double drift_nk0 = 0.0, tol_nk0 = 0.0;
    bool ok = true;
};

// The diagnostic on an existing series ([T/2, 3T/4) vs [3T/4, T]); needs at
// least 8 samples and 2 trajectories.
StationarityReport stationarity_from_series(const EnsembleSeries& s);

struct PreparedEnsemble {
    std::vector<GaussianTrajectoryState> states;
    EnsembleRecord record;
    StationarityReport stationarity;
};

// Vacuum -> hold the drive at p.g_drive for t_burn; returns one steady-state
// sample per trajectory plus the burn-in record.
PreparedEnsemble prepare_steady_ensemble(const ModelParams& p, const LatticeGraph& g,
                                         double t_burn, const ProtocolOptions& opt,
                                         const std::string& stage_tag);

struct QuenchRun {
    double velocity = 0.0;
    double duration = 0.0;
    EnsembleRecord record;
    std::vector<double> abar_final;              // per trajectory, signed
    std::vector<GaussianTrajectoryState> states; // final states if requested
};

// Ramp g from g0 to g1 at rate `velocity`, one initial state per trajectory
// (prepared ensemble). Noise is salted by stage_tag, independent of burn-in.
QuenchRun linear_quench(const ModelParams& p, const LatticeGraph& g,
                        const std::vector<GaussianTrajectoryState>& init, double g0,
                        double g1, double velocity, const ProtocolOptions& opt,
                        const std::string& stage_tag, bool store_states = false);

struct RelaxRun {
    double g = 0.0;
    EnsembleRecord record;
    EnsembleSeries series; // kept for per-trajectory refits (bootstrap)
};

// Hold the drive at `g` starting from the uniformly polarized state
// alpha_j = i * amp, zero covariances; the order-parameter decay of this run
// is what the gap fits consume.
RelaxRun relaxation_run(const ModelParams& p, const LatticeGraph& g, double g_hold,
                        double amp, double t_max, const ProtocolOptions& opt,
                        const std::string& stage_tag);

} // namespace kerrlat
