#pragma once
// Run configuration: one JSON document covering every subcommand, loaded with
// defaults for missing keys, validated, and hashed (FNV-1a over the canonical
// serialization) so outputs and checkpoints can be tied to the exact inputs.
#include <cstdint>
#include <string>
#include <vector>

#include "kerrlat/analysis.hpp"
#include "kerrlat/model.hpp"

namespace kerrlat {

struct QuenchConfig {
    double g_start = 0.7;
    double g_end = 0.86;
    std::vector<double> velocities = {1e-2, 2.2e-2, 4.6e-2, 1e-1, 2.2e-1, 4.6e-1, 1.0};
    std::vector<int> sizes = {6, 8};
    int n_traj_fast = 1000;  // used for v >= slow_threshold
    int n_traj_slow = 100;   // used for slower ramps
    double slow_threshold = 1e-2;
    int n_traj_override = 0; // > 0: fixed count for every velocity
    bool store_states = false;
};

struct RelaxConfig {
    std::vector<double> g_values = {0.74, 0.76, 0.78, 0.80, 0.82};
    std::vector<int> sizes = {6};
    double t_max = 60.0;
    double t_min_fit = 0.0; // 0 = pick by system size (20 / 30 / 40)
    double amp = 1.0;       // initial polarized amplitude, alpha_j = i*amp
    int n_traj = 100;
};

struct CollapseConfig {
    std::string mode = "f1";
    CriticalExponents exponents;
    ZGrid grid;
    int bootstrap = 200;
    double x_lo = 1e-2, x_hi = 1.0; // master-curve fit window (f2)
};

struct GapFitConfig {
    double g_c = 0.86;
    double nu = 1.0;
    double regime_cutoff = -1.0;
};

struct IsingConfig {
    std::vector<int> sizes = {32, 64, 128};
    double eps0 = 0.5;
    std::vector<double> velocities = {1e-4, 3e-4, 1e-3, 3e-3, 1e-2, 3e-2, 1e-1};
    int n_real = 200;
    int equil_sweeps = 100;
    std::vector<double> binder_ts = {2.20, 2.22, 2.24, 2.26, 2.28, 2.30, 2.32, 2.34};
    std::vector<int> binder_sizes = {32, 64};
    int binder_n_eq = 2000;
    int binder_n_samp = 3000;
    int binder_thin = 5;
    int binder_n_real = 24;
};

struct RunConfig {
    ModelParams model;      // g_drive is the hold/default amplitude
    int L = 6;
    bool periodic = true;
    double h = 1e-4;
    int n_samples = 200;
    double burn_in = 50.0;
    uint64_t seed = 12345;
    int workers = 0;

    QuenchConfig quench;
    RelaxConfig relax;
    CollapseConfig collapse;
    GapFitConfig gapfit;
    IsingConfig ising;

    void validate() const;
};

// Default fit-window start by linear size: 20 (L <= 6), 30 (L <= 10), 40 above.
double default_t_min_fit(int L);

RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& c); // canonical (sorted keys)
uint64_t config_hash(const RunConfig& c);

// Environment overrides, applied after file parsing:
// KERRLAT_SEED (u64), KERRLAT_WORKERS (int).
void apply_env_overrides(RunConfig& c);

} // namespace kerrlat
