#pragma once
// Classical 2D Ising reference with single-site Metropolis dynamics: one sweep
// = N random-site attempts = one unit of time. Supplies linear temperature
// quenches through T_c and equilibrium Binder-cumulant points, feeding the
// same collapse machinery as the resonator lattice.
#include <cstdint>
#include <string>
#include <vector>

#include "kerrlat/rng.hpp"

namespace kerrlat {

// Exact critical temperature of the square-lattice model, 2 / ln(1 + sqrt 2).
double ising_tc_exact();

struct IsingLattice {
    int L = 0;
    std::vector<int8_t> s;
    long long m_sum = 0;   // running sum of spins
    long long energy = 0;  // running bond energy, E = -sum_<ij> s_i s_j

    static IsingLattice random(int L, const NoiseStream& stream);
    static IsingLattice uniform(int L, int8_t value);

    double magnetization() const { return double(m_sum) / double(L * L); }
    long long recompute_energy() const;
    long long recompute_m() const;
};

// One Metropolis sweep at temperature T; attempt k of sweep `sweep_index`
// consumes stream block (sweep_index, k). Returns the number of accepted
// flips. Periodic boundaries.
int metropolis_sweep(IsingLattice& lat, double T, const NoiseStream& stream,
                     uint64_t sweep_index);

struct IsingOptions {
    int n_real = 200;
    int workers = 0;
    uint64_t seed = 1;
    int n_samples = 200;
    int equil_sweeps = 100;
};

struct IsingQuenchRun {
    double v_eps = 0.0;
    std::vector<double> t;                    // sweeps since the ramp start
    std::vector<std::vector<double>> m_rows;  // [realization][sample]
    std::vector<double> m_final;              // magnetization at eps = 0
};

// Ramp the reduced temperature eps = (T - T_c)/T_c linearly from eps0 to 0 at
// rate v_eps per sweep, after `equil_sweeps` of equilibration at the start
// temperature. Hot (random) initial spins.
IsingQuenchRun ising_linear_quench(int L, double t_c, double eps0, double v_eps,
                                   const IsingOptions& opt, const std::string& stage_tag);

struct BinderPoint {
    double T = 0.0;
    double m2 = 0.0, m4 = 0.0;
    double ub = 0.0;     // Binder cumulant
    double se_ub = 0.0;  // jackknife over realizations
};

// Equilibrium moments at fixed T: n_eq equilibration sweeps, then n_samp
// sweeps sampled every `thin`, averaged over independent realizations.
BinderPoint ising_equilibrium_binder(int L, double T, int n_eq, int n_samp, int thin,
                                     const IsingOptions& opt, const std::string& stage_tag);

} // namespace kerrlat
