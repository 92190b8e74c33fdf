#pragma once
// Exact small-system reference: dense truncated Fock space for one or two
// sites. Supplies steady states, Liouvillian spectra (two independent routes
// to the asymptotic decay rate), unconditional propagation, and a homodyne
// stochastic Schrodinger integrator that can consume the same Wiener
// increments as the Gaussian-trajectory engine.
#include <Eigen/Dense>
#include <vector>

#include "kerrlat/model.hpp"
#include "kerrlat/rng.hpp"
#include "kerrlat/schedule.hpp"

namespace kerrlat {

using Mat = Eigen::MatrixXcd;
using Vec = Eigen::VectorXcd;

// Truncated annihilation operator, dim = n_max + 1.
Mat fock_annihilation(int n_max);

// Kronecker product (column-major composite index i = i_A * dim_B + i_B).
Mat kron(const Mat& A, const Mat& B);

// Single-site Hamiltonian split into drive-independent part and the
// quadratic-drive operator (a^dag^2 + a^2)/2: H(G) = h0 + G * hdrive.
struct FockSite {
    int n_max = 20;
    Mat a, num, h0, hdrive;
    static FockSite make(const ModelParams& p, int n_max = 20);
};

// Two coupled sites (single bond, full hopping weight J so the uniform-mode
// hopping eigenvalue matches the lattice normalization).
struct FockPair {
    int n_max = 8;
    Mat a1, a2, h0, hdrive;
    static FockPair make(const ModelParams& p, int n_max = 8);
};

// Lindblad superoperator in column-stacked vec convention; `cs` are the
// collapse operators with rates already folded in (c = sqrt(gamma) a).
Mat liouvillian_matrix(const Mat& H, const std::vector<Mat>& cs);

// Unique steady state (trace 1) of the superoperator.
Mat steady_state(const Mat& L_super);

// Asymptotic decay rate from the spectrum: smallest |Re| over nonzero modes.
double spectral_gap(const Mat& L_super, double zero_tol = 1e-8);

struct DecayFitResult {
    double lambda = 0.0; // decay rate (-Re of the fitted complex slope)
    double freq = 0.0;   // oscillation frequency (Im of slope)
    double r2 = 0.0;
};

// Decay route to the gap: propagate rho0 with exp(L dt), record tr(obs rho),
// and fit a complex exponential on [t_min, t_max]. Robust to phase rotation.
DecayFitResult decay_gap(const Mat& L_super, const Mat& rho0, const Mat& obs, double dt,
                         double t_min, double t_max);

// Propagate rho for time T and return it (unconditional evolution).
Mat propagate(const Mat& L_super, const Mat& rho0, double T, double dt = 0.05);

// Density matrix of a coherent state |beta> (normalized in truncation).
Mat coherent_dm(int n_max, cplx beta);

struct SseOptions {
    double h = 1e-4;
    bool negate_noise = false;
    double step_norm_tol = 1e-3; // pre-renormalization blow-up guard
};

struct SseSamples {
    std::vector<double> t;
    std::vector<Vec> amp;               // <a_j> per site
    std::vector<Mat> mom_aa;            // <a_i a_j>
    std::vector<Mat> mom_ada;           // <a_i^dag a_j>
    double max_step_norm_dev = 0.0;     // max |norm-1| before renormalization
    double cum_norm_drift = 0.0;        // accumulated |norm-1|
};

// Homodyne (x-quadrature) stochastic Schrodinger trajectory in the truncated
// space, Euler-Maruyama with per-step renormalization. One real Wiener
// increment per site per step, drawn exactly like the GTA engine draws them,
// so both integrators can be driven by the identical noise realization.
SseSamples fock_sse_trajectory(const Mat& H0, const Mat& Hdrive, const Schedule& sched,
                               const std::vector<Mat>& site_a, double gamma, Vec psi0,
                               const std::vector<double>& sample_times,
                               const NoiseStream& noise, const SseOptions& opt);

} // namespace kerrlat
