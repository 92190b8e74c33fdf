#pragma once
// Model definition: quadratically driven Kerr resonators with uniform loss on a
// periodic square lattice. Hopping enters the equations of motion with a
// J/(2d) prefactor per neighbor so the total bandwidth is set by J alone.
#include <array>
#include <complex>
#include <vector>

namespace kerrlat {

using cplx = std::complex<double>;

struct ModelParams {
    double delta = -1.0;  // detuning
    double u_kerr = 1.0;  // two-body interaction strength
    double g_drive = 0.0; // two-photon drive amplitude (real)
    double j_hop = 1.0;   // hopping bandwidth; sets the unit of energy/time
    double gamma = 1.0;   // single-photon loss rate

    void validate() const; // throws ConfigError on nonphysical input
};

// Square lattice with periodic wrap. Sites are indexed row-major; each site
// stores its 2d neighbors. d is fixed to 2 here.
struct LatticeGraph {
    int L = 0;
    int n_sites = 0;
    int n_nbrs = 4; // entries used per row of `neighbors`; 0 for an isolated site
    std::vector<std::array<int, 4>> neighbors;

    int index(int x, int y) const { return y * L + x; }
};

// Builds the L x L periodic graph. L >= 3 required (L = 2 would double-count
// the wrap-around bonds); single site L = 1 is allowed and has no bonds.
LatticeGraph build_lattice(int L, bool periodic = true);

// Single-site / uniform-amplitude mean-field drift:
//   dalpha/dt = i(delta + j)alpha - i u|alpha|^2 alpha - i g conj(alpha) - gamma/2 alpha
// (the +j term is the k=0 hopping eigenvalue; pass j_hop = 0 for an isolated site).
cplx mean_field_drift(cplx alpha, const ModelParams& p);

// Drive amplitude above which the vacuum loses linear stability at mean-field
// level: sqrt((delta + j)^2 + gamma^2/4).
double vacuum_stability_threshold(const ModelParams& p);

} // namespace kerrlat
