#include "kerrlat/model.hpp"

#include <cmath>
#include <string>

#include "kerrlat/errors.hpp"

namespace kerrlat {

void ModelParams::validate() const {
    if (!(gamma > 0.0)) throw ConfigError("gamma must be > 0 (pure Hamiltonian dynamics unsupported)");
    if (j_hop < 0.0) throw ConfigError("j_hop must be >= 0");
    if (u_kerr < 0.0) throw ConfigError("u_kerr must be >= 0");
    if (!(std::isfinite(delta) && std::isfinite(g_drive) && std::isfinite(j_hop) &&
          std::isfinite(u_kerr) && std::isfinite(gamma)))
        throw ConfigError("model parameters must be finite");
}

LatticeGraph build_lattice(int L, bool periodic) {
    if (!periodic)
        throw ConfigError("only periodic boundaries are supported (open boundaries break "
                          "the k=0 observables and the finite-size scaling forms)");
    if (L == 2)
        throw ConfigError("L = 2 double-counts wrap-around bonds; use L = 1 or L >= 3");
    if (L < 1) throw ConfigError("lattice size must be positive, got L = " + std::to_string(L));

    LatticeGraph g;
    g.L = L;
    g.n_sites = L * L;
    g.n_nbrs = (L == 1) ? 0 : 4;
    g.neighbors.assign(size_t(g.n_sites), {-1, -1, -1, -1});
    if (L == 1) return g; // isolated site: no bonds

    for (int y = 0; y < L; ++y) {
        for (int x = 0; x < L; ++x) {
            const int xm = (x + L - 1) % L, xp = (x + 1) % L;
            const int ym = (y + L - 1) % L, yp = (y + 1) % L;
            g.neighbors[size_t(g.index(x, y))] = {g.index(xp, y), g.index(xm, y),
                                                  g.index(x, yp), g.index(x, ym)};
        }
    }
    return g;
}

cplx mean_field_drift(cplx alpha, const ModelParams& p) {
    const cplx i(0.0, 1.0);
    return i * (p.delta + p.j_hop) * alpha - i * p.u_kerr * std::norm(alpha) * alpha -
           i * p.g_drive * std::conj(alpha) - 0.5 * p.gamma * alpha;
}

double vacuum_stability_threshold(const ModelParams& p) {
    const double dj = p.delta + p.j_hop;
    return std::sqrt(dj * dj + 0.25 * p.gamma * p.gamma);
}

} // namespace kerrlat
