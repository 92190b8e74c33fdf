#include "kerrlat/ising.hpp"

#include <cmath>

#include "kerrlat/analysis.hpp"
#include "kerrlat/errors.hpp"
#include "kerrlat/protocols.hpp"

namespace kerrlat {

double ising_tc_exact() { return 2.0 / std::log1p(std::sqrt(2.0)); }

IsingLattice IsingLattice::random(int L, const NoiseStream& stream) {
    if (L < 2) throw ConfigError("ising lattice needs L >= 2");
    IsingLattice lat;
    lat.L = L;
    const int n = L * L;
    lat.s.resize(size_t(n));
    for (int i = 0; i < n; ++i)
        lat.s[size_t(i)] = stream.uniforms(uint64_t(i))[0] < 0.5 ? int8_t(-1) : int8_t(1);
    lat.m_sum = lat.recompute_m();
    lat.energy = lat.recompute_energy();
    return lat;
}

IsingLattice IsingLattice::uniform(int L, int8_t value) {
    if (L < 2) throw ConfigError("ising lattice needs L >= 2");
    IsingLattice lat;
    lat.L = L;
    lat.s.assign(size_t(L) * size_t(L), value);
    lat.m_sum = lat.recompute_m();
    lat.energy = lat.recompute_energy();
    return lat;
}

long long IsingLattice::recompute_energy() const {
    long long e = 0;
    for (int y = 0; y < L; ++y)
        for (int x = 0; x < L; ++x) {
            const int i = y * L + x;
            const int right = y * L + (x + 1) % L;
            const int down = ((y + 1) % L) * L + x;
            e -= s[size_t(i)] * (s[size_t(right)] + s[size_t(down)]);
        }
    return e;
}

long long IsingLattice::recompute_m() const {
    long long m = 0;
    for (int8_t v : s) m += v;
    return m;
}

int metropolis_sweep(IsingLattice& lat, double T, const NoiseStream& stream,
                     uint64_t sweep_index) {
    if (!(T > 0)) throw ConfigError("temperature must be positive");
    const int L = lat.L;
    const int n = L * L;
    const double p4 = std::exp(-4.0 / T);
    const double p8 = std::exp(-8.0 / T);
    int accepted = 0;
    int8_t* s = lat.s.data();
    for (int k = 0; k < n; ++k) {
        const auto u = stream.uniforms_at(sweep_index, uint64_t(k));
        const int site = int(u[0] * double(n));
        const int x = site % L, y = site / L;
        const int xp = (x + 1) % L, xm = (x + L - 1) % L;
        const int yp = (y + 1) % L, ym = (y + L - 1) % L;
        const int nb = s[size_t(y * L + xp)] + s[size_t(y * L + xm)] +
                       s[size_t(yp * L + x)] + s[size_t(ym * L + x)];
        const int de = 2 * s[size_t(site)] * nb; // energy change on flip
        bool accept = de <= 0;
        if (!accept) {
            const double p = de == 4 ? p4 : p8;
            accept = u[1] < p;
        }
        if (accept) {
            s[size_t(site)] = int8_t(-s[size_t(site)]);
            lat.m_sum += 2 * s[size_t(site)];
            lat.energy += de;
            ++accepted;
        }
    }
    return accepted;
}

IsingQuenchRun ising_linear_quench(int L, double t_c, double eps0, double v_eps,
                                   const IsingOptions& opt, const std::string& stage_tag) {
    if (!(eps0 > 0) || !(v_eps > 0)) throw ConfigError("quench needs eps0 > 0 and v_eps > 0");
    if (opt.n_real < 2) throw ConfigError("need at least 2 realizations");
    const long long n_sweeps = llround(std::ceil(eps0 / v_eps));
    const int n_samples = std::min<long long>(opt.n_samples, n_sweeps + 1) < 2
                              ? 2
                              : int(std::min<long long>(opt.n_samples, n_sweeps + 1));

    IsingQuenchRun out;
    out.v_eps = v_eps;
    out.t.resize(size_t(n_samples));
    std::vector<long long> sample_sweeps(static_cast<size_t>(n_samples));
    for (int k = 0; k < n_samples; ++k) {
        sample_sweeps[size_t(k)] = llround(double(n_sweeps) * double(k) / double(n_samples - 1));
        out.t[size_t(k)] = double(sample_sweeps[size_t(k)]);
    }
    out.m_rows.assign(size_t(opt.n_real), {});
    out.m_final.resize(size_t(opt.n_real));

    const uint64_t salt_init = salt_from_tag((stage_tag + "/init").c_str());
    const uint64_t salt_dyn = salt_from_tag((stage_tag + "/dyn").c_str());

    for_each_trajectory(opt.n_real, opt.workers, [&](int r) {
        const NoiseStream init_stream(opt.seed, uint64_t(r), salt_init);
        const NoiseStream dyn(opt.seed, uint64_t(r), salt_dyn);
        IsingLattice lat = IsingLattice::random(L, init_stream);
        uint64_t sweep = 0;
        const double t_start = t_c * (1.0 + eps0);
        for (int k = 0; k < opt.equil_sweeps; ++k) metropolis_sweep(lat, t_start, dyn, sweep++);

        auto& row = out.m_rows[size_t(r)];
        row.reserve(size_t(n_samples));
        size_t next = 0;
        for (long long k = 0; k <= n_sweeps; ++k) {
            while (next < sample_sweeps.size() && sample_sweeps[next] == k) {
                row.push_back(lat.magnetization());
                ++next;
            }
            if (k == n_sweeps) break;
            const double eps = eps0 - v_eps * double(k);
            const double T = t_c * (1.0 + std::max(eps, 0.0));
            metropolis_sweep(lat, T, dyn, sweep++);
        }
        out.m_final[size_t(r)] = row.back();
    });
    return out;
}

BinderPoint ising_equilibrium_binder(int L, double T, int n_eq, int n_samp, int thin,
                                     const IsingOptions& opt, const std::string& stage_tag) {
    if (thin < 1 || n_samp < thin) throw ConfigError("bad sampling parameters");
    const int n_real = opt.n_real;
    if (n_real < 2) throw ConfigError("need at least 2 realizations");
    std::vector<double> m2_r(static_cast<size_t>(n_real)), m4_r(static_cast<size_t>(n_real));

    const uint64_t salt_init = salt_from_tag((stage_tag + "/init").c_str());
    const uint64_t salt_dyn = salt_from_tag((stage_tag + "/dyn").c_str());

    for_each_trajectory(n_real, opt.workers, [&](int r) {
        const NoiseStream init_stream(opt.seed, uint64_t(r), salt_init);
        const NoiseStream dyn(opt.seed, uint64_t(r), salt_dyn);
        IsingLattice lat = IsingLattice::random(L, init_stream);
        uint64_t sweep = 0;
        for (int k = 0; k < n_eq; ++k) metropolis_sweep(lat, T, dyn, sweep++);
        double s2 = 0, s4 = 0;
        int count = 0;
        for (int k = 0; k < n_samp; ++k) {
            metropolis_sweep(lat, T, dyn, sweep++);
            if ((k + 1) % thin == 0) {
                const double m = lat.magnetization();
                const double m2 = m * m;
                s2 += m2;
                s4 += m2 * m2;
                ++count;
            }
        }
        m2_r[size_t(r)] = s2 / count;
        m4_r[size_t(r)] = s4 / count;
    });

    BinderPoint out;
    out.T = T;
    double m2 = 0, m4 = 0;
    for (int r = 0; r < n_real; ++r) {
        m2 += m2_r[size_t(r)];
        m4 += m4_r[size_t(r)];
    }
    m2 /= n_real;
    m4 /= n_real;
    out.m2 = m2;
    out.m4 = m4;
    out.ub = binder_cumulant(m2, m4);

    // jackknife over realizations
    double acc = 0;
    std::vector<double> ub_jack(static_cast<size_t>(n_real));
    for (int r = 0; r < n_real; ++r) {
        const double m2j = (m2 * n_real - m2_r[size_t(r)]) / (n_real - 1);
        const double m4j = (m4 * n_real - m4_r[size_t(r)]) / (n_real - 1);
        ub_jack[size_t(r)] = binder_cumulant(m2j, m4j);
        acc += ub_jack[size_t(r)];
    }
    acc /= n_real;
    double var = 0;
    for (double u : ub_jack) var += (u - acc) * (u - acc);
    out.se_ub = std::sqrt(var * double(n_real - 1) / double(n_real));
    return out;
}

} // namespace kerrlat
