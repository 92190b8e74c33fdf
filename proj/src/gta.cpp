#include "kerrlat/gta.hpp"

#include <cmath>

#include "kerrlat/errors.hpp"

namespace kerrlat {

namespace {
constexpr cplx kI(0.0, 1.0);
}

void GtaWorkspace::resize(int n) {
    A.resize(n);
    hop_a.resize(n);
    Q.resize(n, n);
    KU.resize(n, n);
    KV.resize(n, n);
    dU.resize(n, n);
    dV.resize(n, n);
    R.resize(n, n);
    I.resize(n, n);
    SR.resize(n, n);
    SI.resize(n, n);
    C.resize(n, n);
    dw.resize(n);
    bw_re.resize(n);
    bw_im.resize(n);
}

namespace {

// K M for the hopping matrix K (J/(2d) on each lattice bond), column by column
// so the gathers run down contiguous memory.
void apply_hopping(const LatticeGraph& g, double pref, const Eigen::MatrixXcd& M,
                   Eigen::MatrixXcd& out) {
    const int n = int(M.rows());
    out.setZero();
    if (g.n_nbrs == 0) return;
    for (int c = 0; c < n; ++c) {
        const cplx* col = M.col(c).data();
        cplx* oc = out.col(c).data();
        for (int i = 0; i < n; ++i) {
            const auto& nb = g.neighbors[size_t(i)];
            oc[i] = pref * (col[nb[0]] + col[nb[1]] + col[nb[2]] + col[nb[3]]);
        }
    }
}

void apply_hopping_vec(const LatticeGraph& g, double pref, const Eigen::VectorXcd& x,
                       Eigen::VectorXcd& out) {
    const int n = int(x.size());
    out.setZero();
    if (g.n_nbrs == 0) return;
    for (int i = 0; i < n; ++i) {
        const auto& nb = g.neighbors[size_t(i)];
        out(i) = pref * (x(nb[0]) + x(nb[1]) + x(nb[2]) + x(nb[3]));
    }
}

} // namespace

void gta_drift(const GaussianTrajectoryState& s, const ModelParams& p,
               const LatticeGraph& g, double g_drive, GtaWorkspace& ws) {
    const int n = s.n();
    if (int(ws.A.size()) != n) ws.resize(n);
    const double pref = p.j_hop / (2.0 * 2.0); // J/(2d), d = 2
    const double gam = p.gamma;
    const double U = p.u_kerr;

    // site-diagonal quantities entering the interaction terms
    Eigen::VectorXcd d = (s.alpha.array().square() + s.u.diagonal().array()).matrix();
    Eigen::VectorXd e = (s.alpha.array().abs2() + s.v.diagonal().array().real()).matrix();

    // amplitude drift
    apply_hopping_vec(g, pref, s.alpha, ws.hop_a);
    ws.A = kI * p.delta * s.alpha + kI * ws.hop_a - kI * g_drive * s.alpha.conjugate() -
           0.5 * gam * s.alpha -
           kI * U *
               (s.alpha.array() * (s.alpha.array().abs2() + 2.0 * s.v.diagonal().array().real()) +
                s.alpha.conjugate().array() * s.u.diagonal().array())
                   .matrix();

    // conditioning (Ito) terms from Q = u + v, via three real symmetric products
    ws.Q = s.u + s.v;
    ws.R = ws.Q.real();
    ws.I = ws.Q.imag();
    ws.SR.setZero();
    ws.SR.selfadjointView<Eigen::Lower>().rankUpdate(ws.R.transpose());
    ws.SR.triangularView<Eigen::StrictlyUpper>() = ws.SR.transpose();
    ws.SI.setZero();
    ws.SI.selfadjointView<Eigen::Lower>().rankUpdate(ws.I.transpose());
    ws.SI.triangularView<Eigen::StrictlyUpper>() = ws.SI.transpose();
    ws.C.noalias() = ws.R.transpose() * ws.I;

    apply_hopping(g, pref, s.u, ws.KU);
    apply_hopping(g, pref, s.v, ws.KV);

    // du/dt
    ws.dU = kI * (2.0 * p.delta) * s.u + kI * (ws.KU + ws.KU.transpose()) -
            kI * g_drive * (s.v + s.v.transpose()) - gam * s.u;
    ws.dU.diagonal().array() -= kI * g_drive;
    // -gamma Q^T Q = -gamma (SR - SI + i(C + C^T))
    ws.dU.real() -= gam * (ws.SR - ws.SI);
    ws.dU.imag() -= gam * (ws.C + ws.C.transpose());
    if (U != 0.0) {
        Eigen::MatrixXcd Dv = d.asDiagonal() * s.v;
        Eigen::MatrixXcd Fu = Dv + Dv.transpose();
        Fu.diagonal() += d;
        Fu.array() += 2.0 * s.u.array() *
                      (e.replicate(1, n) + e.transpose().replicate(n, 1)).array();
        ws.dU -= kI * U * Fu;
    }

    // dv/dt
    ws.dV = kI * (ws.KV.adjoint() - ws.KV) - gam * s.v;
    ws.dV.real() -= 2.0 * g_drive * s.u.imag();
    // -gamma Q^dag Q = -gamma (SR + SI + i(C - C^T))
    ws.dV.real() -= gam * (ws.SR + ws.SI);
    ws.dV.imag() -= gam * (ws.C - ws.C.transpose());
    if (U != 0.0) {
        Eigen::MatrixXcd Fv = d.conjugate().asDiagonal() * s.u;
        Fv.noalias() -= s.u.conjugate() * d.asDiagonal();
        Fv.array() += 2.0 * s.v.array() *
                      (e.replicate(1, n) - e.transpose().replicate(n, 1)).array();
        ws.dV += kI * U * Fv;
    }
}

Eigen::MatrixXcd gta_noise_matrix(const GaussianTrajectoryState& s, const ModelParams& p) {
    return std::sqrt(p.gamma) * (s.u + s.v.transpose());
}

void em_step(GaussianTrajectoryState& s, const ModelParams& p, const LatticeGraph& g,
             double g_drive, double h, const Eigen::VectorXd& dw, GtaWorkspace& ws) {
    gta_drift(s, p, g, g_drive, ws);
    // noise hits alpha only: d alpha += B dW with B = sqrt(gamma) Q^T
    const double sg = std::sqrt(p.gamma);
    ws.bw_re.noalias() = ws.R.transpose() * dw;
    ws.bw_im.noalias() = ws.I.transpose() * dw;
    s.alpha += h * ws.A;
    s.alpha.real() += sg * ws.bw_re;
    s.alpha.imag() += sg * ws.bw_im;
    s.u += h * ws.dU;
    s.v += h * ws.dV;
    s.enforce_structure();
}

TrajectoryOutcome run_trajectory(const GaussianTrajectoryState& init, const ModelParams& p,
                                 const LatticeGraph& g, const Schedule& sched,
                                 const std::vector<double>& sample_times,
                                 const NoiseStream& noise, const TrajectoryOptions& opt) {
    if (opt.h <= 0.0) throw ConfigError("step size must be positive");
    if (init.n() != g.n_sites) throw ConfigError("state size does not match lattice");

    const int n = init.n();
    const int64_t n_steps = llround(sched.duration / opt.h);
    std::vector<int64_t> sample_steps;
    sample_steps.reserve(sample_times.size());
    for (size_t i = 0; i < sample_times.size(); ++i) {
        if (i > 0 && sample_times[i] < sample_times[i - 1])
            throw ConfigError("sample times must be non-decreasing");
        sample_steps.push_back(std::clamp<int64_t>(llround(sample_times[i] / opt.h), 0, n_steps));
    }

    GaussianTrajectoryState s = init;
    GtaWorkspace ws;
    ws.resize(n);
    Eigen::VectorXd dw(n);

    TrajectoryOutcome out;
    out.samples.t.reserve(sample_steps.size());
    size_t next = 0;

    auto record = [&](int64_t k) {
        const double t = double(k) * opt.h;
        if (!s.finite())
            throw NumericError("non-finite state [" + opt.label + "] at t=" + std::to_string(t));
        if (opt.check_positivity) {
            const double dmin = s.min_v_diagonal();
            if (dmin < -opt.diag_tol)
                throw NumericError("diag(v) = " + std::to_string(dmin) + " below tolerance [" +
                                   opt.label + "] at t=" + std::to_string(t));
            const double emin = s.min_v_eigenvalue();
            out.samples.min_eig.push_back(emin);
            if (emin < -opt.eig_tol)
                throw NumericError("min eig(v) = " + std::to_string(emin) +
                                   " below tolerance [" + opt.label +
                                   "] at t=" + std::to_string(t));
        } else {
            out.samples.min_eig.push_back(0.0);
        }
        out.samples.t.push_back(t);
        out.samples.abar.push_back(order_parameter(s));
        out.samples.nk0.push_back(mode_occupation_k0(s));
    };

    for (int64_t k = 0; k <= n_steps; ++k) {
        while (next < sample_steps.size() && sample_steps[next] == k) {
            record(k);
            ++next;
        }
        if (k == n_steps) break;
        const double g_t = sched.g_at(double(k) * opt.h);
        noise.fill_normals(uint64_t(k), dw.data(), n, std::sqrt(opt.h), opt.negate_noise);
        em_step(s, p, g, g_t, opt.h, dw, ws);
    }

    out.final_state = std::move(s);
    out.steps = uint64_t(n_steps);
    return out;
}

} // namespace kerrlat
