#include <doctest.h>

#include <kerrlat/errors.hpp>
#include <kerrlat/fock.hpp>
#include <kerrlat/gta.hpp>

#include <cmath>
#include <vector>

using namespace kerrlat;

namespace {

// Independent reference for the conditional covariance of the quadratic model
// (U = 0) under x-homodyne monitoring: deterministic matrix Riccati flow in
// quadrature variables r = (x_1, p_1, ..., x_n, p_n), integrated with RK4.
// sigma' = A sigma + sigma A^T + (gamma/2) I - chi chi^T,
// chi_j = sqrt(2 gamma) (sigma - I/2) e_{x_j}.
struct QuadRiccati {
    Eigen::MatrixXd A;
    double gamma;
    int n;

    // n_sites in {1, 2}; two sites are coupled with full weight J.
    QuadRiccati(int n_sites, double delta, double g, double J, double gam)
        : gamma(gam), n(n_sites) {
        A.setZero(2 * n, 2 * n);
        for (int i = 0; i < n; ++i) {
            A(2 * i, 2 * i) = -gam / 2.0;
            A(2 * i, 2 * i + 1) = -(delta + g);
            A(2 * i + 1, 2 * i) = (delta - g);
            A(2 * i + 1, 2 * i + 1) = -gam / 2.0;
        }
        if (n == 2) {
            A(0, 3) = -J;
            A(1, 2) = J;
            A(2, 1) = -J;
            A(3, 0) = J;
        }
    }

    Eigen::MatrixXd rhs(const Eigen::MatrixXd& s) const {
        Eigen::MatrixXd sh = s - 0.5 * Eigen::MatrixXd::Identity(2 * n, 2 * n);
        Eigen::MatrixXd chi(2 * n, n);
        for (int j = 0; j < n; ++j) chi.col(j) = std::sqrt(2.0 * gamma) * sh.col(2 * j);
        return A * s + s * A.transpose() +
               0.5 * gamma * Eigen::MatrixXd::Identity(2 * n, 2 * n) -
               chi * chi.transpose();
    }

    Eigen::MatrixXd step(Eigen::MatrixXd s, double h) const {
        Eigen::MatrixXd k1 = rhs(s), k2 = rhs(s + 0.5 * h * k1), k3 = rhs(s + 0.5 * h * k2),
                        k4 = rhs(s + h * k3);
        return s + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }

    cplx u_of(const Eigen::MatrixXd& s, int i, int j) const {
        return cplx((s(2 * i, 2 * j) - s(2 * i + 1, 2 * j + 1)) / 2.0,
                    (s(2 * i, 2 * j + 1) + s(2 * i + 1, 2 * j)) / 2.0);
    }
    cplx v_of(const Eigen::MatrixXd& s, int i, int j) const {
        return cplx((s(2 * i, 2 * j) + s(2 * i + 1, 2 * j + 1)) / 2.0 - (i == j ? 0.5 : 0.0),
                    (s(2 * i, 2 * j + 1) - s(2 * i + 1, 2 * j)) / 2.0);
    }
};

LatticeGraph pair_graph() {
    // two sites coupled with the full hopping weight J: each lists the other
    // on all four neighbor slots, 4 * J/(2d) = J.
    LatticeGraph g;
    g.L = 0;
    g.n_sites = 2;
    g.n_nbrs = 4;
    g.neighbors = {{1, 1, 1, 1}, {0, 0, 0, 0}};
    return g;
}

ModelParams quad_params(double g_drive, double j_hop) {
    ModelParams p;
    p.delta = -1.0;
    p.u_kerr = 0.0;
    p.g_drive = g_drive;
    p.j_hop = j_hop;
    p.gamma = 1.0;
    return p;
}

} // namespace

TEST_CASE("single-site covariance flow matches the Riccati reference") {
    auto p = quad_params(0.3, 0.0);
    auto g1 = build_lattice(1);
    QuadRiccati ric(1, -1.0, 0.3, 0.0, 1.0);

    // reference steady point, frozen (RK4 to T=100, residual < 1e-13)
    const double kVxx = 0.38863934287746565;
    const double kVpp = 0.65310582592958766;
    const double kVxp = -0.061827332294999433;

    Eigen::MatrixXd sig = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    const double hr = 1e-3;
    for (int k = 0; k < 100000; ++k) sig = ric.step(sig, hr);
    CHECK(ric.rhs(sig).norm() < 1e-10);
    CHECK(sig(0, 0) == doctest::Approx(kVxx).epsilon(1e-9));
    CHECK(sig(1, 1) == doctest::Approx(kVpp).epsilon(1e-9));
    CHECK(sig(0, 1) == doctest::Approx(kVxp).epsilon(1e-9));

    // GTA trajectory (any noise realization: the covariance flow is
    // deterministic) relaxes onto the same point, and tracks the transient.
    GaussianTrajectoryState s = GaussianTrajectoryState::vacuum(1);
    GtaWorkspace ws;
    ws.resize(1);
    NoiseStream ns(71, 4, 11);
    Eigen::VectorXd dw(1);
    Eigen::MatrixXd sig_t = 0.5 * Eigen::MatrixXd::Identity(2, 2);
    const double h = 1e-4;
    double max_transient = 0.0;
    for (int64_t k = 0; k < 300000; ++k) { // T = 30
        ns.fill_normals(uint64_t(k), dw.data(), 1, std::sqrt(h), false);
        em_step(s, p, g1, 0.3, h, dw, ws);
        sig_t = ric.step(sig_t, h);
        if (k < 100000) {
            const double dev = std::max(std::abs(s.u(0, 0) - ric.u_of(sig_t, 0, 0)),
                                        std::abs(s.v(0, 0) - ric.v_of(sig_t, 0, 0)));
            max_transient = std::max(max_transient, dev);
        }
    }
    CHECK(max_transient < 1e-4);
    const cplx u_ref((kVxx - kVpp) / 2.0, kVxp);
    const double v_ref = (kVxx + kVpp - 1.0) / 2.0;
    CHECK(std::abs(s.u(0, 0) - u_ref) < 1e-4);
    CHECK(std::abs(s.v(0, 0) - v_ref) < 1e-4);
    // at the fixed point the match is much tighter than the acceptance bound
    CHECK(std::abs(s.u(0, 0) - u_ref) < 1e-8);
    CHECK(std::abs(s.v(0, 0) - v_ref) < 1e-8);
}

TEST_CASE("two-site covariance steady state matches the coupled Riccati reference") {
    auto p = quad_params(0.3, 1.0);
    auto pg = pair_graph();
    QuadRiccati ric(2, -1.0, 0.3, 1.0, 1.0);

    // frozen steady covariances (RK4 to T=200, residual ~1e-13)
    const cplx u00_ref(-0.0073361863195289811, -0.14481228939630764);
    const cplx u01_ref(0.064801014860503547, -0.12781715040049091);
    const double v00_ref = 0.038925819116428118;
    const double v01_ref = 0.03346305041473141;

    Eigen::MatrixXd sig = 0.5 * Eigen::MatrixXd::Identity(4, 4);
    for (int k = 0; k < 200000; ++k) sig = ric.step(sig, 1e-3);
    CHECK(ric.rhs(sig).norm() < 1e-10);
    CHECK(std::abs(ric.u_of(sig, 0, 0) - u00_ref) < 1e-9);
    CHECK(std::abs(ric.u_of(sig, 0, 1) - u01_ref) < 1e-9);
    CHECK(std::abs(ric.v_of(sig, 0, 0) - cplx(v00_ref, 0)) < 1e-9);
    CHECK(std::abs(ric.v_of(sig, 0, 1) - cplx(v01_ref, 0)) < 1e-9);

    NoiseStream ns(5, 5, 5);
    TrajectoryOptions opt;
    opt.h = 1e-4;
    opt.label = "pair-riccati";
    auto out = run_trajectory(GaussianTrajectoryState::vacuum(2), p, pg,
                              Schedule::hold(0.3, 40.0), {40.0}, ns, opt);
    const auto& f = out.final_state;
    CHECK(std::abs(f.u(0, 0) - u00_ref) < 1e-8);
    CHECK(std::abs(f.u(0, 1) - u01_ref) < 1e-8);
    CHECK(std::abs(f.u(1, 1) - u00_ref) < 1e-8); // site symmetry
    CHECK(std::abs(f.v(0, 0) - cplx(v00_ref, 0)) < 1e-8);
    CHECK(std::abs(f.v(0, 1) - cplx(v01_ref, 0)) < 1e-8);
}

TEST_CASE("single site, shared noise: trajectory matches the truncated-Fock unraveling") {
    auto p = quad_params(0.3, 0.0);
    auto g1 = build_lattice(1);
    auto site = FockSite::make(p, 30);
    Vec psi0 = Vec::Zero(31);
    psi0(0) = 1.0;

    std::vector<double> ts;
    for (int k = 0; k <= 100; ++k) ts.push_back(0.1 * k);

    NoiseStream ns(2718, 5, 42);
    SseOptions sopt;
    sopt.h = 1e-4;
    auto sse = fock_sse_trajectory(site.h0, site.hdrive, Schedule::hold(0.3, 10.0),
                                   {site.a}, p.gamma, psi0, ts, ns, sopt);
    REQUIRE(sse.t.size() == ts.size());
    CHECK(sse.max_step_norm_dev < 1e-4);

    // step the moment engine with the identical Wiener increments
    GaussianTrajectoryState s = GaussianTrajectoryState::vacuum(1);
    GtaWorkspace ws;
    ws.resize(1);
    Eigen::VectorXd dw(1);
    const double h = 1e-4;
    double max_da = 0, max_du = 0, max_dv = 0;
    size_t si = 0;
    for (int64_t k = 0; k <= 100000; ++k) {
        if (si < ts.size() && k == llround(ts[si] / h)) {
            const cplx am = sse.amp[si](0);
            max_da = std::max(max_da, std::abs(s.alpha(0) - am));
            max_du = std::max(max_du, std::abs(s.u(0, 0) - (sse.mom_aa[si](0, 0) - am * am)));
            max_dv = std::max(max_dv,
                              std::abs(s.v(0, 0) - (sse.mom_ada[si](0, 0) - std::conj(am) * am)));
            ++si;
        }
        if (k == 100000) break;
        ns.fill_normals(uint64_t(k), dw.data(), 1, std::sqrt(h), false);
        em_step(s, p, g1, 0.3, h, dw, ws);
    }
    REQUIRE(si == ts.size());
    CHECK(max_da < 1e-3);
    CHECK(max_du < 1e-3);
    CHECK(max_dv < 1e-3);
}

TEST_CASE("two sites, shared noise: pathwise agreement at the discretization level") {
    auto p = quad_params(0.3, 1.0);
    auto pg = pair_graph();
    auto fp = FockPair::make(p, 10);
    Vec psi0 = Vec::Zero(121);
    psi0(0) = 1.0;

    std::vector<double> ts;
    for (int k = 0; k <= 40; ++k) ts.push_back(0.25 * k);

    NoiseStream ns(31415, 2, 7);
    SseOptions sopt;
    sopt.h = 1e-4;
    auto sse = fock_sse_trajectory(fp.h0, fp.hdrive, Schedule::hold(0.3, 10.0),
                                   {fp.a1, fp.a2}, p.gamma, psi0, ts, ns, sopt);

    GaussianTrajectoryState s = GaussianTrajectoryState::vacuum(2);
    GtaWorkspace ws;
    ws.resize(2);
    Eigen::VectorXd dw(2);
    const double h = 1e-4;
    double max_da = 0;
    size_t si = 0;
    for (int64_t k = 0; k <= 100000; ++k) {
        if (si < ts.size() && k == llround(ts[si] / h)) {
            for (int j = 0; j < 2; ++j)
                max_da = std::max(max_da, std::abs(s.alpha(j) - sse.amp[si](j)));
            ++si;
        }
        if (k == 100000) break;
        ns.fill_normals(uint64_t(k), dw.data(), 2, std::sqrt(h), false);
        em_step(s, p, pg, 0.3, h, dw, ws);
    }
    // both integrators are Euler-Maruyama at h=1e-4; their pathwise difference
    // is discretization-limited (measured 1.6-2.4e-3 across seeds)
    CHECK(max_da < 5e-3);
}

TEST_CASE("noise reflection: alpha flips sign bitwise, covariances unchanged") {
    ModelParams p; // interacting case, defaults: U=1, J=1, delta=-1, gamma=1
    p.g_drive = 0.8;
    auto g = build_lattice(3);
    const int n = g.n_sites;

    GaussianTrajectoryState a = GaussianTrajectoryState::polarized(n, cplx(0.0, 0.4));
    GaussianTrajectoryState b = GaussianTrajectoryState::polarized(n, cplx(0.0, -0.4));
    GtaWorkspace wa, wb;
    wa.resize(n);
    wb.resize(n);
    NoiseStream ns(99, 0, 3);
    Eigen::VectorXd dwa(n), dwb(n);
    const double h = 1e-3;
    for (int64_t k = 0; k < 2000; ++k) {
        ns.fill_normals(uint64_t(k), dwa.data(), n, std::sqrt(h), false);
        ns.fill_normals(uint64_t(k), dwb.data(), n, std::sqrt(h), true);
        em_step(a, p, g, 0.8, h, dwa, wa);
        em_step(b, p, g, 0.8, h, dwb, wb);
    }
    for (int i = 0; i < n; ++i) {
        CHECK(a.alpha(i) == -b.alpha(i)); // exact, not approximate
        for (int j = 0; j < n; ++j) {
            CHECK(a.u(i, j) == b.u(i, j));
            CHECK(a.v(i, j) == b.v(i, j));
        }
    }
}

TEST_CASE("noise enters the amplitudes only") {
    // at U=0 the covariance flow is autonomous: two different noise streams
    // must give bitwise-identical (u, v) while the amplitudes differ.
    auto p = quad_params(0.4, 1.0);
    auto g = build_lattice(3);
    const int n = g.n_sites;
    GaussianTrajectoryState a = GaussianTrajectoryState::vacuum(n);
    GaussianTrajectoryState b = GaussianTrajectoryState::vacuum(n);
    GtaWorkspace wa, wb;
    wa.resize(n);
    wb.resize(n);
    NoiseStream nsa(1, 0, 0), nsb(2, 0, 0);
    Eigen::VectorXd dwa(n), dwb(n);
    const double h = 1e-3;
    for (int64_t k = 0; k < 1000; ++k) {
        nsa.fill_normals(uint64_t(k), dwa.data(), n, std::sqrt(h), false);
        nsb.fill_normals(uint64_t(k), dwb.data(), n, std::sqrt(h), false);
        em_step(a, p, g, 0.4, h, dwa, wa);
        em_step(b, p, g, 0.4, h, dwb, wb);
    }
    CHECK(a.u == b.u);
    CHECK(a.v == b.v);
    CHECK(a.alpha != b.alpha);

    // and with dw = 0 the amplitudes stay put when started at a fixed point
    // of the drift (vacuum at G below threshold has A = 0 exactly)
    GaussianTrajectoryState c = GaussianTrajectoryState::vacuum(n);
    GtaWorkspace wc;
    wc.resize(n);
    Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
    for (int64_t k = 0; k < 100; ++k) em_step(c, p, g, 0.4, h, zero, wc);
    CHECK(c.alpha == Eigen::VectorXcd::Zero(n));
}

TEST_CASE("structure is exact after many steps") {
    ModelParams p;
    p.g_drive = 0.86;
    auto g = build_lattice(3);
    const int n = g.n_sites;
    GaussianTrajectoryState s = GaussianTrajectoryState::polarized(n, cplx(0.1, 0.5));
    GtaWorkspace ws;
    ws.resize(n);
    NoiseStream ns(12, 1, 8);
    Eigen::VectorXd dw(n);
    const double h = 1e-3;
    for (int64_t k = 0; k < 20000; ++k) {
        ns.fill_normals(uint64_t(k), dw.data(), n, std::sqrt(h), false);
        em_step(s, p, g, 0.86, h, dw, ws);
    }
    REQUIRE(s.finite());
    for (int i = 0; i < n; ++i) {
        CHECK(s.v(i, i).imag() == 0.0);
        for (int j = 0; j < n; ++j) {
            CHECK(s.u(i, j) == s.u(j, i));
            CHECK(s.v(i, j) == std::conj(s.v(j, i)));
        }
    }
    CHECK(s.min_v_eigenvalue() > -1e-6);
}

TEST_CASE("vacuum at zero drive is an exact fixed point") {
    ModelParams p;
    p.g_drive = 0.0;
    auto g = build_lattice(3);
    GaussianTrajectoryState s = GaussianTrajectoryState::vacuum(g.n_sites);
    GtaWorkspace ws;
    ws.resize(g.n_sites);
    NoiseStream ns(4, 4, 4);
    Eigen::VectorXd dw(g.n_sites);
    for (int64_t k = 0; k < 500; ++k) {
        ns.fill_normals(uint64_t(k), dw.data(), g.n_sites, std::sqrt(1e-3), false);
        em_step(s, p, g, 0.0, 1e-3, dw, ws);
    }
    // B = sqrt(gamma)(u + v^T) = 0, so even with noise the state cannot move
    CHECK(s.alpha == Eigen::VectorXcd::Zero(g.n_sites));
    CHECK(s.u == Eigen::MatrixXcd::Zero(g.n_sites, g.n_sites));
    CHECK(s.v == Eigen::MatrixXcd::Zero(g.n_sites, g.n_sites));
}

TEST_CASE("run_trajectory: replay determinism and manual-loop equivalence") {
    ModelParams p;
    p.g_drive = 0.8;
    auto g = build_lattice(3);
    auto init = GaussianTrajectoryState::polarized(g.n_sites, cplx(0.0, 0.3));
    NoiseStream ns(321, 9, 2);
    TrajectoryOptions opt;
    opt.h = 1e-3;
    opt.label = "replay";
    std::vector<double> ts{0.0, 0.5, 1.0, 1.5, 2.0};

    auto r1 = run_trajectory(init, p, g, Schedule::hold(0.8, 2.0), ts, ns, opt);
    auto r2 = run_trajectory(init, p, g, Schedule::hold(0.8, 2.0), ts, ns, opt);
    REQUIRE(r1.samples.t.size() == ts.size());
    CHECK(r1.samples.abar == r2.samples.abar);
    CHECK(r1.samples.nk0 == r2.samples.nk0);
    CHECK(r1.final_state.alpha == r2.final_state.alpha);
    CHECK(r1.final_state.u == r2.final_state.u);
    CHECK(r1.final_state.v == r2.final_state.v);

    // manual loop with the same per-step noise draw reproduces it bitwise
    GaussianTrajectoryState s = init;
    GtaWorkspace ws;
    ws.resize(g.n_sites);
    Eigen::VectorXd dw(g.n_sites);
    for (int64_t k = 0; k < 2000; ++k) {
        ns.fill_normals(uint64_t(k), dw.data(), g.n_sites, std::sqrt(opt.h), false);
        em_step(s, p, g, 0.8, opt.h, dw, ws);
    }
    CHECK(s.alpha == r1.final_state.alpha);
    CHECK(s.u == r1.final_state.u);
    CHECK(s.v == r1.final_state.v);
}

TEST_CASE("run_trajectory: input validation and positivity guard") {
    ModelParams p;
    auto g = build_lattice(3);
    auto init = GaussianTrajectoryState::vacuum(g.n_sites);
    NoiseStream ns(1, 1, 1);
    TrajectoryOptions opt;
    opt.h = 1e-3;

    CHECK_THROWS_AS(run_trajectory(init, p, g, Schedule::hold(0.0, 1.0), {0.5, 0.2}, ns, opt),
                    ConfigError); // non-monotone samples
    TrajectoryOptions bad = opt;
    bad.h = 0.0;
    CHECK_THROWS_AS(run_trajectory(init, p, g, Schedule::hold(0.0, 1.0), {0.5}, ns, bad),
                    ConfigError);
    CHECK_THROWS_AS(
        run_trajectory(GaussianTrajectoryState::vacuum(2), p, g, Schedule::hold(0.0, 1.0),
                       {0.5}, ns, opt),
        ConfigError); // size mismatch

    auto sick = GaussianTrajectoryState::vacuum(g.n_sites);
    sick.v(0, 0) = -1.0; // violates positivity beyond any tolerance
    CHECK_THROWS_AS(run_trajectory(sick, p, g, Schedule::hold(0.0, 1.0), {0.0}, ns, opt),
                    NumericError);
}
