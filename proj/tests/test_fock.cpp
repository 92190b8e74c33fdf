#include <doctest.h>

#include <kerrlat/errors.hpp>
#include <kerrlat/fock.hpp>

#include <cmath>
#include <complex>
#include <vector>

using namespace kerrlat;

namespace {
constexpr cplx I(0.0, 1.0);
}

TEST_CASE("annihilation operator matrix elements") {
    Mat a = fock_annihilation(4);
    CHECK(a.rows() == 5);
    for (int n = 1; n <= 4; ++n) {
        CHECK(a(n - 1, n).real() == doctest::Approx(std::sqrt(double(n))));
        CHECK(a(n - 1, n).imag() == 0.0);
    }
    CHECK(a.cwiseAbs().sum() == doctest::Approx(1 + std::sqrt(2.) + std::sqrt(3.) + 2));
    // [a, a^dag] = 1 away from the truncation edge
    Mat comm = a * a.adjoint() - a.adjoint() * a;
    for (int n = 0; n < 4; ++n) CHECK(comm(n, n).real() == doctest::Approx(1.0));
}

TEST_CASE("kron layout matches composite indexing") {
    Mat A(2, 2), B(2, 2);
    A << 1, 2, 3, 4;
    B << 0, 5, 6, 7;
    Mat K = kron(A, B);
    REQUIRE(K.rows() == 4);
    // (i_A * dB + i_B, j_A * dB + j_B) = A(i_A, j_A) * B(i_B, j_B)
    for (int ia = 0; ia < 2; ++ia)
        for (int ib = 0; ib < 2; ++ib)
            for (int ja = 0; ja < 2; ++ja)
                for (int jb = 0; jb < 2; ++jb)
                    CHECK(K(ia * 2 + ib, ja * 2 + jb) == A(ia, ja) * B(ib, jb));
}

TEST_CASE("coherent state moments") {
    const cplx beta(0.4, -0.3);
    Mat rho = coherent_dm(20, beta);
    Mat a = fock_annihilation(20);
    CHECK(std::abs(rho.trace() - 1.0) < 1e-12);
    CHECK(std::abs((a * rho).trace() - beta) < 1e-10);
    CHECK(std::abs((a.adjoint() * a * rho).trace() - cplx(std::norm(beta))) < 1e-10);
    // purity
    CHECK(std::abs((rho * rho).trace() - 1.0) < 1e-12);
}

TEST_CASE("liouvillian preserves the trace") {
    ModelParams p;
    p.g_drive = 0.6;
    auto site = FockSite::make(p, 8);
    Mat H = site.h0 + 0.6 * site.hdrive;
    Mat L = liouvillian_matrix(H, {site.a});
    // act on a random Hermitian matrix and check tr(L rho) = 0
    Mat r = Mat::Random(9, 9);
    r = (r + r.adjoint()).eval();
    Vec v = Eigen::Map<const Vec>(r.data(), 81);
    Vec Lv = L * v;
    Mat out = Eigen::Map<const Mat>(Lv.data(), 9, 9);
    CHECK(std::abs(out.trace()) < 1e-10);
}

TEST_CASE("steady state: fixed point, physical, frozen occupation") {
    // strongly interacting single site used as the ensemble-vs-exact anchor
    ModelParams p;
    p.delta = -1.0;
    p.u_kerr = 1.0;
    p.g_drive = 0.7;
    p.j_hop = 0.0;
    p.gamma = 1.0;

    double n16 = 0, n20 = 0;
    for (int nm : {16, 20}) {
        auto site = FockSite::make(p, nm);
        Mat H = site.h0 + 0.7 * site.hdrive;
        Mat L = liouvillian_matrix(H, {site.a});
        Mat rho = steady_state(L);

        CHECK(std::abs(rho.trace() - 1.0) < 1e-10);
        CHECK((rho - rho.adjoint()).cwiseAbs().maxCoeff() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Mat> es(rho, Eigen::EigenvaluesOnly);
        CHECK(es.eigenvalues().minCoeff() > -1e-10);
        // it really is a fixed point of the generator
        Vec v = Eigen::Map<const Vec>(rho.data(), rho.size());
        CHECK((L * v).cwiseAbs().maxCoeff() < 1e-9);

        const double n = (site.num * rho).trace().real();
        (nm == 16 ? n16 : n20) = n;
    }
    // truncation-converged reference value, frozen
    CHECK(n16 == doctest::Approx(0.0993362410398487).epsilon(1e-10));
    CHECK(n20 == doctest::Approx(0.0993362410398487).epsilon(1e-10));
    CHECK(std::abs(n16 - n20) < 1e-12);
    // parity symmetry of the steady state: <a> = 0
    auto site = FockSite::make(p, 16);
    Mat L = liouvillian_matrix(site.h0 + 0.7 * site.hdrive, {site.a});
    Mat rho = steady_state(L);
    CHECK(std::abs((site.a * rho).trace()) < 1e-10);
}

TEST_CASE("zero drive: both gap routes give gamma/2 for any U, delta") {
    struct Case {
        double u, delta, gamma;
    };
    for (auto c : {Case{1.0, -1.0, 1.0}, Case{0.7, 0.5, 0.8}}) {
        ModelParams p;
        p.delta = c.delta;
        p.u_kerr = c.u;
        p.g_drive = 0.0;
        p.j_hop = 0.0;
        p.gamma = c.gamma;
        auto site = FockSite::make(p, 12);
        Mat L = liouvillian_matrix(site.h0, {std::sqrt(c.gamma) * site.a});

        const double gs = spectral_gap(L);
        CHECK(gs == doctest::Approx(c.gamma / 2.0).epsilon(1e-9));

        Mat rho0 = coherent_dm(12, cplx(0.0, 0.6));
        auto fit = decay_gap(L, rho0, site.a, 0.05, 2.0 / c.gamma, 14.0 / c.gamma);
        CHECK(std::abs(fit.lambda - c.gamma / 2.0) / (c.gamma / 2.0) < 1e-3);
        CHECK(fit.r2 > 0.999);
        // the <a> sector rotates at the detuning frequency
        CHECK(fit.freq == doctest::Approx(c.delta).epsilon(5e-3));
    }
}

TEST_CASE("coupled pair at zero drive keeps the gamma/2 gap") {
    ModelParams p;
    p.delta = -1.0;
    p.u_kerr = 1.0;
    p.g_drive = 0.0;
    p.j_hop = 1.0;
    p.gamma = 1.0;
    auto fp = FockPair::make(p, 4);
    Mat L = liouvillian_matrix(fp.h0, {fp.a1, fp.a2});
    CHECK(spectral_gap(L) == doctest::Approx(0.5).epsilon(1e-8));

    Mat r1 = coherent_dm(4, cplx(0.0, 0.25));
    Mat rho0 = kron(r1, r1);
    auto fit = decay_gap(L, rho0, fp.a1, 0.05, 2.0, 12.0);
    CHECK(std::abs(fit.lambda - 0.5) / 0.5 < 1e-3);
}

TEST_CASE("finite drive: spectral and decay routes agree") {
    ModelParams p;
    p.delta = -1.0;
    p.u_kerr = 1.0;
    p.g_drive = 0.4;
    p.j_hop = 0.0;
    p.gamma = 1.0;
    auto site = FockSite::make(p, 14);
    Mat L = liouvillian_matrix(site.h0 + 0.4 * site.hdrive, {site.a});

    const double gs = spectral_gap(L);
    // regression value, truncation-stable from n_max = 14 to 18
    CHECK(gs == doctest::Approx(0.512712194).epsilon(1e-6));

    Mat rho0 = coherent_dm(14, cplx(0.0, 0.5));
    auto fit = decay_gap(L, rho0, site.a, 0.05, 5.0, 25.0);
    CHECK(std::abs(fit.lambda - gs) / gs < 5e-3);
    CHECK(fit.r2 > 0.999);
}

TEST_CASE("propagate relaxes toward the steady state and keeps the trace") {
    ModelParams p;
    p.delta = -1.0;
    p.u_kerr = 1.0;
    p.g_drive = 0.5;
    p.j_hop = 0.0;
    p.gamma = 1.0;
    auto site = FockSite::make(p, 12);
    Mat L = liouvillian_matrix(site.h0 + 0.5 * site.hdrive, {site.a});
    Mat rho_ss = steady_state(L);

    Mat rho = coherent_dm(12, cplx(0.3, 0.4));
    const double d0 = (rho - rho_ss).cwiseAbs().maxCoeff();
    Mat rho_t = propagate(L, rho, 4.0, 0.05);
    CHECK(std::abs(rho_t.trace() - 1.0) < 1e-10);
    const double d1 = (rho_t - rho_ss).cwiseAbs().maxCoeff();
    CHECK(d1 < 0.25 * d0);
    Mat rho_T = propagate(L, rho, 40.0, 0.05);
    CHECK((rho_T - rho_ss).cwiseAbs().maxCoeff() < 1e-6);
}

TEST_CASE("decay_gap input validation") {
    ModelParams p;
    auto site = FockSite::make(p, 6);
    Mat L = liouvillian_matrix(site.h0, {site.a});
    Mat rho0 = coherent_dm(6, cplx(0.0, 0.3));
    CHECK_THROWS_AS(decay_gap(L, rho0, site.a, -0.1, 0.0, 1.0), ConfigError);
    CHECK_THROWS_AS(decay_gap(L, rho0, site.a, 0.05, 5.0, 1.0), ConfigError);
    // steady state has <a> = 0 identically: nothing usable to fit
    Mat rho_ss = steady_state(L);
    CHECK_THROWS_AS(decay_gap(L, rho_ss, site.a, 0.05, 0.0, 5.0), NumericError);
}

TEST_CASE("stochastic unraveling mirrors exactly under noise reflection") {
    ModelParams p;
    p.delta = -1.0;
    p.u_kerr = 1.0;
    p.g_drive = 0.5;
    p.j_hop = 0.0;
    p.gamma = 1.0;
    auto site = FockSite::make(p, 12);
    Vec psi0 = Vec::Zero(13);
    psi0(0) = 1.0;

    std::vector<double> ts{0.5, 1.0, 1.5, 2.0};
    NoiseStream ns(17, 3, 5);
    SseOptions o1;
    o1.h = 1e-3;
    SseOptions o2 = o1;
    o2.negate_noise = true;
    auto s1 = fock_sse_trajectory(site.h0, site.hdrive, Schedule::hold(0.5, 2.0), {site.a},
                                  p.gamma, psi0, ts, ns, o1);
    auto s2 = fock_sse_trajectory(site.h0, site.hdrive, Schedule::hold(0.5, 2.0), {site.a},
                                  p.gamma, psi0, ts, ns, o2);
    for (size_t k = 0; k < ts.size(); ++k) {
        // parity conjugation maps the reflected-noise trajectory onto the
        // original exactly, so <a> flips sign bitwise and <a a>, <a^dag a>
        // are bitwise equal
        CHECK(s1.amp[k](0) == -s2.amp[k](0));
        CHECK(s1.mom_aa[k](0, 0) == s2.mom_aa[k](0, 0));
        CHECK(s1.mom_ada[k](0, 0) == s2.mom_ada[k](0, 0));
    }
}

TEST_CASE("sse norm guard trips on a reckless step size") {
    ModelParams p;
    p.g_drive = 0.5;
    auto site = FockSite::make(p, 10);
    Vec psi0 = Vec::Zero(11);
    psi0(10) = 1.0; // highly excited state decays hard
    NoiseStream ns(8, 8, 8);
    SseOptions opt;
    opt.h = 0.5;
    CHECK_THROWS_AS(fock_sse_trajectory(site.h0, site.hdrive, Schedule::hold(0.5, 5.0),
                                        {site.a}, p.gamma, psi0, {5.0}, ns, opt),
                    NumericError);
}
