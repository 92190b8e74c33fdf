#include <doctest.h>

#include <kerrlat/errors.hpp>
#include <kerrlat/ising.hpp>
#include <kerrlat/rng.hpp>

#include <cmath>
#include <vector>

using namespace kerrlat;

TEST_CASE("exact critical temperature") {
    CHECK(ising_tc_exact() == doctest::Approx(2.2691853142130221).epsilon(1e-15));
}

TEST_CASE("lattice constructors and running tallies") {
    const auto up = IsingLattice::uniform(4, 1);
    CHECK(up.m_sum == 16);
    CHECK(up.energy == -32); // 2 bonds per site, all satisfied
    CHECK(up.magnetization() == 1.0);
    CHECK(up.recompute_m() == up.m_sum);
    CHECK(up.recompute_energy() == up.energy);

    NoiseStream stream(11, 0, salt_from_tag("ising-init"));
    const auto hot = IsingLattice::random(32, stream);
    CHECK(hot.m_sum == hot.recompute_m());
    CHECK(hot.energy == hot.recompute_energy());
    CHECK(std::abs(hot.magnetization()) < 0.3); // hot start is disordered

    const auto hot2 = IsingLattice::random(32, stream);
    CHECK(hot.s == hot2.s); // same stream -> same lattice

    CHECK_THROWS_AS(IsingLattice::random(1, stream), ConfigError);
    CHECK_THROWS_AS(IsingLattice::uniform(0, 1), ConfigError);
}

TEST_CASE("sweep keeps the incremental energy and magnetization exact") {
    NoiseStream init(3, 0, salt_from_tag("book-init"));
    NoiseStream dyn(3, 0, salt_from_tag("book-dyn"));
    auto lat = IsingLattice::random(8, init);
    const double T = ising_tc_exact(); // mixed accept/reject regime
    for (uint64_t k = 0; k < 50; ++k) {
        metropolis_sweep(lat, T, dyn, k);
        REQUIRE(lat.energy == lat.recompute_energy());
        REQUIRE(lat.m_sum == lat.recompute_m());
    }
}

TEST_CASE("temperature limits") {
    NoiseStream init(5, 0, salt_from_tag("limit-init"));
    NoiseStream dyn(5, 0, salt_from_tag("limit-dyn"));

    // T -> infinity: every attempt accepted (up to ~1e-12 tail probability)
    auto hot = IsingLattice::random(8, init);
    for (uint64_t k = 0; k < 20; ++k) CHECK(metropolis_sweep(hot, 1e12, dyn, k) >= 63);

    // T -> 0 from the fully ordered state: every flip costs 8 and is rejected
    auto cold = IsingLattice::uniform(8, 1);
    for (uint64_t k = 0; k < 20; ++k) CHECK(metropolis_sweep(cold, 0.05, dyn, 100 + k) == 0);
    CHECK(cold.m_sum == 64);
    CHECK(cold.energy == -128);

    CHECK_THROWS_AS(metropolis_sweep(hot, 0.0, dyn, 0), ConfigError);
    CHECK_THROWS_AS(metropolis_sweep(hot, -1.0, dyn, 0), ConfigError);
}

TEST_CASE("dynamics commutes with a global spin flip") {
    NoiseStream init(7, 0, salt_from_tag("flip-init"));
    NoiseStream dyn(7, 0, salt_from_tag("flip-dyn"));
    auto a = IsingLattice::random(16, init);
    auto b = a;
    for (auto& v : b.s) v = int8_t(-v);
    b.m_sum = -a.m_sum;

    for (uint64_t k = 0; k < 30; ++k) {
        const int na = metropolis_sweep(a, 2.5, dyn, k);
        const int nb = metropolis_sweep(b, 2.5, dyn, k);
        CHECK(na == nb);
    }
    CHECK(b.m_sum == -a.m_sum);
    CHECK(b.energy == a.energy);
    for (size_t i = 0; i < a.s.size(); ++i) REQUIRE(b.s[i] == int8_t(-a.s[i]));
}

TEST_CASE("sweep noise is addressed by sweep index") {
    NoiseStream init(9, 0, salt_from_tag("addr-init"));
    NoiseStream dyn(9, 0, salt_from_tag("addr-dyn"));
    auto a = IsingLattice::random(8, init);
    auto b = a;
    auto c = a;
    metropolis_sweep(a, 2.5, dyn, 4);
    metropolis_sweep(b, 2.5, dyn, 4);
    metropolis_sweep(c, 2.5, dyn, 5);
    CHECK(a.s == b.s);     // same block -> identical
    CHECK(a.s != c.s);     // different block -> different update sequence
}

TEST_CASE("equilibrium moments bracket the transition") {
    IsingOptions opt;
    opt.n_real = 8;
    opt.seed = 21;
    opt.workers = 2;

    const auto cold = ising_equilibrium_binder(8, 1.5, 200, 60, 3, opt, "eq-cold");
    const auto hot = ising_equilibrium_binder(8, 4.0, 200, 60, 3, opt, "eq-hot");
    CHECK(cold.m2 > 0.7);         // ordered
    CHECK(hot.m2 < 0.15);         // disordered
    CHECK(cold.ub > 0.55);        // near 2/3
    CHECK(hot.ub < 0.35);         // near 0
    CHECK(cold.ub > hot.ub);
    CHECK(cold.se_ub > 0.0);
    CHECK(cold.se_ub < 0.2);

    // deterministic given the seed
    const auto again = ising_equilibrium_binder(8, 1.5, 200, 60, 3, opt, "eq-cold");
    CHECK(again.ub == cold.ub);
    CHECK(again.se_ub == cold.se_ub);

    CHECK_THROWS_AS(ising_equilibrium_binder(8, 1.5, 10, 5, 8, opt, "bad"), ConfigError);
    IsingOptions one = opt;
    one.n_real = 1;
    CHECK_THROWS_AS(ising_equilibrium_binder(8, 1.5, 10, 10, 1, one, "bad"), ConfigError);
}

TEST_CASE("temperature quench bookkeeping") {
    IsingOptions opt;
    opt.n_real = 3;
    opt.seed = 33;
    opt.equil_sweeps = 20;
    opt.n_samples = 200; // clamped to the sweep count

    const auto run = ising_linear_quench(8, ising_tc_exact(), 0.5, 0.05, opt, "quench");
    CHECK(run.v_eps == 0.05);
    REQUIRE(run.t.size() == 11); // 10 sweeps + both endpoints
    CHECK(run.t.front() == 0.0);
    CHECK(run.t.back() == 10.0);
    REQUIRE(run.m_rows.size() == 3);
    for (const auto& row : run.m_rows) REQUIRE(row.size() == 11);
    for (size_t r = 0; r < 3; ++r) CHECK(run.m_final[r] == run.m_rows[r].back());

    const auto rerun = ising_linear_quench(8, ising_tc_exact(), 0.5, 0.05, opt, "quench");
    CHECK(rerun.m_final == run.m_final);
    const auto other = ising_linear_quench(8, ising_tc_exact(), 0.5, 0.05, opt, "quench2");
    CHECK(other.m_final != run.m_final);

    CHECK_THROWS_AS(ising_linear_quench(8, 2.269, 0.0, 0.05, opt, "bad"), ConfigError);
    CHECK_THROWS_AS(ising_linear_quench(8, 2.269, 0.5, 0.0, opt, "bad"), ConfigError);
    IsingOptions one = opt;
    one.n_real = 1;
    CHECK_THROWS_AS(ising_linear_quench(8, 2.269, 0.5, 0.05, one, "bad"), ConfigError);
}
