#pragma once
// Scaling analysis: exponential/power-law fits, finite-size data collapse,
// dynamical-exponent scans with bootstrap confidence intervals, and the
// gap power law. Everything operates on plain curves so the same machinery
// serves the resonator lattice and the classical spin reference.
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace kerrlat {

struct CriticalExponents {
    double beta = 0.125; // order-parameter exponent
    double nu = 1.0;     // correlation-length exponent
    double z = 2.18;     // dynamical exponent (the quantity under test)
    int d = 2;           // spatial dimension

    void validate() const; // throws ConfigError outside sane ranges
};

// Binder cumulant 1 - <m^4> / (3 <m^2>^2).
double binder_cumulant(double m2, double m4);

struct ExpFit {
    double lambda = 0.0;  // decay rate
    double se_lambda = 0.0;
    double amplitude = 0.0;
    double r2 = 0.0;
    int n_used = 0;
    double t_lo = 0.0, t_hi = 0.0; // actual fitted window
};

// Least-squares line through (t, log y) for t >= t_min. Points below the
// noise floor (y <= floor_mult * se) are dropped when stderrs are supplied;
// otherwise non-positive y within the window is an error. Needs >= 4 points.
ExpFit fit_exp_decay(const std::vector<double>& t, const std::vector<double>& y,
                     const std::vector<double>& se, double t_min,
                     double floor_mult = 3.0);

struct PowerFit {
    double exponent = 0.0;
    double se_exponent = 0.0;
    double amplitude = 0.0;
    double r2 = 0.0;
    int n_used = 0;
};

// Least-squares line through (log x, log y); x and y must be positive.
PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y);

// One finite-size curve: observable y(x) at linear system size L.
// For quench data x = sweep velocity and y = <abar^2> at the end point;
// for relaxation data x = drive amplitude G and y = fitted decay rate.
struct ScalingCurve {
    double size_L = 0.0;
    std::vector<double> x, y;
};

enum class CollapseMode {
    f1, // x -> x L^(z + 1/nu),  y -> y L^(2 beta/nu)
    f2, // x -> x,               y -> y L^d
};

// Mean squared mismatch, in log-log coordinates, between every curve and the
// linear interpolant of every other curve over their overlapping range.
// Zero overlap anywhere -> error. Non-positive y points are skipped.
double collapse_residual(const std::vector<ScalingCurve>& curves, const CriticalExponents& e,
                         CollapseMode mode);

struct ScanResult {
    double z_star = 0.0;
    double residual_min = 0.0;
    bool flat = false; // residual max/min < 1.05 across the grid: scan uninformative
    std::vector<double> z_grid, residual;
};

struct ZGrid {
    double lo = 1.5, hi = 3.0, step = 0.01;
};

// f1 mode: scan z over the grid and return the residual minimizer.
// f2 mode: the rescaling contains no z, so z is obtained instead from the
// power-law exponent x of the collapsed master curve within [x_lo, x_hi],
// inverted through x = (d - 2 beta/nu)/(z + 1/nu); the grid fields of the
// result then just carry the fitted exponent diagnostics.
ScanResult scan_z(const std::vector<ScalingCurve>& curves, const CriticalExponents& e,
                  CollapseMode mode, const ZGrid& grid, double x_lo = 1e-2,
                  double x_hi = 1.0);

// Per-realization data for one quench run: final order-parameter values for
// every trajectory, at one (L, velocity) point.
struct QuenchEnsembleData {
    double size_L = 0.0;
    std::vector<double> velocity;
    std::vector<std::vector<double>> abar_final; // [velocity][trajectory]
};

struct BootstrapResult {
    double z_star = 0.0;
    double ci_lo = 0.0, ci_hi = 0.0; // central 95% over resamples
    double flat_fraction = 0.0;      // resamples flagged flat
    int n_resamples = 0;
};

// Bootstrap over trajectories (resampled with replacement independently per
// (L, v) run), 200 resamples by default, deterministic given `seed`.
BootstrapResult scan_z_bootstrap(const std::vector<QuenchEnsembleData>& data,
                                 const CriticalExponents& e, CollapseMode mode,
                                 const ZGrid& grid, int n_resamples, uint64_t seed,
                                 double x_lo = 1e-2, double x_hi = 1.0);

struct GapPoint {
    double size_L = 0.0;
    double g = 0.0;      // drive amplitude
    double lambda = 0.0; // fitted decay rate
};

struct GapPowerLaw {
    double slope = 0.0; // fitted exponent of lambda vs |G - G_c| (expect z nu)
    double se_slope = 0.0;
    double r2 = 0.0;
    int n_used = 0;
};

// Log-log fit of lambda against |G - G_c| restricted to the short-correlation
// regime L^(1/nu) (G - G_c) < regime_cutoff. Fewer than 4 usable points is an
// error rather than a silent fit.
GapPowerLaw gap_power_law(const std::vector<GapPoint>& pts, double g_c, double nu,
                          double regime_cutoff = -1.0);

// Linear-interpolated crossing of two Binder curves sampled on a common grid;
// returns the temperature-like control value where they intersect.
std::optional<double> binder_crossing(const std::vector<double>& x,
                                      const std::vector<double>& ub_small,
                                      const std::vector<double>& ub_large);

} // namespace kerrlat
