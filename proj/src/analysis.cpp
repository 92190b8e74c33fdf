#include "kerrlat/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "kerrlat/errors.hpp"
#include "kerrlat/rng.hpp"

namespace kerrlat {

void CriticalExponents::validate() const {
    if (!(beta > 0.0 && beta <= 0.5)) throw ConfigError("beta out of range (0, 0.5]");
    if (!(nu > 0.0 && nu <= 5.0)) throw ConfigError("nu out of range (0, 5]");
    if (!(z >= 1.5 && z <= 3.0)) throw ConfigError("z out of range [1.5, 3.0]");
    if (d != 2) throw ConfigError("only d = 2 is supported");
}

double binder_cumulant(double m2, double m4) {
    if (!(m2 > 0.0)) throw ConfigError("binder cumulant undefined for <m^2> <= 0");
    return 1.0 - m4 / (3.0 * m2 * m2);
}

namespace {

struct LinFit {
    double slope, icept, se_slope, r2;
    int n;
};

LinFit lls(const std::vector<double>& x, const std::vector<double>& y) {
    const int n = int(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (int k = 0; k < n; ++k) {
        sx += x[size_t(k)];
        sy += y[size_t(k)];
        sxx += x[size_t(k)] * x[size_t(k)];
        sxy += x[size_t(k)] * y[size_t(k)];
    }
    const double denom = n * sxx - sx * sx;
    if (!(std::abs(denom) > 0)) throw ConfigError("degenerate abscissa in linear fit");
    LinFit f{};
    f.n = n;
    f.slope = (n * sxy - sx * sy) / denom;
    f.icept = (sy - f.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (int k = 0; k < n; ++k) {
        const double r = y[size_t(k)] - (f.icept + f.slope * x[size_t(k)]);
        ss_res += r * r;
        ss_tot += (y[size_t(k)] - ybar) * (y[size_t(k)] - ybar);
    }
    const double sigma2 = n > 2 ? ss_res / (n - 2) : 0.0;
    f.se_slope = std::sqrt(sigma2 * n / denom);
    f.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return f;
}

} // namespace

ExpFit fit_exp_decay(const std::vector<double>& t, const std::vector<double>& y,
                     const std::vector<double>& se, double t_min, double floor_mult) {
    if (t.size() != y.size() || (!se.empty() && se.size() != y.size()))
        throw ConfigError("fit_exp_decay: size mismatch");
    std::vector<double> ts, ln_y;
    for (size_t k = 0; k < t.size(); ++k) {
        if (t[k] < t_min) continue;
        if (!se.empty()) {
            if (!(y[k] > floor_mult * se[k])) continue; // below the noise floor
        } else if (!(y[k] > 0.0)) {
            throw ConfigError("fit_exp_decay: non-positive mean inside the fit window");
        }
        ts.push_back(t[k]);
        ln_y.push_back(std::log(y[k]));
    }
    if (ts.size() < 4) throw ConfigError("fit_exp_decay: fewer than 4 usable points");
    const LinFit f = lls(ts, ln_y);
    ExpFit out;
    out.lambda = -f.slope;
    out.se_lambda = f.se_slope;
    out.amplitude = std::exp(f.icept);
    out.r2 = f.r2;
    out.n_used = f.n;
    out.t_lo = ts.front();
    out.t_hi = ts.back();
    return out;
}

PowerFit fit_power_law(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw ConfigError("fit_power_law: size mismatch");
    std::vector<double> lx, ly;
    for (size_t k = 0; k < x.size(); ++k) {
        if (!(x[k] > 0.0 && y[k] > 0.0))
            throw ConfigError("fit_power_law: non-positive data");
        lx.push_back(std::log(x[k]));
        ly.push_back(std::log(y[k]));
    }
    if (lx.size() < 4) throw ConfigError("fit_power_law: fewer than 4 points");
    const LinFit f = lls(lx, ly);
    PowerFit out;
    out.exponent = f.slope;
    out.se_exponent = f.se_slope;
    out.amplitude = std::exp(f.icept);
    out.r2 = f.r2;
    out.n_used = f.n;
    return out;
}

namespace {

struct LogCurve {
    std::vector<double> X, Y; // sorted by X
};

LogCurve rescale(const ScalingCurve& c, const CriticalExponents& e, CollapseMode mode) {
    if (!(c.size_L > 0)) throw ConfigError("collapse: curve without a system size");
    const double lnL = std::log(c.size_L);
    std::vector<std::pair<double, double>> pts;
    for (size_t k = 0; k < c.x.size(); ++k) {
        if (!(c.x[k] > 0.0) || !(c.y[k] > 0.0)) continue; // cannot log; skip
        double X, Y;
        if (mode == CollapseMode::f1) {
            X = std::log(c.x[k]) + (e.z + 1.0 / e.nu) * lnL;
            Y = std::log(c.y[k]) + (2.0 * e.beta / e.nu) * lnL;
        } else {
            X = std::log(c.x[k]);
            Y = std::log(c.y[k]) + double(e.d) * lnL;
        }
        pts.emplace_back(X, Y);
    }
    if (pts.size() < 2) throw ConfigError("collapse: curve has fewer than 2 usable points");
    std::sort(pts.begin(), pts.end());
    LogCurve out;
    for (auto& [X, Y] : pts) {
        out.X.push_back(X);
        out.Y.push_back(Y);
    }
    return out;
}

double interp(const LogCurve& c, double X) {
    const auto it = std::upper_bound(c.X.begin(), c.X.end(), X);
    size_t hi = size_t(it - c.X.begin());
    if (hi == 0) hi = 1;
    if (hi == c.X.size()) hi = c.X.size() - 1;
    const size_t lo = hi - 1;
    const double w = (X - c.X[lo]) / (c.X[hi] - c.X[lo]);
    return c.Y[lo] + w * (c.Y[hi] - c.Y[lo]);
}

} // namespace

double collapse_residual(const std::vector<ScalingCurve>& curves, const CriticalExponents& e,
                         CollapseMode mode) {
    e.validate();
    if (curves.size() < 2) throw ConfigError("collapse: need at least 2 curves");
    std::vector<LogCurve> rc;
    rc.reserve(curves.size());
    for (const auto& c : curves) rc.push_back(rescale(c, e, mode));

    double acc = 0.0;
    size_t count = 0;
    for (size_t a = 0; a < rc.size(); ++a)
        for (size_t b = 0; b < rc.size(); ++b) {
            if (a == b) continue;
            for (size_t k = 0; k < rc[a].X.size(); ++k) {
                const double X = rc[a].X[k];
                if (X < rc[b].X.front() || X > rc[b].X.back()) continue;
                const double diff = rc[a].Y[k] - interp(rc[b], X);
                acc += diff * diff;
                ++count;
            }
        }
    if (count == 0)
        throw ConfigError("collapse: rescaled curves have no overlapping support");
    return acc / double(count);
}

ScanResult scan_z(const std::vector<ScalingCurve>& curves, const CriticalExponents& e,
                  CollapseMode mode, const ZGrid& grid, double x_lo, double x_hi) {
    ScanResult out;
    if (mode == CollapseMode::f1) {
        if (!(grid.step > 0 && grid.step <= 0.01 + 1e-12))
            throw ConfigError("scan_z: grid step must be positive and <= 0.01");
        if (!(grid.lo < grid.hi)) throw ConfigError("scan_z: empty grid");
        double best = std::numeric_limits<double>::infinity();
        double worst = 0.0;
        for (double z = grid.lo; z <= grid.hi + 1e-12; z += grid.step) {
            CriticalExponents ez = e;
            ez.z = z;
            const double r = collapse_residual(curves, ez, mode);
            out.z_grid.push_back(z);
            out.residual.push_back(r);
            worst = std::max(worst, r);
            if (r < best) {
                best = r;
                out.z_star = z;
            }
        }
        out.residual_min = best;
        out.flat = (worst / best < 1.05);
        return out;
    }

    // f2: the rescaling has no z; invert the master-curve power law instead.
    std::vector<double> vx, vy;
    for (const auto& c : curves) {
        if (!(c.size_L > 0)) throw ConfigError("collapse: curve without a system size");
        const double Ld = std::pow(c.size_L, double(e.d));
        for (size_t k = 0; k < c.x.size(); ++k) {
            if (c.x[k] < x_lo || c.x[k] > x_hi) continue;
            if (!(c.x[k] > 0 && c.y[k] > 0)) continue;
            vx.push_back(c.x[k]);
            vy.push_back(c.y[k] * Ld);
        }
    }
    const PowerFit pf = fit_power_law(vx, vy); // throws if < 4 points
    const double x_exp = -pf.exponent;
    if (!(x_exp > 0))
        throw NumericError("scan_z(f2): collapsed master curve does not decay with velocity");
    out.z_star = (double(e.d) - 2.0 * e.beta / e.nu) / x_exp - 1.0 / e.nu;
    out.residual_min = 1.0 - pf.r2;
    out.flat = false;
    return out;
}

BootstrapResult scan_z_bootstrap(const std::vector<QuenchEnsembleData>& data,
                                 const CriticalExponents& e, CollapseMode mode,
                                 const ZGrid& grid, int n_resamples, uint64_t seed,
                                 double x_lo, double x_hi) {
    if (n_resamples < 2) throw ConfigError("bootstrap: need at least 2 resamples");
    const uint64_t salt = salt_from_tag("bootstrap-resample");

    auto build_curves = [&](int b) {
        // b < 0: the full sample (point estimate); b >= 0: resample index b
        std::vector<ScalingCurve> curves;
        for (size_t ci = 0; ci < data.size(); ++ci) {
            const auto& d = data[ci];
            ScalingCurve c;
            c.size_L = d.size_L;
            for (size_t vi = 0; vi < d.velocity.size(); ++vi) {
                const auto& fin = d.abar_final[vi];
                if (fin.empty()) throw ConfigError("bootstrap: empty trajectory set");
                const size_t n = fin.size();
                double m2 = 0.0;
                if (b < 0) {
                    for (double a : fin) m2 += a * a;
                } else {
                    NoiseStream st(seed, (uint64_t(ci) << 32) | vi,
                                   salt ^ uint64_t(b));
                    for (size_t k = 0; k < n; ++k) {
                        const double u01 = st.uniforms(k)[1]; // in [0,1)
                        const double a = fin[size_t(u01 * double(n))];
                        m2 += a * a;
                    }
                }
                c.x.push_back(d.velocity[vi]);
                c.y.push_back(m2 / double(n));
            }
            curves.push_back(std::move(c));
        }
        return curves;
    };

    BootstrapResult out;
    out.n_resamples = n_resamples;
    out.z_star = scan_z(build_curves(-1), e, mode, grid, x_lo, x_hi).z_star;

    std::vector<double> zs;
    int flats = 0;
    for (int b = 0; b < n_resamples; ++b) {
        const ScanResult r = scan_z(build_curves(b), e, mode, grid, x_lo, x_hi);
        zs.push_back(r.z_star);
        if (r.flat) ++flats;
    }
    std::sort(zs.begin(), zs.end());
    const auto q = [&](double p) {
        const double idx = p * double(zs.size() - 1);
        return zs[size_t(std::llround(idx))];
    };
    out.ci_lo = q(0.025);
    out.ci_hi = q(0.975);
    out.flat_fraction = double(flats) / double(n_resamples);
    return out;
}

GapPowerLaw gap_power_law(const std::vector<GapPoint>& pts, double g_c, double nu,
                          double regime_cutoff) {
    std::vector<double> dx, dy;
    for (const auto& p : pts) {
        const double arg = std::pow(p.size_L, 1.0 / nu) * (p.g - g_c);
        if (arg < regime_cutoff) {
            dx.push_back(std::abs(p.g - g_c));
            dy.push_back(p.lambda);
        }
    }
    if (dx.size() < 4)
        throw ConfigError("gap_power_law: fewer than 4 points inside the scaling regime");
    const PowerFit f = fit_power_law(dx, dy);
    GapPowerLaw out;
    out.slope = f.exponent;
    out.se_slope = f.se_exponent;
    out.r2 = f.r2;
    out.n_used = f.n_used;
    return out;
}

std::optional<double> binder_crossing(const std::vector<double>& x,
                                      const std::vector<double>& ub_small,
                                      const std::vector<double>& ub_large) {
    if (x.size() != ub_small.size() || x.size() != ub_large.size() || x.size() < 2)
        throw ConfigError("binder_crossing: bad input sizes");
    for (size_t k = 1; k < x.size(); ++k) {
        const double d0 = ub_small[k - 1] - ub_large[k - 1];
        const double d1 = ub_small[k] - ub_large[k];
        if (d0 == 0.0) return x[k - 1];
        if (d0 * d1 < 0.0) {
            const double w = d0 / (d0 - d1);
            return x[k - 1] + w * (x[k] - x[k - 1]);
        }
    }
    return std::nullopt;
}

} // namespace kerrlat
