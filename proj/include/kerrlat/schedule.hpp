#pragma once
// Drive-amplitude schedule: either a hold at fixed G or a linear ramp
// G(t) = g_start + (g_end - g_start) * t / duration, clamped at the endpoint.
#include <algorithm>
#include <cmath>

namespace kerrlat {

struct Schedule {
    double g_start = 0.0;
    double g_end = 0.0;
    double duration = 0.0;

    static Schedule hold(double g, double T) { return {g, g, T}; }
    static Schedule ramp(double g0, double g1, double T) { return {g0, g1, T}; }

    double g_at(double t) const {
        if (duration <= 0.0) return g_end;
        const double f = std::clamp(t / duration, 0.0, 1.0);
        return g_start + (g_end - g_start) * f;
    }

    // Signed sweep rate dG/dt (0 for a hold).
    double velocity() const {
        return duration > 0.0 ? (g_end - g_start) / duration : 0.0;
    }
};

} // namespace kerrlat
