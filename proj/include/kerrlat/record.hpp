#pragma once
// Ensemble-averaged time series and its CSV representation. The reduction is
// always performed in trajectory-index order so the result is independent of
// how many workers produced the data.
#include <string>
#include <vector>

namespace kerrlat {

// Raw per-trajectory samples on a common time grid: row = trajectory.
struct EnsembleSeries {
    std::vector<double> t;
    std::vector<std::vector<double>> abar; // [traj][sample]
    std::vector<std::vector<double>> nk0;  // [traj][sample]

    int n_traj() const { return int(abar.size()); }
};

struct EnsembleRecord {
    std::vector<double> t;
    std::vector<double> mean;    // <abar>
    std::vector<double> m2;      // <abar^2>
    std::vector<double> m4;      // <abar^4>
    std::vector<double> nk0;     // <n_k0>
    std::vector<double> se_mean; // standard error of <abar>
    std::vector<double> se_m2;   // standard error of <abar^2>
    int n_traj = 0;
};

// Moments + standard errors per sample; requires >= 2 trajectories.
EnsembleRecord reduce_series(const EnsembleSeries& s);

// CSV round-trip. Column layout is fixed:
// time,mean,m2,m4,nk0,stderr_mean,stderr_m2,n_traj
// Numbers are written with shortest round-trip formatting, locale-independent.
void write_record_csv(const std::string& path, const EnsembleRecord& r);
EnsembleRecord read_record_csv(const std::string& path);

// Generic small-table CSV helpers used by the scan outputs.
void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows);

} // namespace kerrlat
