#include "kerrlat/record.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "kerrlat/errors.hpp"

namespace kerrlat {

EnsembleRecord reduce_series(const EnsembleSeries& s) {
    const int n = s.n_traj();
    if (n < 2) throw ConfigError("reduce_series: need at least 2 trajectories");
    const size_t m = s.t.size();
    for (const auto& row : s.abar)
        if (row.size() != m) throw ConfigError("reduce_series: ragged abar rows");
    for (const auto& row : s.nk0)
        if (row.size() != m) throw ConfigError("reduce_series: ragged nk0 rows");

    EnsembleRecord r;
    r.t = s.t;
    r.n_traj = n;
    r.mean.resize(m);
    r.m2.resize(m);
    r.m4.resize(m);
    r.nk0.resize(m);
    r.se_mean.resize(m);
    r.se_m2.resize(m);

    for (size_t k = 0; k < m; ++k) {
        double s1 = 0, s2 = 0, s4 = 0, sn = 0;
        for (int i = 0; i < n; ++i) {
            const double a = s.abar[size_t(i)][k];
            const double a2 = a * a;
            s1 += a;
            s2 += a2;
            s4 += a2 * a2;
            sn += s.nk0[size_t(i)][k];
        }
        const double inv = 1.0 / n;
        r.mean[k] = s1 * inv;
        r.m2[k] = s2 * inv;
        r.m4[k] = s4 * inv;
        r.nk0[k] = sn * inv;
        double var1 = 0, var2 = 0;
        for (int i = 0; i < n; ++i) {
            const double a = s.abar[size_t(i)][k];
            const double d1 = a - r.mean[k];
            const double d2 = a * a - r.m2[k];
            var1 += d1 * d1;
            var2 += d2 * d2;
        }
        const double corr = 1.0 / (double(n) * double(n - 1));
        r.se_mean[k] = std::sqrt(var1 * corr);
        r.se_m2[k] = std::sqrt(var2 * corr);
    }
    return r;
}

namespace {

void append_number(std::string& out, double x) {
    char buf[32];
    const auto res = std::to_chars(buf, buf + sizeof buf, x);
    out.append(buf, res.ptr);
}

double parse_number(const std::string& tok) {
    double x = 0;
    const auto res = std::from_chars(tok.data(), tok.data() + tok.size(), x);
    if (res.ec != std::errc()) throw ConfigError("csv: bad number '" + tok + "'");
    return x;
}

} // namespace

void write_record_csv(const std::string& path, const EnsembleRecord& r) {
    std::string out = "time,mean,m2,m4,nk0,stderr_mean,stderr_m2,n_traj\n";
    for (size_t k = 0; k < r.t.size(); ++k) {
        append_number(out, r.t[k]);
        out += ',';
        append_number(out, r.mean[k]);
        out += ',';
        append_number(out, r.m2[k]);
        out += ',';
        append_number(out, r.m4[k]);
        out += ',';
        append_number(out, r.nk0[k]);
        out += ',';
        append_number(out, r.se_mean[k]);
        out += ',';
        append_number(out, r.se_m2[k]);
        out += ',';
        out += std::to_string(r.n_traj);
        out += '\n';
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << out;
    if (!f) throw ConfigError("write failed: " + path);
}

EnsembleRecord read_record_csv(const std::string& path) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "time,mean,m2,m4,nk0,stderr_mean,stderr_m2,n_traj")
        throw ConfigError("csv: unexpected header in " + path);
    EnsembleRecord r;
    while (std::getline(f, line)) {
        if (line.empty()) continue;
        std::stringstream ss(line);
        std::string tok;
        std::vector<double> vals;
        while (std::getline(ss, tok, ',')) vals.push_back(parse_number(tok));
        if (vals.size() != 8) throw ConfigError("csv: wrong column count in " + path);
        r.t.push_back(vals[0]);
        r.mean.push_back(vals[1]);
        r.m2.push_back(vals[2]);
        r.m4.push_back(vals[3]);
        r.nk0.push_back(vals[4]);
        r.se_mean.push_back(vals[5]);
        r.se_m2.push_back(vals[6]);
        r.n_traj = int(vals[7]);
    }
    return r;
}

void write_csv(const std::string& path, const std::vector<std::string>& header,
               const std::vector<std::vector<double>>& rows) {
    std::string out;
    for (size_t i = 0; i < header.size(); ++i) {
        out += header[i];
        out += (i + 1 < header.size()) ? ',' : '\n';
    }
    for (const auto& row : rows) {
        if (row.size() != header.size()) throw ConfigError("csv: ragged row");
        for (size_t i = 0; i < row.size(); ++i) {
            append_number(out, row[i]);
            out += (i + 1 < row.size()) ? ',' : '\n';
        }
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << out;
    if (!f) throw ConfigError("write failed: " + path);
}

} // namespace kerrlat
