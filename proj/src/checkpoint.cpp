#include "kerrlat/checkpoint.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "kerrlat/errors.hpp"

namespace kerrlat {

std::string hexfloat(double x) {
    char buf[40];
    snprintf(buf, sizeof buf, "%a", x);
    return buf;
}

double parse_hexfloat(const std::string& tok) {
    char* end = nullptr;
    const double x = std::strtod(tok.c_str(), &end);
    if (end == tok.c_str()) throw ConfigError("checkpoint: bad number '" + tok + "'");
    return x;
}

namespace {

void write_doubles(std::string& out, const double* p, size_t n) {
    char buf[40];
    for (size_t k = 0; k < n; ++k) {
        snprintf(buf, sizeof buf, "%a", p[k]);
        out += buf;
        out += (k + 1 < n) ? ' ' : '\n';
    }
    if (n == 0) out += '\n';
}

std::vector<double> read_doubles(std::istream& in, size_t n) {
    std::string line;
    if (!std::getline(in, line)) throw ConfigError("checkpoint: truncated file");
    std::vector<double> out;
    out.reserve(n);
    const char* p = line.c_str();
    char* end = nullptr;
    for (size_t k = 0; k < n; ++k) {
        const double x = std::strtod(p, &end);
        if (end == p) throw ConfigError("checkpoint: expected " + std::to_string(n) +
                                        " numbers, got " + std::to_string(k));
        out.push_back(x);
        p = end;
    }
    return out;
}

std::string expect_kv(std::istream& in, const std::string& key) {
    std::string line;
    if (!std::getline(in, line) || line.rfind(key + ' ', 0) != 0)
        throw ConfigError("checkpoint: expected '" + key + "' line");
    return line.substr(key.size() + 1);
}

void write_complex_block(std::string& out, const Eigen::MatrixXcd& m) {
    // row by row, interleaved re/im
    std::vector<double> row(size_t(m.cols()) * 2);
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        for (Eigen::Index j = 0; j < m.cols(); ++j) {
            row[size_t(j) * 2] = m(i, j).real();
            row[size_t(j) * 2 + 1] = m(i, j).imag();
        }
        write_doubles(out, row.data(), row.size());
    }
}

void read_complex_block(std::istream& in, Eigen::MatrixXcd& m) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
        const auto row = read_doubles(in, size_t(m.cols()) * 2);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            m(i, j) = cplx(row[size_t(j) * 2], row[size_t(j) * 2 + 1]);
    }
}

} // namespace

void save_states(const std::string& path, const StatesFile& sf) {
    std::string out = "kerrlat-states v1\n";
    char buf[64];
    snprintf(buf, sizeof buf, "hash %016" PRIx64 "\n", sf.hash);
    out += buf;
    out += "stage " + sf.stage + "\n";
    out += "n_states " + std::to_string(sf.states.size()) + "\n";
    const int n = sf.states.empty() ? 0 : sf.states.front().n();
    out += "n_sites " + std::to_string(n) + "\n";
    for (const auto& s : sf.states) {
        if (s.n() != n) throw ConfigError("save_states: inconsistent state sizes");
        std::vector<double> a(size_t(n) * 2);
        for (int j = 0; j < n; ++j) {
            a[size_t(j) * 2] = s.alpha(j).real();
            a[size_t(j) * 2 + 1] = s.alpha(j).imag();
        }
        write_doubles(out, a.data(), a.size());
        write_complex_block(out, s.u);
        write_complex_block(out, s.v);
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open for writing: " + path);
    f << out;
    if (!f) throw ConfigError("write failed: " + path);
}

StatesFile load_states(const std::string& path, uint64_t expect_hash) {
    std::ifstream f(path, std::ios::binary);
    if (!f) throw ConfigError("cannot open: " + path);
    std::string line;
    if (!std::getline(f, line) || line != "kerrlat-states v1")
        throw ConfigError("not a states file: " + path);
    StatesFile sf;
    sf.hash = std::strtoull(expect_kv(f, "hash").c_str(), nullptr, 16);
    if (expect_hash != 0 && sf.hash != expect_hash)
        throw ConfigError("states file was produced by a different configuration: " + path);
    sf.stage = expect_kv(f, "stage");
    const size_t n_states = std::stoull(expect_kv(f, "n_states"));
    const int n = std::stoi(expect_kv(f, "n_sites"));
    sf.states.reserve(n_states);
    for (size_t k = 0; k < n_states; ++k) {
        GaussianTrajectoryState s = GaussianTrajectoryState::vacuum(n);
        const auto a = read_doubles(f, size_t(n) * 2);
        for (int j = 0; j < n; ++j) s.alpha(j) = cplx(a[size_t(j) * 2], a[size_t(j) * 2 + 1]);
        read_complex_block(f, s.u);
        read_complex_block(f, s.v);
        sf.states.push_back(std::move(s));
    }
    return sf;
}

void save_progress(const std::string& path, const ProgressFile& pf) {
    std::string out = "kerrlat-progress v1\n";
    char buf[64];
    snprintf(buf, sizeof buf, "hash %016" PRIx64 "\n", pf.hash);
    out += buf;
    out += "stage " + pf.stage + "\n";
    out += "n_samples " + std::to_string(pf.t.size()) + "\n";
    out += "n_done " + std::to_string(pf.traj_index.size()) + "\n";
    write_doubles(out, pf.t.data(), pf.t.size());
    for (size_t k = 0; k < pf.traj_index.size(); ++k) {
        out += "traj " + std::to_string(pf.traj_index[k]) + "\n";
        write_doubles(out, pf.abar[k].data(), pf.abar[k].size());
        write_doubles(out, pf.nk0[k].data(), pf.nk0[k].size());
    }
    const std::string tmp = path + ".tmp";
    {
        std::ofstream f(tmp, std::ios::binary);
        if (!f) throw ConfigError("cannot open for writing: " + tmp);
        f << out;
        if (!f) throw ConfigError("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw ConfigError("cannot replace progress file: " + path);
}

std::optional<ProgressFile> load_progress(const std::string& path, uint64_t expect_hash) {
    std::ifstream f(path, std::ios::binary);
    if (!f) return std::nullopt;
    std::string line;
    if (!std::getline(f, line) || line != "kerrlat-progress v1")
        throw ConfigError("not a progress file: " + path);
    ProgressFile pf;
    pf.hash = std::strtoull(expect_kv(f, "hash").c_str(), nullptr, 16);
    if (expect_hash != 0 && pf.hash != expect_hash)
        throw ConfigError("progress file belongs to a different configuration: " + path);
    pf.stage = expect_kv(f, "stage");
    const size_t n_samples = std::stoull(expect_kv(f, "n_samples"));
    const size_t n_done = std::stoull(expect_kv(f, "n_done"));
    pf.t = read_doubles(f, n_samples);
    for (size_t k = 0; k < n_done; ++k) {
        pf.traj_index.push_back(std::stoi(expect_kv(f, "traj")));
        pf.abar.push_back(read_doubles(f, n_samples));
        pf.nk0.push_back(read_doubles(f, n_samples));
    }
    return pf;
}

} // namespace kerrlat
