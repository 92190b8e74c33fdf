#pragma once
// Text checkpoints with hexfloat numbers: bit-exact round trip, portable
// across runs of the same binary. Two kinds: prepared-ensemble state caches
// (the expensive burn-in artifact) and per-run progress files listing the
// trajectories already finished, so an interrupted scan resumes by
// recomputing only what is missing — with identical results, since every
// trajectory's noise is a pure function of (seed, index, stage).
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "kerrlat/gaussian_state.hpp"

namespace kerrlat {

std::string hexfloat(double x);
double parse_hexfloat(const std::string& tok);

struct StatesFile {
    uint64_t hash = 0;     // config hash the states belong to
    std::string stage;     // producing stage tag
    std::vector<GaussianTrajectoryState> states;
};

void save_states(const std::string& path, const StatesFile& sf);
// Throws ConfigError if the file's hash does not match `expect_hash`
// (pass 0 to skip the check).
StatesFile load_states(const std::string& path, uint64_t expect_hash);

// Progress of one ensemble run: per finished trajectory, its sampled rows.
struct ProgressFile {
    uint64_t hash = 0;
    std::string stage;
    std::vector<double> t;
    std::vector<int> traj_index;
    std::vector<std::vector<double>> abar;
    std::vector<std::vector<double>> nk0;
};

void save_progress(const std::string& path, const ProgressFile& pf);
std::optional<ProgressFile> load_progress(const std::string& path, uint64_t expect_hash);

} // namespace kerrlat
