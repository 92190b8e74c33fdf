#include "kerrlat/gaussian_state.hpp"

#include "kerrlat/errors.hpp"

namespace kerrlat {

namespace {

// Pairwise contraction preserving operator order (l appears left of r).
cplx contraction(const GaussianTrajectoryState& s, const LadderOp& l, const LadderOp& r) {
    if (!l.dag && !r.dag) return s.u(l.site, r.site);
    if (l.dag && r.dag) return std::conj(s.u(l.site, r.site));
    if (l.dag && !r.dag) return s.v(l.site, r.site);
    // a_i a_j^dag = a_j^dag a_i + delta_ij
    return s.v(r.site, l.site) + (l.site == r.site ? 1.0 : 0.0);
}

cplx mean(const GaussianTrajectoryState& s, const LadderOp& o) {
    return o.dag ? std::conj(s.alpha(o.site)) : s.alpha(o.site);
}

// Sum over all ways of splitting the remaining operators into singletons
// (-> displacement) and ordered pairs (-> central covariance).
cplx wick_sum(const GaussianTrajectoryState& s, const std::vector<LadderOp>& ops,
              unsigned used) {
    const int n = int(ops.size());
    int first = -1;
    for (int i = 0; i < n; ++i)
        if (!(used & (1u << i))) {
            first = i;
            break;
        }
    if (first < 0) return 1.0;

    cplx total = mean(s, ops[size_t(first)]) * wick_sum(s, ops, used | (1u << first));
    for (int j = first + 1; j < n; ++j) {
        if (used & (1u << j)) continue;
        total += contraction(s, ops[size_t(first)], ops[size_t(j)]) *
                 wick_sum(s, ops, used | (1u << first) | (1u << j));
    }
    return total;
}

} // namespace

cplx gaussian_moment(const GaussianTrajectoryState& s, const std::vector<LadderOp>& ops) {
    if (ops.size() > 16) throw ConfigError("gaussian_moment: too many operators");
    for (const auto& o : ops)
        if (o.site < 0 || o.site >= s.n())
            throw ConfigError("gaussian_moment: site index out of range");
    return wick_sum(s, ops, 0u);
}

double order_parameter(const GaussianTrajectoryState& s) {
    return s.alpha.mean().imag();
}

double mode_occupation_k0(const GaussianTrajectoryState& s) {
    const double n = double(s.n());
    const cplx asum = s.alpha.sum();
    return (s.v.sum().real() + std::norm(asum)) / n;
}

} // namespace kerrlat
