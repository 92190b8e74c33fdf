#pragma once
// Per-trajectory Gaussian state: coherent amplitudes alpha_i plus the central
// second moments u_ij = <a_i a_j> - alpha_i alpha_j (symmetric) and
// v_ij = <a_i^dag a_j> - conj(alpha_i) alpha_j (Hermitian, PSD up to noise).
#include <Eigen/Dense>
#include <complex>

#include "kerrlat/model.hpp"

namespace kerrlat {

struct GaussianTrajectoryState {
    Eigen::VectorXcd alpha;
    Eigen::MatrixXcd u; // anomalous covariance, u = u^T exactly (enforced)
    Eigen::MatrixXcd v; // normal covariance, v = v^dag exactly (enforced)

    static GaussianTrajectoryState vacuum(int n_sites) {
        GaussianTrajectoryState s;
        s.alpha = Eigen::VectorXcd::Zero(n_sites);
        s.u = Eigen::MatrixXcd::Zero(n_sites, n_sites);
        s.v = Eigen::MatrixXcd::Zero(n_sites, n_sites);
        return s;
    }

    // Uniform coherent state alpha_i = a0, zero covariances.
    static GaussianTrajectoryState polarized(int n_sites, cplx a0) {
        auto s = vacuum(n_sites);
        s.alpha.setConstant(a0);
        return s;
    }

    int n() const { return int(alpha.size()); }

    // Mirror one triangle onto the other so u = u^T and v = v^dag hold exactly
    // (bitwise), and the diagonal of v is exactly real. Called after every step.
    void enforce_structure() {
        const int m = n();
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < j; ++i) {
                u(j, i) = u(i, j);
                v(j, i) = std::conj(v(i, j));
            }
            v(j, j) = cplx(v(j, j).real(), 0.0);
        }
    }

    double min_v_diagonal() const { return v.diagonal().real().minCoeff(); }

    // Smallest eigenvalue of v (Hermitian); the conditional covariance may dip
    // slightly below zero from integration error but not materially.
    double min_v_eigenvalue() const {
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(v, Eigen::EigenvaluesOnly);
        return es.eigenvalues().minCoeff();
    }

    bool finite() const {
        return alpha.allFinite() && u.allFinite() && v.allFinite();
    }
};

// One normal-ordered ladder operator acting on `site`; dag = creation.
struct LadderOp {
    int site = 0;
    bool dag = false;
};

// Expectation value of an ordered product of up to ~6 ladder operators in the
// Gaussian state, via displaced-Wick contraction. Order is preserved: the
// (a_i, a_j^dag) contraction picks up the +delta_ij commutator term.
cplx gaussian_moment(const GaussianTrajectoryState& s, const std::vector<LadderOp>& ops);

// Order parameter: Im of the site-averaged amplitude.
double order_parameter(const GaussianTrajectoryState& s);

// Zero-momentum occupation (1/N) sum_ij (v_ij + conj(alpha_i) alpha_j).
double mode_occupation_k0(const GaussianTrajectoryState& s);

} // namespace kerrlat
