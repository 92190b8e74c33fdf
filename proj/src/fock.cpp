#include "kerrlat/fock.hpp"

#include <cmath>
#include <unsupported/Eigen/MatrixFunctions>

#include "kerrlat/errors.hpp"

namespace kerrlat {

namespace {
constexpr cplx kI(0.0, 1.0);
}

Mat fock_annihilation(int n_max) {
    const int d = n_max + 1;
    Mat a = Mat::Zero(d, d);
    for (int n = 1; n < d; ++n) a(n - 1, n) = std::sqrt(double(n));
    return a;
}

Mat kron(const Mat& A, const Mat& B) {
    Mat out(A.rows() * B.rows(), A.cols() * B.cols());
    for (Eigen::Index i = 0; i < A.rows(); ++i)
        for (Eigen::Index j = 0; j < A.cols(); ++j)
            out.block(i * B.rows(), j * B.cols(), B.rows(), B.cols()) = A(i, j) * B;
    return out;
}

FockSite FockSite::make(const ModelParams& p, int n_max) {
    FockSite f;
    f.n_max = n_max;
    f.a = fock_annihilation(n_max);
    const Mat ad = f.a.adjoint();
    f.num = ad * f.a;
    // -Delta n + (U/2) a^dag^2 a^2
    f.h0 = -p.delta * f.num + 0.5 * p.u_kerr * (ad * ad * f.a * f.a);
    f.hdrive = 0.5 * (ad * ad + f.a * f.a);
    return f;
}

FockPair FockPair::make(const ModelParams& p, int n_max) {
    FockPair f;
    f.n_max = n_max;
    const int d = n_max + 1;
    const Mat a = fock_annihilation(n_max);
    const Mat id = Mat::Identity(d, d);
    f.a1 = kron(a, id);
    f.a2 = kron(id, a);
    const Mat ad1 = f.a1.adjoint(), ad2 = f.a2.adjoint();
    f.h0 = -p.delta * (ad1 * f.a1 + ad2 * f.a2) +
           0.5 * p.u_kerr * (ad1 * ad1 * f.a1 * f.a1 + ad2 * ad2 * f.a2 * f.a2) -
           p.j_hop * (ad1 * f.a2 + ad2 * f.a1);
    f.hdrive = 0.5 * (ad1 * ad1 + f.a1 * f.a1 + ad2 * ad2 + f.a2 * f.a2);
    return f;
}

Mat liouvillian_matrix(const Mat& H, const std::vector<Mat>& cs) {
    const Eigen::Index d = H.rows();
    const Mat id = Mat::Identity(d, d);
    // vec(A rho B) = (B^T kron A) vec(rho), column stacking
    Mat L = -kI * (kron(id, H) - kron(H.transpose(), id));
    for (const Mat& c : cs) {
        const Mat cdc = c.adjoint() * c;
        L += kron(c.conjugate(), c) - 0.5 * kron(id, cdc) - 0.5 * kron(cdc.transpose(), id);
    }
    return L;
}

Mat steady_state(const Mat& L_super) {
    const Eigen::Index d2 = L_super.rows();
    const auto d = Eigen::Index(std::llround(std::sqrt(double(d2))));
    if (d * d != d2) throw ConfigError("superoperator dimension is not a perfect square");
    // replace one equation by the trace-normalization row
    Mat M = L_super;
    Vec rhs = Vec::Zero(d2);
    M.row(0).setZero();
    for (Eigen::Index k = 0; k < d; ++k) M(0, k * d + k) = 1.0;
    rhs(0) = 1.0;
    const Vec x = M.partialPivLu().solve(rhs);
    Mat rho = Eigen::Map<const Mat>(x.data(), d, d);
    // tidy up Hermiticity lost to roundoff
    rho = 0.5 * (rho + rho.adjoint()).eval();
    return rho;
}

double spectral_gap(const Mat& L_super, double zero_tol) {
    Eigen::ComplexEigenSolver<Mat> es(L_super, /*computeEigenvectors=*/false);
    double gap = std::numeric_limits<double>::infinity();
    for (Eigen::Index k = 0; k < es.eigenvalues().size(); ++k) {
        const double re = es.eigenvalues()(k).real();
        if (-re > zero_tol) gap = std::min(gap, -re);
    }
    if (!std::isfinite(gap)) throw NumericError("no decaying mode found in spectrum");
    return gap;
}

DecayFitResult decay_gap(const Mat& L_super, const Mat& rho0, const Mat& obs, double dt,
                         double t_min, double t_max) {
    if (dt <= 0 || t_max <= t_min) throw ConfigError("decay_gap: bad time window");
    const Mat P = (L_super * dt).exp();
    const Eigen::Index d = rho0.rows();
    Vec r = Eigen::Map<const Vec>(rho0.data(), d * d);

    std::vector<double> ts;
    std::vector<cplx> ms;
    const int n_steps = int(std::llround(t_max / dt));
    for (int k = 0; k <= n_steps; ++k) {
        const double t = k * dt;
        if (t >= t_min) {
            const Mat rho = Eigen::Map<const Mat>(r.data(), d, d);
            const cplx m = (obs * rho).trace();
            if (std::abs(m) > 1e-14) {
                ts.push_back(t);
                ms.push_back(m);
            }
        }
        if (k < n_steps) r = P * r;
    }
    if (ts.size() < 4) throw NumericError("decay_gap: too few usable points in window");

    // complex linear LS on log m(t) = c + s t; lambda = -Re s.
    // unwrap the phase so log is continuous
    std::vector<cplx> lnm(ms.size());
    double prev_ph = std::arg(ms[0]);
    double wind = 0.0;
    for (size_t k = 0; k < ms.size(); ++k) {
        double ph = std::arg(ms[k]);
        if (k > 0) {
            while (ph + wind - prev_ph > M_PI) wind -= 2 * M_PI;
            while (ph + wind - prev_ph < -M_PI) wind += 2 * M_PI;
        }
        prev_ph = ph + wind;
        lnm[k] = cplx(std::log(std::abs(ms[k])), prev_ph);
    }
    const double n = double(ts.size());
    double st = 0, stt = 0;
    cplx sy(0, 0), sty(0, 0);
    for (size_t k = 0; k < ts.size(); ++k) {
        st += ts[k];
        stt += ts[k] * ts[k];
        sy += lnm[k];
        sty += ts[k] * lnm[k];
    }
    const double denom = n * stt - st * st;
    const cplx slope = (n * sty - st * sy) / denom;
    const cplx icept = (sy - slope * st) / n;

    double ss_res = 0, ss_tot = 0;
    const cplx ybar = sy / n;
    for (size_t k = 0; k < ts.size(); ++k) {
        ss_res += std::norm(lnm[k] - (icept + slope * ts[k]));
        ss_tot += std::norm(lnm[k] - ybar);
    }
    DecayFitResult out;
    out.lambda = -slope.real();
    out.freq = slope.imag();
    out.r2 = ss_tot > 0 ? 1.0 - ss_res / ss_tot : 1.0;
    return out;
}

Mat propagate(const Mat& L_super, const Mat& rho0, double T, double dt) {
    const Mat P = (L_super * dt).exp();
    const Eigen::Index d = rho0.rows();
    Vec r = Eigen::Map<const Vec>(rho0.data(), d * d);
    const int n_steps = int(std::llround(T / dt));
    for (int k = 0; k < n_steps; ++k) r = P * r;
    const double rem = T - n_steps * dt;
    if (std::abs(rem) > 1e-12) r = ((L_super * rem).exp() * r).eval();
    return Eigen::Map<const Mat>(r.data(), d, d);
}

Mat coherent_dm(int n_max, cplx beta) {
    const int d = n_max + 1;
    Vec psi(d);
    cplx c = 1.0;
    psi(0) = c;
    for (int n = 1; n < d; ++n) {
        c *= beta / std::sqrt(double(n));
        psi(n) = c;
    }
    psi *= std::exp(-0.5 * std::norm(beta));
    psi /= psi.norm();
    return psi * psi.adjoint();
}

SseSamples fock_sse_trajectory(const Mat& H0, const Mat& Hdrive, const Schedule& sched,
                               const std::vector<Mat>& site_a, double gamma, Vec psi0,
                               const std::vector<double>& sample_times,
                               const NoiseStream& noise, const SseOptions& opt) {
    const int n_sites = int(site_a.size());
    const Eigen::Index d = psi0.size();
    const double sg = std::sqrt(gamma);

    std::vector<Mat> c(site_a.begin(), site_a.end());
    std::vector<Mat> cdc(static_cast<size_t>(n_sites));
    for (int j = 0; j < n_sites; ++j) {
        c[size_t(j)] *= sg;
        cdc[size_t(j)] = c[size_t(j)].adjoint() * c[size_t(j)];
    }

    const int64_t n_steps = llround(sched.duration / opt.h);
    std::vector<int64_t> sample_steps;
    for (double ts : sample_times)
        sample_steps.push_back(std::clamp<int64_t>(llround(ts / opt.h), 0, n_steps));

    Vec psi = psi0.normalized();
    SseSamples out;
    Eigen::VectorXd dw(n_sites);
    Vec dpsi(d), cpsi(d);

    auto record = [&]( int64_t k) {
        out.t.push_back(double(k) * opt.h);
        Vec amp(n_sites);
        Mat aa(n_sites, n_sites), ada(n_sites, n_sites);
        std::vector<Vec> apsi(static_cast<size_t>(n_sites));
        for (int j = 0; j < n_sites; ++j) {
            apsi[size_t(j)] = site_a[size_t(j)] * psi;
            amp(j) = psi.dot(apsi[size_t(j)]);
        }
        for (int i = 0; i < n_sites; ++i)
            for (int j = 0; j < n_sites; ++j) {
                aa(i, j) = psi.dot(site_a[size_t(i)] * apsi[size_t(j)]);
                ada(i, j) = apsi[size_t(i)].dot(apsi[size_t(j)]);
            }
        out.amp.push_back(std::move(amp));
        out.mom_aa.push_back(std::move(aa));
        out.mom_ada.push_back(std::move(ada));
    };

    size_t next = 0;
    for (int64_t k = 0; k <= n_steps; ++k) {
        while (next < sample_steps.size() && sample_steps[next] == k) {
            record(k);
            ++next;
        }
        if (k == n_steps) break;
        const double g_t = sched.g_at(double(k) * opt.h);
        noise.fill_normals(uint64_t(k), dw.data(), n_sites, std::sqrt(opt.h),
                           opt.negate_noise);

        // all pieces evaluated at the pre-step state
        dpsi = -kI * (H0 * psi + g_t * (Hdrive * psi));
        Vec dnoise = Vec::Zero(d);
        for (int j = 0; j < n_sites; ++j) {
            cpsi = c[size_t(j)] * psi;
            const double m = 2.0 * psi.dot(cpsi).real(); // <c + c^dag>
            dpsi += -0.5 * (cdc[size_t(j)] * psi) + 0.5 * m * cpsi -
                    0.125 * m * m * psi;
            dnoise += dw(j) * (cpsi - 0.5 * m * psi);
        }
        psi += opt.h * dpsi + dnoise;

        const double nrm = psi.norm();
        const double dev = std::abs(nrm - 1.0);
        out.max_step_norm_dev = std::max(out.max_step_norm_dev, dev);
        out.cum_norm_drift += dev;
        if (dev > opt.step_norm_tol)
            throw NumericError("sse norm deviation " + std::to_string(dev) + " at t=" +
                               std::to_string(double(k) * opt.h));
        if (!psi.allFinite()) throw NumericError("sse state non-finite");
        psi /= nrm;
    }
    return out;
}

} // namespace kerrlat
