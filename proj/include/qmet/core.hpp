#pragma once

// Moment formalism for 1- and 2-mode bosonic Gaussian states (hbar = 1, vacuum
// covariance I/2, operator order Q1, P1, Q2, P2), the four probe families at
// fixed mode-a energy, and the dissipative channel acting on the moments.

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <complex>
#include <string>

#include "qmet/errors.hpp"

namespace qmet {

using Vec = Eigen::VectorXd;
using Mat = Eigen::MatrixXd;

// Tolerance floors used throughout: double-precision symplectic-eigenvalue
// noise (validity/purity) and structural symmetry slack.
inline constexpr double kNuTol = 1e-10;
inline constexpr double kSymTol = 1e-12;

// theta = (gamma, nbar): damping exponent and bath occupation. z = e^gamma - 1
// is the algebraic variable every closed form is written in.
class ChannelParams {
  public:
    ChannelParams(double gamma, double nbar) : gamma_(gamma), nbar_(nbar) {
        if (!std::isfinite(gamma) || !std::isfinite(nbar) || gamma < 0.0 || nbar < 0.0)
            throw domain_error("ChannelParams: require finite gamma >= 0 and nbar >= 0");
    }

    double gamma() const { return gamma_; }
    double nbar() const { return nbar_; }
    double z() const { return std::expm1(gamma_); }
    double eta() const { return std::exp(-gamma_); }  // transmissivity e^{-gamma}

  private:
    double gamma_;
    double nbar_;
};

enum class ProbeClass { Coherent, Thermal, SingleModeSqueezed, TwoModeSqueezedVacuum };

inline const char* probe_class_name(ProbeClass c) {
    switch (c) {
        case ProbeClass::Coherent: return "coherent";
        case ProbeClass::Thermal: return "thermal";
        case ProbeClass::SingleModeSqueezed: return "squeezed";
        case ProbeClass::TwoModeSqueezedVacuum: return "two-mode";
    }
    return "?";
}

// Omega = direct sum of [[0,1],[-1,0]] blocks; [R^i, R^j] = i Omega^{ij}.
inline Mat symplectic_form(int num_modes) {
    Mat omega = Mat::Zero(2 * num_modes, 2 * num_modes);
    for (int k = 0; k < num_modes; ++k) {
        omega(2 * k, 2 * k + 1) = 1.0;
        omega(2 * k + 1, 2 * k) = -1.0;
    }
    return omega;
}

struct GaussianState {
    GaussianState(Vec mean_in, Mat cov_in) : mean(std::move(mean_in)), cov(std::move(cov_in)) {
        const auto n = mean.size();
        if ((n != 2 && n != 4) || cov.rows() != n || cov.cols() != n)
            throw domain_error("GaussianState: mean/cov must describe 1 or 2 modes");
        if (!mean.allFinite() || !cov.allFinite())
            throw domain_error("GaussianState: non-finite moments");
        const double scale = std::max(1.0, cov.cwiseAbs().maxCoeff());
        if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > kSymTol * scale)
            throw domain_error("GaussianState: covariance not symmetric");
        cov = ((cov + cov.transpose()) / 2.0).eval();
    }

    int num_modes() const { return static_cast<int>(mean.size()) / 2; }

    Vec mean;
    Mat cov;
};

struct StateDiagnostics {
    Vec nu;      // symplectic eigenvalues, ascending, one per mode
    bool valid;  // nu_min >= 1/2 - 1e-10 (Heisenberg)
    bool pure;   // |nu_k - 1/2| <= 1e-10 for all k
};

// nu_k = |eig(i Omega Sigma)|, each value appearing twice; we report one copy
// per mode. Diagnostics are always returned, never thrown.
inline StateDiagnostics validate_state(const GaussianState& state) {
    const int m = state.num_modes();
    const Eigen::MatrixXcd w =
        std::complex<double>(0.0, 1.0) * symplectic_form(m) * state.cov;
    Eigen::ComplexEigenSolver<Eigen::MatrixXcd> es(w, /*computeEigenvectors=*/false);
    Eigen::VectorXd mags = es.eigenvalues().cwiseAbs();
    std::sort(mags.data(), mags.data() + mags.size());
    StateDiagnostics d;
    d.nu = Vec(m);
    for (int k = 0; k < m; ++k) d.nu(k) = (mags(2 * k) + mags(2 * k + 1)) / 2.0;
    d.valid = d.nu.minCoeff() >= 0.5 - kNuTol;
    d.pure = ((d.nu.array() - 0.5).abs() <= kNuTol).all();
    return d;
}

// The unique phase-standard probe of each class with tr[rho a^dag a] = n in
// mode a. Squeezing parameters are resolved algebraically (cosh 2r0 = 2n+1 for
// single-mode squeezing, sinh^2 r0 = n for the two-mode vacuum) to avoid
// trig round trips.
inline GaussianState make_probe(ProbeClass c, double n) {
    if (!std::isfinite(n) || n < 0.0)
        throw domain_error("make_probe: require finite n >= 0");
    switch (c) {
        case ProbeClass::Coherent: {
            Vec mean(2);
            mean << std::sqrt(2.0 * n), 0.0;
            return GaussianState(mean, Mat::Identity(2, 2) / 2.0);
        }
        case ProbeClass::Thermal:
            return GaussianState(Vec::Zero(2), (2.0 * n + 1.0) / 2.0 * Mat::Identity(2, 2));
        case ProbeClass::SingleModeSqueezed: {
            const double e2r = 2.0 * n + 1.0 + 2.0 * std::sqrt(n * (n + 1.0));
            Mat cov = Mat::Zero(2, 2);
            cov(0, 0) = e2r / 2.0;
            cov(1, 1) = 1.0 / (2.0 * e2r);
            return GaussianState(Vec::Zero(2), cov);
        }
        case ProbeClass::TwoModeSqueezedVacuum: {
            const double c2r = 2.0 * n + 1.0;
            const double s2r = 2.0 * std::sqrt(n * (n + 1.0));
            Mat cov = Mat::Zero(4, 4);
            cov.block<2, 2>(0, 0) = c2r / 2.0 * Mat::Identity(2, 2);
            cov.block<2, 2>(2, 2) = c2r / 2.0 * Mat::Identity(2, 2);
            cov(0, 2) = cov(2, 0) = -s2r / 2.0;
            cov(1, 3) = cov(3, 1) = s2r / 2.0;
            return GaussianState(Vec::Zero(4), cov);
        }
    }
    throw domain_error("make_probe: unknown class");
}

// Dissipative channel on mode a (the first mode), identity on the ancilla:
// mean_a -> e^{-gamma/2} mean_a, Sigma_aa -> e^{-gamma} Sigma_aa +
// (1-e^{-gamma})(N+1/2) I, cross block -> e^{-gamma/2} cross.
inline GaussianState apply_channel(const GaussianState& state, const ChannelParams& theta) {
    if (!validate_state(state).valid)
        throw domain_error("apply_channel: input state violates the Heisenberg bound");
    const double eta = theta.eta();
    const double seta = std::sqrt(eta);
    Vec mean = state.mean;
    Mat cov = state.cov;
    mean.head<2>() *= seta;
    cov.block<2, 2>(0, 0) =
        (eta * cov.block<2, 2>(0, 0) + (1.0 - eta) * (theta.nbar() + 0.5) * Mat::Identity(2, 2))
            .eval();
    if (state.num_modes() == 2) {
        cov.block<2, 2>(0, 2) *= seta;
        cov.block<2, 2>(2, 0) *= seta;
    }
    return GaussianState(std::move(mean), std::move(cov));
}

// tr[rho a^dag a] = (Sigma_QQ + Sigma_PP - 1)/2 + (<Q>^2 + <P>^2)/2
inline double mean_photon_number(const GaussianState& state, int mode) {
    if (mode < 0 || mode >= state.num_modes())
        throw domain_error("mean_photon_number: mode index out of range");
    const int k = 2 * mode;
    return (state.cov(k, k) + state.cov(k + 1, k + 1) - 1.0) / 2.0 +
           (state.mean(k) * state.mean(k) + state.mean(k + 1) * state.mean(k + 1)) / 2.0;
}

// Single-mode phase-space rotation of one mode (a passive symplectic map);
// the channel commutes with it on mode a.
inline GaussianState apply_phase_shift(const GaussianState& state, int mode, double phi) {
    if (mode < 0 || mode >= state.num_modes())
        throw domain_error("apply_phase_shift: mode index out of range");
    Mat s = Mat::Identity(2 * state.num_modes(), 2 * state.num_modes());
    const int k = 2 * mode;
    s(k, k) = std::cos(phi);
    s(k, k + 1) = std::sin(phi);
    s(k + 1, k) = -std::sin(phi);
    s(k + 1, k + 1) = std::cos(phi);
    return GaussianState(s * state.mean, s * state.cov * s.transpose());
}

// Channel outputs of the standard probes take the two-mode standard form
// [[a I, c Z], [c Z, b I]] with Z = diag(1,-1).
struct StandardForm {
    double a, b, c;
};

inline StandardForm two_mode_standard_form(const GaussianState& state) {
    if (state.num_modes() != 2)
        throw domain_error("two_mode_standard_form: need a 2-mode state");
    return StandardForm{state.cov(0, 0), state.cov(2, 2),
                        (state.cov(1, 3) - state.cov(0, 2)) / 2.0};
}

}  // namespace qmet
