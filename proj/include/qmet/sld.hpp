#pragma once

// Symmetric logarithmic derivatives for the two-parameter Gaussian channel
// family, as quadratic observables L = c 1 + v_k R^k + M_{kl} R^k o R^l built
// from the generator matrices alpha_mu, a direct dense inversion of the
// superoperator D[A] = Sigma~^T A Sigma~ - A/4, and Gaussian (Wick)
// expectations of operator products. Produces the full 2x2 QFI matrix and the
// commutator expectation tr[rho [L_gamma, L_nbar]] for arbitrary 1- or 2-mode
// Gaussian probes.

#include <Eigen/Dense>

#include <cmath>
#include <complex>

#include "qmet/core.hpp"
#include "qmet/errors.hpp"
#include "qmet/yields.hpp"

namespace qmet {

using CMat = Eigen::MatrixXcd;
using CVec = Eigen::VectorXcd;
using Complex = std::complex<double>;

// Outputs with a symplectic eigenvalue closer than this to 1/2 make D's
// condition number exceed ~1e8; such solves are rejected, not returned noisy.
inline constexpr double kNearPureGate = 1e-8;

struct QuadraticObservable {
    Complex constant;
    CVec linear;
    CMat quadratic;  // complex symmetric (not Hermitian) by construction

    int dim() const { return static_cast<int>(linear.size()); }

    // Largest imaginary part across all coefficients; a valid SLD is Hermitian,
    // so this is roundoff-sized.
    double max_imag() const {
        double m = std::abs(constant.imag());
        m = std::max(m, linear.imag().cwiseAbs().maxCoeff());
        m = std::max(m, quadratic.imag().cwiseAbs().maxCoeff());
        return m;
    }
};

// Generators of the two parameter directions, supported on the mode-a block:
// alpha_gamma = (N+1/2) P + (i/2) Q and alpha_nbar = (e^gamma - 1) P, with
// P the mode-a identity block and Q the antisymmetric unit block (transpose of
// the mode symplectic form, so that iota_gamma = +1/2).
struct AlphaPair {
    Eigen::Matrix4cd alpha_gamma;
    Eigen::Matrix4cd alpha_nbar;
    double kappa_gamma, iota_gamma;
    double kappa_nbar, iota_nbar;
};

namespace detail {

inline Eigen::Matrix2cd alpha_block(const ChannelParams& theta, Param p) {
    Eigen::Matrix2cd block;
    if (p == Param::Gamma) {
        const double xi = theta.nbar() + 0.5;
        block << Complex(xi, 0), Complex(0, -0.5), Complex(0, 0.5), Complex(xi, 0);
    } else {
        block = theta.z() * Eigen::Matrix2cd::Identity();
    }
    return block;
}

}  // namespace detail

inline AlphaPair alpha_matrices(const ChannelParams& theta) {
    AlphaPair a;
    a.alpha_gamma = Eigen::Matrix4cd::Zero();
    a.alpha_nbar = Eigen::Matrix4cd::Zero();
    a.alpha_gamma.topLeftCorner<2, 2>() = detail::alpha_block(theta, Param::Gamma);
    a.alpha_nbar.topLeftCorner<2, 2>() = detail::alpha_block(theta, Param::Nbar);
    a.kappa_gamma = theta.nbar() + 0.5;
    a.iota_gamma = 0.5;
    a.kappa_nbar = theta.z();
    a.iota_nbar = 0.0;
    return a;
}

namespace detail {

// Solve D[B] = alpha on one solve space: Sigma~ = Sigma Omega, and
// (Sigma~^T (x) Sigma~^T - 1/4) vec B = vec alpha in column-major vec. D is
// real, so the complex right-hand side splits into two real solves. The
// series form sum_k 4^k (Sigma~^T)^k A Sigma~^k of the same inverse diverges
// for every valid state (4 nu_j nu_k >= 1); only the direct solve is usable.
struct SldPieces {
    Complex c;
    CVec v;
    CMat m;
};

inline SldPieces solve_sld(const Vec& mean, const Mat& cov, const CMat& alpha) {
    const int d = static_cast<int>(cov.rows());
    const Mat omega = symplectic_form(d / 2);
    const Mat st = cov * omega;  // Sigma~
    const Mat stt = st.transpose();

    Mat k(d * d, d * d);
    for (int i = 0; i < d; ++i)
        for (int j = 0; j < d; ++j) k.block(i * d, j * d, d, d) = stt(i, j) * stt;
    k -= 0.25 * Mat::Identity(d * d, d * d);

    Eigen::PartialPivLU<Mat> lu(k);
    Mat alpha_re = alpha.real(), alpha_im = alpha.imag();
    Vec b_re = lu.solve(Eigen::Map<const Vec>(alpha_re.data(), d * d));
    Vec b_im = lu.solve(Eigen::Map<const Vec>(alpha_im.data(), d * d));
    CMat b = Eigen::Map<const Mat>(b_re.data(), d, d).cast<Complex>() +
             Complex(0, 1) * Eigen::Map<const Mat>(b_im.data(), d, d).cast<Complex>();

    const CMat comm = stt.cast<Complex>() * b - b * st.cast<Complex>();
    const CMat m_full = 0.5 * (b - Complex(0, 1) * comm);

    SldPieces out;
    out.m = 0.5 * (m_full + m_full.transpose());
    // Linear part in mean-centered coordinates: for a displacement derivative
    // d_mu mean the exact coefficient of (R - mean) is
    //   v = (i/2) Sigma~^{-T} (alpha - alpha^T) mean = Sigma^{-1} d_mu mean.
    // (A quoted prefactor of 2i overshoots by a factor 4.)
    const CVec cm = mean.cast<Complex>();
    const CVec rhs = (alpha - alpha.transpose()) * cm;
    Eigen::PartialPivLU<Mat> lu_st(stt);
    Vec v_re = lu_st.solve(rhs.real());
    Vec v_im = lu_st.solve(rhs.imag());
    const CVec v_centered =
        Complex(0, 0.5) * (v_re.cast<Complex>() + Complex(0, 1) * v_im.cast<Complex>());
    // Constant in centered coordinates, fixed by tracelessness: c0 = -tr[M Sigma].
    const CMat oc = omega.cast<Complex>();
    const Complex c0 = -Complex(0, 1) * (stt.cast<Complex>() * b * st.cast<Complex>() * oc).trace() -
                       0.25 * (comm * oc).trace();
    // The observable stores coefficients of the raw quadratures R, so expand
    // (R-m)^T M (R-m) + v.(R-m) + c0 into uncentered form.
    out.v = v_centered - 2.0 * (out.m * cm);
    out.c = c0 - (v_centered.array() * cm.array()).sum() +
            ((out.m * cm).array() * cm.array()).sum();
    return out;
}

}  // namespace detail

// SLD of the channel-output family in the direction `p`, evaluated at the
// output of `probe` under `theta`. Requires the output to be strictly mixed
// (all nu_k > 1/2 + 1e-8). One rescue path exists: a factorized output whose
// untouched ancilla is the sole near-pure mode has the exact SLD L_a (x) 1,
// obtained by solving on mode a alone and embedding.
inline QuadraticObservable build_sld(const GaussianState& probe, const ChannelParams& theta,
                                     Param p) {
    if (p == Param::Nbar && !(theta.nbar() > 0))
        throw singular_parameter_error("N=0: nbar SLD undefined (J_NN diverges)");
    const GaussianState out = apply_channel(probe, theta);
    const StateDiagnostics diag = validate_state(out);
    const int modes = out.num_modes();
    const Eigen::Matrix2cd alpha_a = detail::alpha_block(theta, p);

    QuadraticObservable obs;
    if (diag.nu.minCoeff() > 0.5 + kNearPureGate) {
        CMat alpha = CMat::Zero(2 * modes, 2 * modes);
        alpha.topLeftCorner<2, 2>() = alpha_a;
        const auto pieces = detail::solve_sld(out.mean, out.cov, alpha);
        obs.constant = pieces.c;
        obs.linear = pieces.v;
        obs.quadratic = pieces.m;
        return obs;
    }

    const bool factorized =
        modes == 2 && out.cov.block<2, 2>(0, 2).cwiseAbs().maxCoeff() <= 1e-12;
    const double nu_a =
        modes == 2 ? std::sqrt(std::max(0.0, out.cov.block<2, 2>(0, 0).determinant())) : 0.0;
    if (!(factorized && nu_a > 0.5 + kNearPureGate))
        throw singular_d_error(
            "output state near-pure: symplectic eigenvalue within 1e-8 of 1/2, D is singular");

    const auto pieces = detail::solve_sld(out.mean.head<2>(), out.cov.block<2, 2>(0, 0),
                                          CMat(alpha_a));
    obs.constant = pieces.c;
    obs.linear = CVec::Zero(4);
    obs.linear.head<2>() = pieces.v;
    obs.quadratic = CMat::Zero(4, 4);
    obs.quadratic.topLeftCorner<2, 2>() = pieces.m;
    return obs;
}

// Exact Gaussian expectation <AB> of two quadratic observables. Means are
// folded in by re-centering the observables; pairings then use the full
// second-moment matrix G = Sigma + (i/2) Omega. Satisfies <AB> = conj<B A>
// for Hermitian A, B.
inline Complex wick_expectation(const GaussianState& state, const QuadraticObservable& a,
                                const QuadraticObservable& b) {
    const int d = 2 * state.num_modes();
    if (a.dim() != d || b.dim() != d)
        throw domain_error("wick_expectation: observable/state dimension mismatch");
    const CVec mean = state.mean.cast<Complex>();
    const CMat sigma = state.cov.cast<Complex>();
    const CMat g = sigma + Complex(0, 0.5) * symplectic_form(state.num_modes()).cast<Complex>();

    auto pair_sum = [](const CVec& u, const CVec& w) { return (u.array() * w.array()).sum(); };
    const Complex c1 = a.constant + pair_sum(a.linear, mean) + pair_sum(mean, a.quadratic * mean);
    const Complex c2 = b.constant + pair_sum(b.linear, mean) + pair_sum(mean, b.quadratic * mean);
    const CVec v1 = a.linear + 2.0 * a.quadratic * mean;
    const CVec v2 = b.linear + 2.0 * b.quadratic * mean;

    const Complex t1 = (a.quadratic * sigma).trace();
    const Complex t2 = (b.quadratic * sigma).trace();
    return c1 * c2 + c1 * t2 + c2 * t1 + pair_sum(v1, g * v2) + t1 * t2 +
           2.0 * (a.quadratic * g * b.quadratic * g.transpose()).trace();
}

// tr[rho A] for a quadratic observable.
inline Complex expectation_value(const GaussianState& state, const QuadraticObservable& a) {
    const CVec mean = state.mean.cast<Complex>();
    return a.constant + (a.linear.array() * mean.array()).sum() +
           (a.quadratic * (state.cov.cast<Complex>() + mean * mean.transpose())).trace();
}

// J_{mu nu} = Re <L_mu L_nu> on the channel output; a Gram matrix of Hermitian
// operators, hence symmetric PSD. Diagonal entries reproduce the closed forms.
inline Eigen::Matrix2d qfi_matrix(const GaussianState& probe, const ChannelParams& theta) {
    const GaussianState out = apply_channel(probe, theta);
    const QuadraticObservable lg = build_sld(probe, theta, Param::Gamma);
    const QuadraticObservable ln = build_sld(probe, theta, Param::Nbar);
    Eigen::Matrix2d j;
    j(0, 0) = wick_expectation(out, lg, lg).real();
    j(1, 1) = wick_expectation(out, ln, ln).real();
    j(0, 1) = j(1, 0) = wick_expectation(out, lg, ln).real();
    return j;
}

// tr[rho [L_gamma, L_nbar]] = 2i Im <L_gamma L_nbar>.
inline Complex commutator_expectation(const GaussianState& probe, const ChannelParams& theta) {
    const GaussianState out = apply_channel(probe, theta);
    const QuadraticObservable lg = build_sld(probe, theta, Param::Gamma);
    const QuadraticObservable ln = build_sld(probe, theta, Param::Nbar);
    return Complex(0, 2.0 * wick_expectation(out, lg, ln).imag());
}

}  // namespace qmet
