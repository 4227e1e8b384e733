#pragma once

// Exact information yields J (quantum Fisher information per parameter) for
// the four probe classes, their zero-temperature specializations, low- and
// high-energy expansion coefficients, improvement thresholds, dominance
// orderings, and the weighted Cramer-Rao cost.
//
// Everything is written in the algebraic variables
//   x = n(n+1),  y = N(N+1),  z = e^gamma - 1,  t = n + N + 2nN,
// and templated on the scalar type: the consistency checks against the
// output-parameter formulas need long double headroom (see single_mode_yield).

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <cmath>
#include <optional>
#include <string>
#include <vector>

#include "qmet/core.hpp"
#include "qmet/errors.hpp"

namespace qmet {

enum class Param { Gamma, Nbar };

inline const char* param_name(Param p) { return p == Param::Gamma ? "gamma" : "nbar"; }

template <class Real>
struct YieldVariablesT {
    Real x, y, z, t, delta2;
};

template <class Real>
YieldVariablesT<Real> yield_variables_t(Real n, Real nbar, Real gamma) {
    YieldVariablesT<Real> v;
    v.x = n * (n + 1);
    v.y = nbar * (nbar + 1);
    v.z = std::expm1(gamma);
    v.t = n + nbar + 2 * n * nbar;
    v.delta2 = (n - nbar) * (n - nbar);
    return v;
}

using YieldVariables = YieldVariablesT<double>;

inline YieldVariables yield_variables(double n, const ChannelParams& theta) {
    if (!std::isfinite(n) || n < 0.0) throw domain_error("yield_variables: require n >= 0");
    return yield_variables_t<double>(n, theta.nbar(), theta.gamma());
}

namespace detail {

template <class Real>
void require_z_positive(Real z) {
    if (!(z > 0)) throw singular_parameter_error("z=0: identity channel");
}

template <class Real>
void require_nbar_positive(Real nbar, const char* what) {
    if (!(nbar > 0)) throw singular_parameter_error(std::string("N=0: ") + what);
}

}  // namespace detail

// Exact yield for one parameter, one probe class, probe energy n. The gamma
// yield of coherent probes is an exact first-degree polynomial in n; the
// thermal gamma yield vanishes identically at n = N (the probe is then a fixed
// point of the channel).
template <class Real>
Real qfi_t(Param p, ProbeClass c, Real n, Real gamma, Real nbar) {
    if (!(n >= 0) || !std::isfinite(static_cast<double>(n)))
        throw domain_error("qfi: require finite n >= 0");
    const auto v = yield_variables_t<Real>(n, nbar, gamma);
    const Real x = v.x, y = v.y, z = v.z, t = v.t;
    detail::require_z_positive(z);
    const Real zp1 = z + 1;
    if (p == Param::Gamma) {
        switch (c) {
            case ProbeClass::Coherent:
                return (nbar / z) / (1 + z * (nbar + 1)) + n / (1 + z * (2 * nbar + 1));
            case ProbeClass::Thermal:
                if (v.delta2 == Real(0)) return Real(0);
                return v.delta2 / (y * z * z + t * z + x);
            case ProbeClass::SingleModeSqueezed:
                if (t == Real(0)) return Real(0);  // vacuum probe, zero-temperature bath
                return t / z - y * t / (t + y * z) -
                       2 * (t * (t + 1) - y) / (zp1 * zp1 + 2 * z * (t + y * z));
            case ProbeClass::TwoModeSqueezedVacuum:
                return (t + x * z) / (z * ((t + 1) * z + 1));
        }
    } else {
        switch (c) {
            case ProbeClass::Coherent:
                detail::require_nbar_positive(nbar, "coherent nbar yield diverges (vacuum-temperature limit)");
                return z * zp1 * zp1 / ((1 + z * (nbar + 1)) * nbar);
            case ProbeClass::Thermal: {
                const Real den = x + z * (t + y * z);
                if (den == Real(0))
                    throw singular_parameter_error("n=0, N=0: thermal nbar yield undefined at the vacuum point");
                return z * z * zp1 * zp1 / den;
            }
            case ProbeClass::SingleModeSqueezed: {
                const Real den = t + z * (x * (8 * y + 2) + y * (z * (2 * y * z + z + 2) + 3)) +
                                 t * z * z * (1 + 4 * y);
                if (den == Real(0))
                    throw singular_parameter_error("n=0, N=0: squeezed nbar yield undefined at the vacuum point");
                return z * zp1 * zp1 * (1 + 4 * x + z * (2 * t + 2 * y * z + z + 2)) / den;
            }
            case ProbeClass::TwoModeSqueezedVacuum:
                detail::require_nbar_positive(nbar, "two-mode nbar yield diverges (vacuum-temperature limit)");
                return (t + 1) * z * zp1 * zp1 / (y * (t * z + z + 1));
        }
    }
    throw domain_error("qfi: unknown class");
}

inline double qfi(Param p, ProbeClass c, double n, const ChannelParams& theta) {
    return qfi_t<double>(p, c, n, theta.gamma(), theta.nbar());
}

// Zero-temperature gamma yields, implemented independently of the exact forms
// (each tests the other):
//   coherent n/(z+1), thermal n/(z+1+n),
//   squeezed (n/z)(1+z^2)/(1+z(z+2(n+1))), two-mode n/z.
template <class Real>
Real qfi_zero_temperature_t(ProbeClass c, Real n, Real gamma) {
    if (!(n >= 0)) throw domain_error("qfi_zero_temperature: require n >= 0");
    const Real z = std::expm1(gamma);
    detail::require_z_positive(z);
    switch (c) {
        case ProbeClass::Coherent: return n / (z + 1);
        case ProbeClass::Thermal: return n / (z + 1 + n);
        case ProbeClass::SingleModeSqueezed:
            return (n / z) * (1 + z * z) / (1 + z * (z + 2 * (n + 1)));
        case ProbeClass::TwoModeSqueezedVacuum: return n / z;
    }
    throw domain_error("qfi_zero_temperature: unknown class");
}

inline double qfi_zero_temperature(ProbeClass c, double n, double gamma) {
    return qfi_zero_temperature_t<double>(c, n, gamma);
}

enum class Regime { LowEnergy, HighEnergy };

// Expansion of a yield in the probe energy. order_low is the n^0 coefficient
// and order_high the n^1 coefficient in both regimes: the low-energy model is
// J ~ order_low + order_high*n as n->0, the high-energy model the same form as
// n->infinity (order_high = 0 for the saturating classes).
struct RegimeCoefficients {
    double order_low;
    double order_high;
    Regime regime;
};

// Sign quantity X of the first-order nbar gain of squeezed probes, in
// xi = N + 1/2: X = 2(xi-1) - z(4 z xi^3 + (z+2) xi + 1). The first-order
// coefficient is positive iff X > 0.
inline double squeezed_nbar_sign_quantity(const ChannelParams& theta) {
    const double z = theta.z();
    const double xi = theta.nbar() + 0.5;
    return 2.0 * (xi - 1.0) - z * (4.0 * z * xi * xi * xi + (z + 2.0) * xi + 1.0);
}

inline RegimeCoefficients low_energy_expansion(Param p, ProbeClass c, const ChannelParams& theta) {
    const double z = theta.z();
    detail::require_z_positive(z);
    const double N = theta.nbar();
    const double zp1 = z + 1.0;
    if (p == Param::Gamma) {
        const double j0 = (N / z) / (1.0 + z * (N + 1.0));
        double j1 = 0.0;
        switch (c) {
            case ProbeClass::Coherent:
                j1 = 1.0 / (1.0 + z * (1.0 + 2.0 * N));
                break;
            case ProbeClass::Thermal:
                j1 = -zp1 * (1.0 + 2.0 * z * (N + 1.0)) /
                     (z * z * (1.0 + z * (N + 1.0)) * (1.0 + z * (N + 1.0)));
                break;
            case ProbeClass::SingleModeSqueezed:
                // Third term carries a minus sign: with a plus the model's
                // residual against the exact yield is O(1), not O(n^2).
                j1 = (2.0 * N + 1.0) / z -
                     z * (1.0 + N) * (1.0 + N) * (1.0 + 2.0 * N) /
                         ((1.0 + z * (N + 1.0)) * (1.0 + z * (N + 1.0))) -
                     2.0 * (1.0 + 2.0 * N) * (1.0 + 2.0 * N) /
                         (zp1 * zp1 + 2.0 * N * z * (1.0 + z * (N + 1.0)));
                break;
            case ProbeClass::TwoModeSqueezedVacuum:
                j1 = (zp1 * zp1 + N * (z * (z + 2.0) + 2.0)) /
                     (z * (1.0 + z * (N + 1.0)) * (1.0 + z * (N + 1.0)));
                break;
        }
        return RegimeCoefficients{j0, j1, Regime::LowEnergy};
    }
    detail::require_nbar_positive(N, "low-energy nbar expansion undefined (vacuum yield diverges)");
    const double d = z * (N + 1.0) + 1.0;
    const double j0 = z * zp1 * zp1 / (N * d);
    double j1 = 0.0;
    switch (c) {
        case ProbeClass::Coherent:
            j1 = 0.0;  // first moments carry no temperature information
            break;
        case ProbeClass::Thermal:
            j1 = -zp1 * zp1 * (z * (2.0 * N + 1.0) + 1.0) / (N * N * d * d);
            break;
        case ProbeClass::SingleModeSqueezed: {
            const double xi = N + 0.5;
            const double q = 4.0 * z * xi * xi + 4.0 * xi;
            j1 = 32.0 * z * zp1 * zp1 * squeezed_nbar_sign_quantity(theta) /
                 ((q - z - 2.0) * (q - z - 2.0) * (z * (q + z + 2.0) + 2.0));
            break;
        }
        case ProbeClass::TwoModeSqueezedVacuum:
            j1 = (2.0 * N + 1.0) * z * zp1 * zp1 / (N * (N + 1.0) * d * d);
            break;
    }
    return RegimeCoefficients{j0, j1, Regime::LowEnergy};
}

inline RegimeCoefficients high_energy_expansion(Param p, ProbeClass c, const ChannelParams& theta) {
    const double z = theta.z();
    detail::require_z_positive(z);
    const double N = theta.nbar();
    const double zp1 = z + 1.0;
    if (p == Param::Gamma) {
        switch (c) {
            case ProbeClass::Coherent:
                // The coherent yield is an exact first-degree polynomial, so
                // the high-energy pair is just its two coefficients.
                return RegimeCoefficients{(N / z) / (1.0 + z * (N + 1.0)),
                                          1.0 / (1.0 + z * (2.0 * N + 1.0)), Regime::HighEnergy};
            case ProbeClass::Thermal:
                return RegimeCoefficients{1.0, 0.0, Regime::HighEnergy};
            case ProbeClass::SingleModeSqueezed:
                return RegimeCoefficients{(1.0 + 1.0 / (z * z)) / 2.0, 0.0, Regime::HighEnergy};
            case ProbeClass::TwoModeSqueezedVacuum:
                return RegimeCoefficients{N * (4.0 * N + z + 4.0) /
                                              (z * z * (2.0 * N + 1.0) * (2.0 * N + 1.0)),
                                          1.0 / (z * (2.0 * N + 1.0)), Regime::HighEnergy};
        }
    } else {
        detail::require_nbar_positive(N, "high-energy nbar expansion undefined");
        switch (c) {
            case ProbeClass::Coherent:
                return RegimeCoefficients{z * zp1 * zp1 / (N * (z * (N + 1.0) + 1.0)), 0.0,
                                          Regime::HighEnergy};
            case ProbeClass::Thermal:
                return RegimeCoefficients{0.0, 0.0, Regime::HighEnergy};
            case ProbeClass::SingleModeSqueezed:
                return RegimeCoefficients{2.0 * zp1 * zp1 / ((2.0 * N + 1.0) * (2.0 * N + 1.0)),
                                          0.0, Regime::HighEnergy};
            case ProbeClass::TwoModeSqueezedVacuum:
                return RegimeCoefficients{zp1 * zp1 / (N * (N + 1.0)), 0.0, Regime::HighEnergy};
        }
    }
    throw domain_error("high_energy_expansion: unknown class");
}

// Probe energies at which the first-order gain matches the vacuum yield,
// J^(0) = J^(1) n, for coherent and two-mode probes in gamma estimation.
struct ImprovementThresholds {
    double n_coh;
    double n_2m;
};

inline ImprovementThresholds improvement_thresholds(const ChannelParams& theta) {
    const double z = theta.z();
    detail::require_z_positive(z);
    const double N = theta.nbar();
    const double zp1 = z + 1.0;
    // n_2m as conventionally quoted; it differs from the exact expansion ratio
    // J^(0)/J^(1)_2m, whose denominator carries +N in place of +2N.
    return ImprovementThresholds{
        N * (z * (2.0 * N + 1.0) + 1.0) / (z * (z * (N + 1.0) + 1.0)),
        N * (z * (N + 1.0) + 1.0) / ((N + 1.0) * zp1 * zp1 + 2.0 * N)};
}

struct DominanceEntry {
    ProbeClass cls;
    double j;
};

struct DominanceReport {
    std::vector<DominanceEntry> gamma_ranking;  // descending in J
    std::vector<DominanceEntry> nbar_ranking;   // empty when nbar = 0
};

inline DominanceReport dominance_report(double n, const ChannelParams& theta) {
    if (!(n > 0)) throw domain_error("dominance_report: require n > 0");
    constexpr ProbeClass kAll[] = {ProbeClass::Coherent, ProbeClass::Thermal,
                                   ProbeClass::SingleModeSqueezed,
                                   ProbeClass::TwoModeSqueezedVacuum};
    auto rank = [&](Param p) {
        std::vector<DominanceEntry> entries;
        for (ProbeClass c : kAll) entries.push_back({c, qfi(p, c, n, theta)});
        const double j2m = entries.back().j;
        const double best_other = std::max({entries[0].j, entries[1].j, entries[2].j});
        if (j2m < best_other - 1e-12 * std::max(1.0, std::abs(best_other)))
            throw std::logic_error("dominance_report: two-mode probe not maximal");
        std::stable_sort(entries.begin(), entries.end(),
                         [](const DominanceEntry& a, const DominanceEntry& b) { return a.j > b.j; });
        if (entries[0].cls != ProbeClass::TwoModeSqueezedVacuum) {
            // numerically exact tie at the top: list the two-mode entry first
            for (std::size_t i = 1; i < entries.size(); ++i)
                if (entries[i].cls == ProbeClass::TwoModeSqueezedVacuum)
                    std::rotate(entries.begin(), entries.begin() + i, entries.begin() + i + 1);
        }
        return entries;
    };
    DominanceReport report;
    report.gamma_ranking = rank(Param::Gamma);
    if (theta.nbar() > 0) report.nbar_ranking = rank(Param::Nbar);
    return report;
}

// Weight matrix G of the scalar error cost tr[G V]; symmetric PSD over the
// parameter order (gamma, nbar).
struct WeightMatrix {
    explicit WeightMatrix(const Eigen::Matrix2d& g_in) : g(g_in) {
        if ((g - g.transpose()).cwiseAbs().maxCoeff() > kSymTol * std::max(1.0, g.cwiseAbs().maxCoeff()))
            throw domain_error("WeightMatrix: not symmetric");
        Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(g);
        if (es.eigenvalues().minCoeff() < -1e-12)
            throw domain_error("WeightMatrix: not positive semidefinite");
    }

    static WeightMatrix gamma_only() { return WeightMatrix(Eigen::Vector2d(1, 0).asDiagonal()); }
    static WeightMatrix nbar_only() { return WeightMatrix(Eigen::Vector2d(0, 1).asDiagonal()); }
    static WeightMatrix identity() { return WeightMatrix(Eigen::Matrix2d::Identity()); }

    Eigen::Matrix2d g;
};

// tr[G J^{-1}]: the weighted Cramer-Rao cost floor for unbiased estimation.
inline double weighted_cr_bound(const WeightMatrix& g, const Eigen::Matrix2d& j) {
    if ((j - j.transpose()).cwiseAbs().maxCoeff() > 1e-9 * std::max(1.0, j.cwiseAbs().maxCoeff()))
        throw domain_error("weighted_cr_bound: QFI matrix not symmetric");
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> es(j);
    if (es.eigenvalues().minCoeff() <= 0.0)
        throw singular_parameter_error("singular QFI matrix: Cramer-Rao cost undefined");
    return (g.g * j.inverse()).trace();
}

// ---------------------------------------------------------------------------
// Output-parameter form of the single-mode yields.
//
// A single-mode probe emerges from the channel as a squeezed thermal state
// D(d) S(r) rho_nu S^dag(r) D^dag(d) with Sigma = (nu/2) diag(e^{2r}, e^{-2r})
// (nu = 1 is pure in this normalization). The yields expressed in these output
// parameters are, with xi = N + 1/2:
//   J_gamma = (d1^2 e^{-2r} + d2^2 e^{2r})/(2 nu) + nu^2/(nu^2-1)
//             + 4 xi^2 (1 + nu^2 cosh 4r)/(nu^4-1) - 4 xi nu cosh 2r/(nu^2-1)
//   J_nbar  = 4 z^2 (1 + nu^2 cosh 4r)/(nu^4-1)
// The (nu^2-1) poles cancel only on the physical parameter manifold, so this
// path loses ~6 digits near nu = 1 in double precision; instantiate with long
// double where 1e-10 agreement is required.
// ---------------------------------------------------------------------------

template <class Real>
struct SingleModeOutput {
    Real nu, r, d1, d2;
};

template <class Real>
SingleModeOutput<Real> single_mode_output(ProbeClass c, Real n, Real gamma, Real nbar) {
    if (!(n >= 0)) throw domain_error("single_mode_output: require n >= 0");
    const Real eta = std::exp(-gamma);
    const Real xi = nbar + Real(0.5);
    const Real bath = (1 - eta) * xi;
    SingleModeOutput<Real> out{Real(1), Real(0), Real(0), Real(0)};
    switch (c) {
        case ProbeClass::Coherent: {
            const Real s = eta / 2 + bath;
            out.nu = 2 * s;
            out.d1 = std::sqrt(2 * n * eta);
            return out;
        }
        case ProbeClass::Thermal: {
            const Real s = eta * (2 * n + 1) / 2 + bath;
            out.nu = 2 * s;
            return out;
        }
        case ProbeClass::SingleModeSqueezed: {
            const Real e2r0 = 2 * n + 1 + 2 * std::sqrt(n * (n + 1));
            const Real s1 = eta * e2r0 / 2 + bath;
            const Real s2 = eta / (2 * e2r0) + bath;
            out.nu = 2 * std::sqrt(s1 * s2);
            out.r = std::log(s1 / s2) / 4;
            return out;
        }
        default:
            throw domain_error("single_mode_output: single-mode probe classes only");
    }
}

template <class Real>
Real single_mode_yield(Param p, const SingleModeOutput<Real>& s, Real gamma, Real nbar) {
    const Real z = std::expm1(gamma);
    detail::require_z_positive(z);
    const Real nu = s.nu;
    if (!(nu > 1))
        throw singular_parameter_error(
            "nu=1: pure channel output, output-parameter yield formulas singular");
    const Real nu2 = nu * nu;
    const Real common = (1 + nu2 * std::cosh(4 * s.r)) / (nu2 * nu2 - 1);
    if (p == Param::Nbar) return 4 * z * z * common;
    const Real xi = nbar + Real(0.5);
    return (s.d1 * s.d1 * std::exp(-2 * s.r) + s.d2 * s.d2 * std::exp(2 * s.r)) / (2 * nu) +
           nu2 / (nu2 - 1) + 4 * xi * xi * common - 4 * xi * nu * std::cosh(2 * s.r) / (nu2 - 1);
}

}  // namespace qmet
