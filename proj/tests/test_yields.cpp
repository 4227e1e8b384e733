#include <catch2/catch_amalgamated.hpp>

#include <array>
#include <cmath>

#include "helpers.hpp"
#include "qmet/core.hpp"
#include "qmet/errors.hpp"
#include "qmet/yields.hpp"

using namespace qmet;
using testutil::Rng;
using testutil::rel_err;

namespace {
constexpr std::array<ProbeClass, 4> kClasses = {ProbeClass::Coherent, ProbeClass::Thermal,
                                                ProbeClass::SingleModeSqueezed,
                                                ProbeClass::TwoModeSqueezedVacuum};
constexpr double kLn2 = 0.69314718055994530942;
}  // namespace

TEST_CASE("yield variables satisfy their algebraic identities") {
    Rng rng(5);
    for (int i = 0; i < 1000; ++i) {
        const double n = rng.uniform(0.0, 10.0);
        const double nbar = rng.uniform(0.0, 5.0);
        const ChannelParams theta(rng.uniform_open_low(0.0, 3.0), nbar);
        const auto v = yield_variables(n, theta);
        CHECK(v.x >= 0.0);
        CHECK(v.y >= 0.0);
        CHECK(v.z >= 0.0);
        CHECK(v.t >= -1e-15);
        CHECK(v.t <= v.x + v.y + 1e-12 * (1 + v.x + v.y));
        CHECK(rel_err(v.t * (v.t + 1), v.x + v.y + 4 * v.x * v.y, 1e-15) < 1e-12);
        CHECK(std::abs(v.t - (v.x + v.y - v.delta2)) <= 1e-12 * (1 + v.x + v.y));
    }
}

TEST_CASE("frozen yield values at simple channel points") {
    const ChannelParams half(kLn2, 0.0);  // z = 1
    CHECK(rel_err(qfi(Param::Gamma, ProbeClass::TwoModeSqueezedVacuum, 1.0, half), 1.0) < 1e-12);
    CHECK(rel_err(qfi(Param::Gamma, ProbeClass::Coherent, 1.0, half), 0.5) < 1e-12);
    CHECK(rel_err(qfi(Param::Gamma, ProbeClass::Thermal, 1.0, half), 1.0 / 3.0) < 1e-12);
    CHECK(rel_err(qfi(Param::Gamma, ProbeClass::SingleModeSqueezed, 1.0, half), 1.0 / 3.0) < 1e-12);

    // n = 0 reduces every class to the vacuum value of the nbar yield
    const ChannelParams warm(kLn2, 1.0);
    CHECK(rel_err(qfi(Param::Nbar, ProbeClass::TwoModeSqueezedVacuum, 0.0, warm), 4.0 / 3.0) <
          1e-12);
    const double vacuum_nbar = qfi(Param::Nbar, ProbeClass::Thermal, 0.0, warm);
    CHECK(rel_err(vacuum_nbar, 4.0 / 3.0) < 1e-12);
    CHECK(rel_err(qfi(Param::Nbar, ProbeClass::SingleModeSqueezed, 0.0, warm), 4.0 / 3.0) < 1e-12);
}

TEST_CASE("thermal probe at n = N is a channel fixed point with zero yield") {
    const ChannelParams theta(0.8, 0.65);
    CHECK(qfi(Param::Gamma, ProbeClass::Thermal, 0.65, theta) == 0.0);
}

TEST_CASE("zero-temperature closed forms match the general expressions") {
    Rng rng(7);
    for (int i = 0; i < 500; ++i) {
        const double n = rng.uniform_open_low(0.0, 10.0);
        const double gamma = rng.uniform_open_low(0.01, 3.0);
        const ChannelParams theta(gamma, 0.0);
        for (ProbeClass c : kClasses) {
            const double general = qfi(Param::Gamma, c, n, theta);
            const double special = qfi_zero_temperature(c, n, gamma);
            CHECK(rel_err(general, special, 1e-300) < 1e-12);
        }
    }
}

TEST_CASE("frozen zero-temperature values") {
    CHECK(rel_err(qfi_zero_temperature(ProbeClass::TwoModeSqueezedVacuum, 2.0, 0.1),
                  19.0166638895501) < 1e-13);
    CHECK(qfi_zero_temperature(ProbeClass::Coherent, 0.0, 1.7) == 0.0);
    CHECK(rel_err(qfi_zero_temperature(ProbeClass::Thermal, 1.0, kLn2), 1.0 / 3.0) < 1e-13);
    CHECK(rel_err(qfi_zero_temperature(ProbeClass::SingleModeSqueezed, 1.0, 0.1),
                  6.714537565601141) < 1e-13);
}

TEST_CASE("singular limits raise typed errors naming the limit") {
    const ChannelParams zero_gamma(0.0, 1.0);
    CHECK_THROWS_MATCHES(qfi(Param::Gamma, ProbeClass::Coherent, 1.0, zero_gamma),
                         singular_parameter_error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("z=0")));
    const ChannelParams zero_temp(0.5, 0.0);
    CHECK_THROWS_MATCHES(qfi(Param::Nbar, ProbeClass::Coherent, 1.0, zero_temp),
                         singular_parameter_error,
                         Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("N=0")));
    CHECK_THROWS_AS(qfi(Param::Nbar, ProbeClass::TwoModeSqueezedVacuum, 1.0, zero_temp),
                    singular_parameter_error);
    CHECK_THROWS_AS(qfi(Param::Nbar, ProbeClass::Thermal, 0.0, zero_temp),
                    singular_parameter_error);
    CHECK_THROWS_AS(qfi_zero_temperature(ProbeClass::TwoModeSqueezedVacuum, 1.0, 0.0),
                    singular_parameter_error);
    CHECK_THROWS_AS(qfi(Param::Gamma, ProbeClass::Coherent, -1.0, ChannelParams(0.5, 0.0)),
                    domain_error);
    // finite at the vacuum-temperature point when nothing divides by y
    CHECK(std::isfinite(qfi(Param::Nbar, ProbeClass::Thermal, 1.0, zero_temp)));
    CHECK(std::isfinite(qfi(Param::Nbar, ProbeClass::SingleModeSqueezed, 1.0, zero_temp)));
}

TEST_CASE("coherent damping yield is exactly linear in energy") {
    Rng rng(9);
    for (int i = 0; i < 200; ++i) {
        const ChannelParams theta(rng.uniform_open_low(0.0, 3.0), rng.uniform(0.0, 5.0));
        const double n = rng.uniform(0.5, 8.0);
        const double h = 0.25;
        const double second_diff = qfi(Param::Gamma, ProbeClass::Coherent, n + h, theta) -
                                   2 * qfi(Param::Gamma, ProbeClass::Coherent, n, theta) +
                                   qfi(Param::Gamma, ProbeClass::Coherent, n - h, theta);
        CHECK(std::abs(second_diff) <= 1e-12);
    }
}

TEST_CASE("low-energy coefficients: frozen values and class-independent base") {
    const ChannelParams theta(kLn2, 1.0);
    const RegimeCoefficients coh = low_energy_expansion(Param::Gamma, ProbeClass::Coherent, theta);
    CHECK(coh.regime == Regime::LowEnergy);
    CHECK(rel_err(coh.order_low, 1.0 / 3.0) < 1e-13);
    CHECK(rel_err(coh.order_high, 0.25) < 1e-13);
    // the n^0 term is the vacuum yield, identical across classes
    for (ProbeClass c : kClasses) {
        const RegimeCoefficients rc = low_energy_expansion(Param::Gamma, c, theta);
        CHECK(rel_err(rc.order_low, coh.order_low) < 1e-13);
    }
    // nbar: the n^0 term equals the coherent-class yield at every energy
    const RegimeCoefficients base_n = low_energy_expansion(Param::Nbar, ProbeClass::Coherent, theta);
    CHECK(rel_err(base_n.order_low, qfi(Param::Nbar, ProbeClass::Coherent, 0.7, theta)) < 1e-13);
    CHECK(base_n.order_high == 0.0);
    for (ProbeClass c : kClasses) {
        CHECK(rel_err(low_energy_expansion(Param::Nbar, c, theta).order_low, base_n.order_low) <
              1e-13);
    }
}

TEST_CASE("weak thermal probes fall below the vacuum for damping estimation") {
    Rng rng(13);
    for (int i = 0; i < 100; ++i) {
        const ChannelParams theta(rng.uniform_open_low(0.0, 3.0), rng.uniform_open_low(0.0, 5.0));
        CHECK(low_energy_expansion(Param::Gamma, ProbeClass::Thermal, theta).order_high < 0.0);
    }
}

TEST_CASE("two-mode first-order nbar gain beats single-mode squeezing") {
    Rng rng(15);
    for (int i = 0; i < 100; ++i) {
        const ChannelParams theta(rng.uniform_open_low(0.0, 2.0), rng.uniform_open_low(0.0, 3.0));
        const double two_mode =
            low_energy_expansion(Param::Nbar, ProbeClass::TwoModeSqueezedVacuum, theta).order_high;
        const double squeezed =
            low_energy_expansion(Param::Nbar, ProbeClass::SingleModeSqueezed, theta).order_high;
        CHECK(two_mode > squeezed);
    }
}

TEST_CASE("squeezed nbar first-order sign tracks the sign quantity") {
    const ChannelParams positive(std::log1p(0.01), 1.5);
    CHECK(squeezed_nbar_sign_quantity(positive) > 0.0);
    CHECK(low_energy_expansion(Param::Nbar, ProbeClass::SingleModeSqueezed, positive).order_high >
          0.0);
    const ChannelParams negative(kLn2, 0.2);
    CHECK(squeezed_nbar_sign_quantity(negative) < 0.0);
    CHECK(low_energy_expansion(Param::Nbar, ProbeClass::SingleModeSqueezed, negative).order_high <
          0.0);
}

TEST_CASE("low-energy model residuals decay quadratically") {
    const ChannelParams theta(0.3, 0.9);
    const std::array<std::pair<Param, ProbeClass>, 6> combos = {{
        {Param::Gamma, ProbeClass::Thermal},
        {Param::Gamma, ProbeClass::SingleModeSqueezed},
        {Param::Gamma, ProbeClass::TwoModeSqueezedVacuum},
        {Param::Nbar, ProbeClass::Thermal},
        {Param::Nbar, ProbeClass::SingleModeSqueezed},
        {Param::Nbar, ProbeClass::TwoModeSqueezedVacuum},
    }};
    for (const auto& [p, c] : combos) {
        const RegimeCoefficients rc = low_energy_expansion(p, c, theta);
        auto residual = [&](double n) {
            return std::abs(qfi(p, c, n, theta) - rc.order_low - rc.order_high * n);
        };
        const double r3 = residual(1e-3);
        const double r4 = residual(1e-4);
        CHECK(r4 <= 1.2e-2 * r3);
        CHECK(r4 >= 0.5e-2 * r3);  // genuinely quadratic, not higher order
    }
    // coherent probes: the model is exact, residuals are pure roundoff
    for (Param p : {Param::Gamma, Param::Nbar}) {
        const RegimeCoefficients rc = low_energy_expansion(p, ProbeClass::Coherent, theta);
        const double j = qfi(p, ProbeClass::Coherent, 1e-3, theta);
        CHECK(std::abs(j - rc.order_low - rc.order_high * 1e-3) <= 1e-12 * std::max(1.0, j));
    }
}

TEST_CASE("high-energy coefficients: frozen values") {
    const ChannelParams theta(0.3, 0.9);
    const RegimeCoefficients two_mode =
        high_energy_expansion(Param::Gamma, ProbeClass::TwoModeSqueezedVacuum, theta);
    CHECK(two_mode.regime == Regime::HighEnergy);
    CHECK(rel_err(two_mode.order_high, 1.020819969110744) < 1e-13);
    CHECK(rel_err(two_mode.order_low, 7.455902824210206) < 1e-13);

    const RegimeCoefficients sq =
        high_energy_expansion(Param::Gamma, ProbeClass::SingleModeSqueezed, ChannelParams(kLn2, 0.4));
    CHECK(sq.order_high == 0.0);
    CHECK(rel_err(sq.order_low, 1.0) < 1e-13);  // (1 + 1/z^2)/2 at z = 1

    const RegimeCoefficients th = high_energy_expansion(Param::Gamma, ProbeClass::Thermal, theta);
    CHECK(th.order_high == 0.0);
    CHECK(rel_err(th.order_low, 1.0) < 1e-13);
}

TEST_CASE("high-energy saturation ratio of two-mode to coherent nbar yields") {
    Rng rng(19);
    for (int i = 0; i < 100; ++i) {
        const ChannelParams theta(rng.uniform_open_low(0.0, 3.0), rng.uniform_open_low(0.0, 5.0));
        const double sat_2m =
            high_energy_expansion(Param::Nbar, ProbeClass::TwoModeSqueezedVacuum, theta).order_low;
        const double sat_coh =
            high_energy_expansion(Param::Nbar, ProbeClass::Coherent, theta).order_low;
        CHECK(rel_err(sat_2m / sat_coh, 1.0 + 1.0 / (theta.z() * (theta.nbar() + 1.0))) < 1e-12);
        // nbar yields never grow with energy
        CHECK(high_energy_expansion(Param::Nbar, ProbeClass::TwoModeSqueezedVacuum, theta)
                  .order_high == 0.0);
    }
}

TEST_CASE("high-energy model residuals do not grow from n=1e3 to n=1e4") {
    const ChannelParams theta(0.3, 0.9);
    for (Param p : {Param::Gamma, Param::Nbar}) {
        for (ProbeClass c : kClasses) {
            const RegimeCoefficients rc = high_energy_expansion(p, c, theta);
            auto residual = [&](double n) {
                return std::abs(qfi(p, c, n, theta) - rc.order_low - rc.order_high * n);
            };
            const double r3 = residual(1e3);
            const double r4 = residual(1e4);
            const double floor = 1e-12 * std::max(1.0, std::abs(qfi(p, c, 1e4, theta)));
            CHECK((r4 <= r3 * (1 + 1e-9) || (r3 <= floor && r4 <= floor)));
        }
    }
}

TEST_CASE("improvement thresholds: frozen values and ordering") {
    const ImprovementThresholds at_warm = improvement_thresholds(ChannelParams(kLn2, 1.0));
    CHECK(rel_err(at_warm.n_coh, 4.0 / 3.0) < 1e-13);
    CHECK(rel_err(at_warm.n_2m, 0.3) < 1e-13);
    const ImprovementThresholds at_cold = improvement_thresholds(ChannelParams(kLn2, 0.0));
    CHECK(at_cold.n_coh == 0.0);
    CHECK(at_cold.n_2m == 0.0);
    CHECK_THROWS_AS(improvement_thresholds(ChannelParams(0.0, 1.0)), singular_parameter_error);

    Rng rng(21);
    for (int i = 0; i < 1000; ++i) {
        const ChannelParams theta(rng.uniform_open_low(0.0, 3.0), rng.uniform_open_low(0.0, 5.0));
        const ImprovementThresholds th = improvement_thresholds(theta);
        CHECK(th.n_2m <= th.n_coh + 1e-12);
        // the coherent threshold is exactly the vacuum-to-gain ratio
        const RegimeCoefficients rc = low_energy_expansion(Param::Gamma, ProbeClass::Coherent, theta);
        CHECK(rel_err(th.n_coh, rc.order_low / rc.order_high) < 1e-12);
    }
}

TEST_CASE("dominance report ranks the two-mode probe first") {
    const DominanceReport cold = dominance_report(1.0, ChannelParams(kLn2, 0.0));
    REQUIRE(cold.gamma_ranking.size() == 4);
    CHECK(cold.gamma_ranking[0].cls == ProbeClass::TwoModeSqueezedVacuum);
    CHECK(rel_err(cold.gamma_ranking[0].j, 1.0) < 1e-12);
    CHECK(cold.gamma_ranking[1].cls == ProbeClass::Coherent);
    CHECK(rel_err(cold.gamma_ranking[1].j, 0.5) < 1e-12);
    CHECK(rel_err(cold.gamma_ranking[2].j, 1.0 / 3.0) < 1e-12);
    CHECK(rel_err(cold.gamma_ranking[3].j, 1.0 / 3.0) < 1e-12);
    CHECK(cold.nbar_ranking.empty());

    const DominanceReport warm = dominance_report(5.0, ChannelParams(0.3, 0.9));
    CHECK(warm.gamma_ranking[0].cls == ProbeClass::TwoModeSqueezedVacuum);
    REQUIRE(warm.nbar_ranking.size() == 4);
    CHECK(warm.nbar_ranking[0].cls == ProbeClass::TwoModeSqueezedVacuum);

    const DominanceReport low = dominance_report(0.5, ChannelParams(0.08, 0.7));
    CHECK(low.nbar_ranking[0].cls == ProbeClass::TwoModeSqueezedVacuum);
}

TEST_CASE("weighted Cramer-Rao cost") {
    Eigen::Matrix2d j;
    j << 4, 0, 0, 9;
    CHECK(rel_err(weighted_cr_bound(WeightMatrix::gamma_only(), j), 0.25) < 1e-14);
    CHECK(rel_err(weighted_cr_bound(WeightMatrix::nbar_only(), j), 1.0 / 9.0) < 1e-14);
    CHECK(rel_err(weighted_cr_bound(WeightMatrix::identity(), j), 0.25 + 1.0 / 9.0) < 1e-14);

    // correlated information matrix: the joint bound exceeds the single-parameter one
    Eigen::Matrix2d tmsv_j;
    tmsv_j << 1.0, 1.0, 1.0, 5.0 / 3.0;
    const double marginal = weighted_cr_bound(WeightMatrix::nbar_only(), tmsv_j);
    CHECK(rel_err(marginal, 1.5) < 1e-12);
    CHECK(marginal > 1.0 / (5.0 / 3.0));

    Eigen::Matrix2d singular;
    singular << 1, 1, 1, 1;
    CHECK_THROWS_AS(weighted_cr_bound(WeightMatrix::identity(), singular),
                    singular_parameter_error);
    Eigen::Matrix2d indefinite;
    indefinite << 1, 0, 0, -1;
    CHECK_THROWS_AS(WeightMatrix(indefinite), domain_error);
}

TEST_CASE("output-parameter yield formulas agree with the direct expressions") {
    Rng rng(25);
    constexpr std::array<ProbeClass, 3> single_mode = {
        ProbeClass::Coherent, ProbeClass::Thermal, ProbeClass::SingleModeSqueezed};
    for (int i = 0; i < 100; ++i) {
        const long double n = rng.uniform_open_low(0.05, 4.0);
        const long double gamma = rng.uniform(0.1, 2.0);
        long double nbar = rng.uniform(0.05, 3.0);
        // keep away from the thermal fixed point n = nbar, where J_gamma -> 0
        // and a relative comparison is ill-conditioned
        while (std::abs(static_cast<double>(n - nbar)) < 0.02) nbar = rng.uniform(0.05, 3.0);
        for (ProbeClass c : single_mode) {
            const auto output = single_mode_output<long double>(c, n, gamma, nbar);
            for (Param p : {Param::Gamma, Param::Nbar}) {
                const long double via_output = single_mode_yield<long double>(p, output, gamma, nbar);
                const long double direct = qfi_t<long double>(p, c, n, gamma, nbar);
                CHECK(rel_err(static_cast<double>(via_output), static_cast<double>(direct)) <
                      1e-10);
            }
        }
    }
}

TEST_CASE("output-parameter formulas reject pure channel outputs") {
    // vacuum probe through a zero-temperature channel stays pure: nu = 1
    const auto output = single_mode_output<double>(ProbeClass::Thermal, 0.0, 0.7, 0.0);
    CHECK_THROWS_MATCHES(
        single_mode_yield<double>(Param::Gamma, output, 0.7, 0.0), singular_parameter_error,
        Catch::Matchers::MessageMatches(Catch::Matchers::ContainsSubstring("nu=1")));
}
