#pragma once

// Command-line front end: deterministic, file-emitting subcommands exposing
// yields, expansions, SLD/commutator checks, figure sweeps, and the
// random-probe scatter experiment.
//
// Exit codes: 0 success, 2 argument error, 3 singular-parameter/domain error.
// All floating-point output is serialized with 17 significant digits; NaN is
// spelled "nan". Identical argv (including --seed) produce byte-identical
// output files.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <string>
#include <vector>

#include "qmet/core.hpp"
#include "qmet/errors.hpp"
#include "qmet/fock.hpp"
#include "qmet/sld.hpp"
#include "qmet/yields.hpp"

namespace qmet::cli {

inline std::string fmt17(double v) {
    if (std::isnan(v)) return "nan";
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

enum class OutputFormat { Text, Csv, Json };

struct SweepConfig {
    Param param = Param::Gamma;
    double gamma = 0.0;
    double nbar = 0.0;
    double n_min = 0.0;
    double n_max = 1.0;
    int points = 2;
    bool log_scale = false;
    std::vector<ProbeClass> classes = {ProbeClass::Coherent, ProbeClass::Thermal,
                                       ProbeClass::SingleModeSqueezed,
                                       ProbeClass::TwoModeSqueezedVacuum};
    OutputFormat format = OutputFormat::Csv;
    std::string output;  // empty: write to stdout
};

inline void validate(const SweepConfig& cfg) {
    if (cfg.points < 2) throw CLI::ValidationError("--points: require at least 2 grid points");
    if (!(cfg.n_min >= 0)) throw CLI::ValidationError("--n-min: require n >= 0");
    if (!(cfg.n_min < cfg.n_max)) throw CLI::ValidationError("--n-min/--n-max: require n-min < n-max");
    if (cfg.log_scale && !(cfg.n_min > 0))
        throw CLI::ValidationError("--log: geometric grid requires n-min > 0");
}

inline std::vector<double> sweep_grid(const SweepConfig& cfg) {
    std::vector<double> grid(cfg.points);
    grid.front() = cfg.n_min;
    grid.back() = cfg.n_max;
    for (int i = 1; i + 1 < cfg.points; ++i) {
        const double f = static_cast<double>(i) / (cfg.points - 1);
        grid[i] = cfg.log_scale ? cfg.n_min * std::pow(cfg.n_max / cfg.n_min, f)
                                : cfg.n_min + (cfg.n_max - cfg.n_min) * f;
    }
    return grid;
}

namespace detail {

constexpr std::array<ProbeClass, 4> kSweepColumns = {
    ProbeClass::Coherent, ProbeClass::Thermal, ProbeClass::SingleModeSqueezed,
    ProbeClass::TwoModeSqueezedVacuum};

inline bool contains(const std::vector<ProbeClass>& v, ProbeClass c) {
    return std::find(v.begin(), v.end(), c) != v.end();
}

inline void write_output(const std::string& path, const std::string& body, std::ostream& out) {
    if (path.empty()) {
        out << body;
        return;
    }
    std::ofstream f(path, std::ios::binary);
    if (!f) throw CLI::ValidationError("--output: cannot open '" + path + "' for writing");
    f << body;
    if (!f) throw CLI::ValidationError("--output: write to '" + path + "' failed");
}

}  // namespace detail

// Evaluates the four-class yield table over the energy grid. Classes whose
// yield is singular at the given channel point contribute `nan` columns and
// one stderr warning each instead of aborting the sweep.
inline std::string render_sweep(const SweepConfig& cfg, std::ostream& err) {
    const ChannelParams theta(cfg.gamma, cfg.nbar);
    const std::vector<double> grid = sweep_grid(cfg);
    std::array<bool, 4> warned{};
    auto cell = [&](ProbeClass c, double n, int col) -> double {
        if (!detail::contains(cfg.classes, c)) return std::numeric_limits<double>::quiet_NaN();
        try {
            return qfi(cfg.param, c, n, theta);
        } catch (const domain_error& e) {
            if (!warned[col]) {
                err << "warning: J_" << probe_class_name(c) << " column is singular (" << e.what()
                    << "); filling with nan\n";
                warned[col] = true;
            }
            return std::numeric_limits<double>::quiet_NaN();
        }
    };
    std::ostringstream body;
    if (cfg.format == OutputFormat::Json) {
        nlohmann::ordered_json rows = nlohmann::ordered_json::array();
        for (double n : grid) {
            nlohmann::ordered_json row;
            row["n"] = n;
            int col = 0;
            for (ProbeClass c : detail::kSweepColumns) {
                const double v = cell(c, n, col++);
                if (std::isnan(v))
                    row["J_" + std::string(probe_class_name(c))] = nullptr;
                else
                    row["J_" + std::string(probe_class_name(c))] = v;
            }
            rows.push_back(std::move(row));
        }
        body << rows.dump() << "\n";
    } else {
        body << "n,J_coherent,J_thermal,J_squeezed,J_two_mode\n";
        for (double n : grid) {
            body << fmt17(n);
            int col = 0;
            for (ProbeClass c : detail::kSweepColumns) body << "," << fmt17(cell(c, n, col++));
            body << "\n";
        }
    }
    return body.str();
}

inline std::string render_scatter_csv(const std::vector<ScatterRecord>& records) {
    std::ostringstream body;
    body << "index,kind,n_a,J_gamma,entropy,efficiency\n";
    for (const ScatterRecord& r : records)
        body << r.index << "," << scatter_kind_label(r) << "," << fmt17(r.n_a) << ","
             << fmt17(r.j_gamma) << "," << fmt17(r.entropy) << "," << fmt17(r.efficiency) << "\n";
    return body.str();
}

inline int run(std::vector<std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Quantum Fisher information bounds for estimating the damping constant and the"
                 " thermal photon number of a lossy bosonic channel, with Gaussian and"
                 " truncated-Fock probes"};
    app.name("qmet");
    app.require_subcommand(1);

    const std::map<std::string, Param> param_map{{"gamma", Param::Gamma}, {"nbar", Param::Nbar}};
    const std::map<std::string, ProbeClass> class_map{
        {"coherent", ProbeClass::Coherent},
        {"thermal", ProbeClass::Thermal},
        {"squeezed", ProbeClass::SingleModeSqueezed},
        {"two-mode", ProbeClass::TwoModeSqueezedVacuum}};
    const std::map<std::string, Regime> regime_map{{"low", Regime::LowEnergy},
                                                   {"high", Regime::HighEnergy}};

    // --- yield ---------------------------------------------------------
    Param y_param{};
    ProbeClass y_class{};
    double y_n = 0, y_gamma = 0, y_nbar = 0;
    std::string y_format = "text";
    CLI::App* yield_cmd = app.add_subcommand("yield", "Evaluate one exact yield J(param, class)");
    yield_cmd->add_option("--param", y_param, "parameter: gamma|nbar")
        ->required()
        ->transform(CLI::CheckedTransformer(param_map, CLI::ignore_case));
    yield_cmd->add_option("--class", y_class, "probe class: coherent|thermal|squeezed|two-mode")
        ->required()
        ->transform(CLI::CheckedTransformer(class_map, CLI::ignore_case));
    yield_cmd->add_option("--n", y_n, "probe energy (mean photon number)")->required();
    yield_cmd->add_option("--gamma", y_gamma, "damping constant")->required();
    yield_cmd->add_option("--nbar", y_nbar, "thermal photon number of the bath")->required();
    yield_cmd->add_option("--format", y_format, "output format: text|json")
        ->check(CLI::IsMember({"text", "json"}));
    yield_cmd->callback([&] {
        const ChannelParams theta(y_gamma, y_nbar);
        const double j = qfi(y_param, y_class, y_n, theta);
        if (y_format == "json") {
            nlohmann::ordered_json o;
            o["param"] = param_name(y_param);
            o["class"] = probe_class_name(y_class);
            o["n"] = y_n;
            o["gamma"] = y_gamma;
            o["nbar"] = y_nbar;
            o["J"] = j;
            out << o.dump() << "\n";
        } else {
            out << "param=" << param_name(y_param) << " class=" << probe_class_name(y_class)
                << " n=" << fmt17(y_n) << " gamma=" << fmt17(y_gamma) << " nbar=" << fmt17(y_nbar)
                << " J=" << fmt17(j) << "\n";
        }
    });

    // --- sweep ---------------------------------------------------------
    SweepConfig sweep_cfg;
    std::string sweep_format = "csv";
    CLI::App* sweep_cmd =
        app.add_subcommand("sweep", "Tabulate all four class yields over an energy grid");
    sweep_cmd->add_option("--param", sweep_cfg.param, "parameter: gamma|nbar")
        ->required()
        ->transform(CLI::CheckedTransformer(param_map, CLI::ignore_case));
    sweep_cmd->add_option("--gamma", sweep_cfg.gamma, "damping constant")->required();
    sweep_cmd->add_option("--nbar", sweep_cfg.nbar, "thermal photon number of the bath")->required();
    sweep_cmd->add_option("--n-min", sweep_cfg.n_min, "lowest probe energy")->required();
    sweep_cmd->add_option("--n-max", sweep_cfg.n_max, "highest probe energy")->required();
    sweep_cmd->add_option("--points", sweep_cfg.points, "number of grid points")->required();
    sweep_cmd->add_flag("--log", sweep_cfg.log_scale, "geometric (log-spaced) grid");
    sweep_cmd->add_option("--format", sweep_format, "output format: csv|json")
        ->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--output", sweep_cfg.output, "write to file instead of stdout");
    sweep_cmd->callback([&] {
        sweep_cfg.format = sweep_format == "json" ? OutputFormat::Json : OutputFormat::Csv;
        validate(sweep_cfg);
        detail::write_output(sweep_cfg.output, render_sweep(sweep_cfg, err), out);
    });

    // --- expand --------------------------------------------------------
    Param e_param{};
    ProbeClass e_class{};
    Regime e_regime{};
    double e_gamma = 0, e_nbar = 0;
    CLI::App* expand_cmd =
        app.add_subcommand("expand", "Low/high energy expansion coefficients of a yield");
    expand_cmd->add_option("--param", e_param, "parameter: gamma|nbar")
        ->required()
        ->transform(CLI::CheckedTransformer(param_map, CLI::ignore_case));
    expand_cmd->add_option("--regime", e_regime, "expansion regime: low|high")
        ->required()
        ->transform(CLI::CheckedTransformer(regime_map, CLI::ignore_case));
    expand_cmd->add_option("--class", e_class, "probe class: coherent|thermal|squeezed|two-mode")
        ->required()
        ->transform(CLI::CheckedTransformer(class_map, CLI::ignore_case));
    expand_cmd->add_option("--gamma", e_gamma, "damping constant")->required();
    expand_cmd->add_option("--nbar", e_nbar, "thermal photon number of the bath")->required();
    expand_cmd->callback([&] {
        const ChannelParams theta(e_gamma, e_nbar);
        const RegimeCoefficients rc = e_regime == Regime::LowEnergy
                                          ? low_energy_expansion(e_param, e_class, theta)
                                          : high_energy_expansion(e_param, e_class, theta);
        out << "param=" << param_name(e_param) << " class=" << probe_class_name(e_class)
            << " regime=" << (e_regime == Regime::LowEnergy ? "low" : "high")
            << " constant=" << fmt17(rc.order_low) << " linear=" << fmt17(rc.order_high) << "\n";
    });

    // --- commute -------------------------------------------------------
    double c_n = 0, c_gamma = 0, c_nbar = 0;
    CLI::App* commute_cmd = app.add_subcommand(
        "commute", "Mean commutator of the two logarithmic derivatives on a two-mode probe");
    commute_cmd->add_option("--n", c_n, "probe energy of the two-mode squeezed vacuum")->required();
    commute_cmd->add_option("--gamma", c_gamma, "damping constant")->required();
    commute_cmd->add_option("--nbar", c_nbar, "thermal photon number of the bath")->required();
    commute_cmd->callback([&] {
        const ChannelParams theta(c_gamma, c_nbar);
        const GaussianState probe = make_probe(ProbeClass::TwoModeSqueezedVacuum, c_n);
        const std::complex<double> c = commutator_expectation(probe, theta);
        out << "real=" << fmt17(c.real()) << " imag=" << fmt17(c.imag()) << "\n";
    });

    // --- qfi-matrix ----------------------------------------------------
    ProbeClass q_class{};
    double q_n = 0, q_gamma = 0, q_nbar = 0;
    CLI::App* qfim_cmd = app.add_subcommand(
        "qfi-matrix", "2x2 Fisher information matrix and weighted estimation bounds");
    qfim_cmd->add_option("--class", q_class, "probe class: coherent|thermal|squeezed|two-mode")
        ->required()
        ->transform(CLI::CheckedTransformer(class_map, CLI::ignore_case));
    qfim_cmd->add_option("--n", q_n, "probe energy")->required();
    qfim_cmd->add_option("--gamma", q_gamma, "damping constant")->required();
    qfim_cmd->add_option("--nbar", q_nbar, "thermal photon number of the bath")->required();
    qfim_cmd->callback([&] {
        const ChannelParams theta(q_gamma, q_nbar);
        const GaussianState probe = make_probe(q_class, q_n);
        const Eigen::Matrix2d j = qfi_matrix(probe, theta);
        out << "J=[[" << fmt17(j(0, 0)) << "," << fmt17(j(0, 1)) << "],[" << fmt17(j(1, 0)) << ","
            << fmt17(j(1, 1)) << "]]\n";
        out << "bound_gamma=" << fmt17(weighted_cr_bound(WeightMatrix::gamma_only(), j)) << "\n";
        out << "bound_nbar=" << fmt17(weighted_cr_bound(WeightMatrix::nbar_only(), j)) << "\n";
        out << "bound_identity=" << fmt17(weighted_cr_bound(WeightMatrix::identity(), j)) << "\n";
    });

    // --- scatter -------------------------------------------------------
    int s_samples = 0, s_dim = 0;
    double s_gamma = 0;
    std::vector<int> s_maxent;
    std::uint64_t s_seed = 0;
    std::string s_output;
    CLI::App* scatter_cmd = app.add_subcommand(
        "scatter", "Random bipartite probes through the damping channel (CSV experiment)");
    scatter_cmd->add_option("--samples", s_samples, "number of Haar-random probes")
        ->required()
        ->check(CLI::PositiveNumber);
    scatter_cmd->add_option("--gamma", s_gamma, "damping constant")->required();
    scatter_cmd->add_option("--dim", s_dim, "local Fock dimension of each mode")
        ->required()
        ->check(CLI::PositiveNumber);
    scatter_cmd->add_option("--max-ent-dims", s_maxent, "maximally entangled ranks, e.g. 3,4,5,6")
        ->required()
        ->delimiter(',');
    scatter_cmd->add_option("--seed", s_seed, "random seed")->required();
    scatter_cmd->add_option("--output", s_output, "CSV output path")->required();
    scatter_cmd->callback([&] {
        for (int d : s_maxent)
            if (d < 1) throw CLI::ValidationError("--max-ent-dims: ranks must be >= 1");
        const std::vector<ScatterRecord> records =
            scatter_experiment(s_samples, s_gamma, s_dim, s_dim, s_maxent, s_seed);
        detail::write_output(s_output, render_scatter_csv(records), out);
        out << "wrote " << s_output << " (" << records.size() << " records)\n";
    });

    // --- fock-qfi ------------------------------------------------------
    std::string f_state;
    double f_n = 0, f_gamma = 0;
    int f_cutoff = 0;
    CLI::App* fock_cmd = app.add_subcommand(
        "fock-qfi", "Exact truncated-Fock damping information for one pure probe");
    fock_cmd->add_option("--state", f_state, "probe: coherent|squeezed|tmsv|max-ent")
        ->required()
        ->check(CLI::IsMember({"coherent", "squeezed", "tmsv", "max-ent"}));
    fock_cmd->add_option("--n", f_n, "probe energy (for max-ent: n=(d-1)/2 with integer d)")
        ->required();
    fock_cmd->add_option("--gamma", f_gamma, "damping constant")->required();
    fock_cmd
        ->add_option("--cutoff", f_cutoff,
                     "Fock-space truncation dimension (ignored for max-ent, which is exact)")
        ->required()
        ->check(CLI::PositiveNumber);
    fock_cmd->callback([&] {
        double j = 0, tail = 0;
        if (f_state == "max-ent") {
            const double d_real = 2.0 * f_n + 1.0;
            const int d = static_cast<int>(std::lround(d_real));
            if (d < 1 || std::abs(d_real - d) > 1e-9)
                throw CLI::ValidationError("--n: max-ent requires n=(d-1)/2 for integer d >= 1");
            j = qfi_gamma_fock(max_entangled(d), f_gamma);
        } else {
            const TruncatedProbe probe = f_state == "coherent" ? truncated_coherent(f_n, f_cutoff)
                                         : f_state == "squeezed"
                                             ? truncated_squeezed(f_n, f_cutoff)
                                             : truncated_tmsv(f_n, f_cutoff);
            tail = probe.tail_mass;
            j = qfi_gamma_fock(probe.state, f_gamma);
        }
        out << "state=" << f_state << " n=" << fmt17(f_n) << " gamma=" << fmt17(f_gamma)
            << " J=" << fmt17(j) << " tail_mass=" << fmt17(tail) << "\n";
    });

    try {
        std::reverse(args.begin(), args.end());
        app.parse(std::move(args));
    } catch (const CLI::CallForHelp&) {
        const auto seen = app.get_subcommands();
        out << (seen.empty() ? app.help() : seen.front()->help());
        return 0;
    } catch (const CLI::CallForAllHelp&) {
        out << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        err << "error: " << e.what() << "\n";
        const auto seen = app.get_subcommands();
        err << (seen.empty() ? app.help() : seen.front()->help());
        return 2;
    } catch (const domain_error& e) {
        err << "error: " << e.what() << "\n";
        return 3;
    }
    return 0;
}

}  // namespace qmet::cli
