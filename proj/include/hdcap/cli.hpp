#pragma once

// Command-line front end: curve, lowsnr and simulate subcommands. Output is
// CSV with a fixed header or versioned JSON. dB at the boundary, linear inside.

#include <hdcap/channel.hpp>
#include <hdcap/errors.hpp>
#include <hdcap/metrics.hpp>
#include <hdcap/oofsk.hpp>
#include <hdcap/psk.hpp>
#include <hdcap/simcheck.hpp>

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <functional>
#include <iomanip>
#include <limits>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

namespace hdcap {

enum ExitCode : int { kExitOk = 0, kExitUsage = 1, kExitNumeric = 2, kExitDeviation = 3 };

struct RunConfig {
    std::string scheme = "psk";  ///< psk, oofsk or fsk
    int m = 2;
    std::optional<double> nu;
    std::string channel = "awgn";  ///< awgn, coherent or rician
    std::optional<double> k;
    double omega = 1.0;
    std::optional<double> d;
    std::optional<double> gamma_sq;
    double snr_min_db = kDefaultGridMinDb;
    double snr_max_db = kDefaultGridMaxDb;
    int points = kDefaultGridPoints;
    std::optional<double> snr_db;
    std::uint64_t trials = 1000000;
    std::uint64_t seed = 42;
    std::string output = "csv";
    bool quiet = false;
    std::vector<int> m_list{2, 4, 8, 16, 32};
};

namespace cli_detail {

template <class T>
void read_key(const nlohmann::json& j, const char* key, T& dst) {
    if (j.contains(key)) dst = j.at(key).get<T>();
}

template <class T>
void read_key(const nlohmann::json& j, const char* key, std::optional<T>& dst) {
    if (j.contains(key) && !j.at(key).is_null()) dst = j.at(key).get<T>();
}

inline RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw UsageError("cannot open config file " + path);
    RunConfig cfg;
    try {
        const nlohmann::json j = nlohmann::json::parse(in);
        static const std::vector<std::string> known{
            "scheme", "m",     "nu",     "channel", "k",      "omega", "d",     "gamma_sq", "snr_min_db",
            "snr_max_db", "points", "snr_db", "trials", "seed", "output", "quiet", "m_list"};
        for (const auto& [key, value] : j.items()) {
            if (std::find(known.begin(), known.end(), key) == known.end()) {
                throw UsageError("unknown config key '" + key + "'");
            }
        }
        read_key(j, "scheme", cfg.scheme);
        read_key(j, "m", cfg.m);
        read_key(j, "nu", cfg.nu);
        read_key(j, "channel", cfg.channel);
        read_key(j, "k", cfg.k);
        read_key(j, "omega", cfg.omega);
        read_key(j, "d", cfg.d);
        read_key(j, "gamma_sq", cfg.gamma_sq);
        read_key(j, "snr_min_db", cfg.snr_min_db);
        read_key(j, "snr_max_db", cfg.snr_max_db);
        read_key(j, "points", cfg.points);
        read_key(j, "snr_db", cfg.snr_db);
        read_key(j, "trials", cfg.trials);
        read_key(j, "seed", cfg.seed);
        read_key(j, "output", cfg.output);
        read_key(j, "quiet", cfg.quiet);
        read_key(j, "m_list", cfg.m_list);
    } catch (const nlohmann::json::exception& e) {
        throw UsageError("bad config file " + path + ": " + e.what());
    }
    return cfg;
}

inline ChannelSpec build_channel(const RunConfig& cfg) {
    ChannelKind kind;
    if (cfg.channel == "awgn") {
        kind = ChannelKind::Awgn;
    } else if (cfg.channel == "coherent") {
        kind = ChannelKind::CoherentFading;
    } else if (cfg.channel == "rician") {
        kind = ChannelKind::NoncoherentRician;
    } else {
        throw UsageError("unknown channel '" + cfg.channel + "' (awgn, coherent, rician)");
    }
    if (kind == ChannelKind::Awgn) {
        if (cfg.k || cfg.gamma_sq) throw UsageError("--k and --gamma-sq do not apply to AWGN");
        return ChannelSpec::awgn(cfg.d.value_or(1.0));
    }
    if (cfg.k) {
        if (cfg.d || cfg.gamma_sq) throw UsageError("give either --k or --d/--gamma-sq, not both");
        return ChannelSpec::from_k_factor(kind, *cfg.k, cfg.omega);
    }
    if (!cfg.d || !cfg.gamma_sq) {
        throw UsageError("fading channels need --k or both --d and --gamma-sq");
    }
    return kind == ChannelKind::CoherentFading ? ChannelSpec::coherent(*cfg.d, *cfg.gamma_sq)
                                               : ChannelSpec::noncoherent(*cfg.d, *cfg.gamma_sq);
}

inline Scheme build_scheme(const RunConfig& cfg) {
    if (cfg.scheme == "psk") {
        if (cfg.nu) throw UsageError("--nu does not apply to PSK");
        PskConfig p{cfg.m};
        p.validate();
        return p;
    }
    if (cfg.scheme == "fsk") {
        if (cfg.nu && *cfg.nu != 1.0) throw UsageError("FSK has duty cycle 1; use --scheme oofsk");
        OofskConfig o{cfg.m, 1.0};
        o.validate();
        return o;
    }
    if (cfg.scheme == "oofsk") {
        if (!cfg.nu) throw UsageError("OOFSK needs --nu");
        OofskConfig o{cfg.m, *cfg.nu};
        o.validate();
        return o;
    }
    throw UsageError("unknown scheme '" + cfg.scheme + "' (psk, oofsk, fsk)");
}

inline void check_output(const RunConfig& cfg) {
    if (cfg.output != "csv" && cfg.output != "json") {
        throw UsageError("unknown output format '" + cfg.output + "' (csv, json)");
    }
}

inline nlohmann::json config_json(const RunConfig& cfg, const ChannelSpec& spec) {
    nlohmann::json j{{"scheme", cfg.scheme}, {"m", cfg.m},       {"channel", cfg.channel},
                     {"d", spec.d},          {"gamma_sq", spec.gamma_sq}};
    if (cfg.scheme == "oofsk") j["nu"] = *cfg.nu;
    if (cfg.scheme == "fsk") j["nu"] = 1.0;
    return j;
}

/// Finite doubles as numbers, infinities as null.
inline nlohmann::json number(double v) {
    if (std::isfinite(v)) return v;
    return nullptr;
}

inline std::ostream& full_precision(std::ostream& os) {
    return os << std::setprecision(std::numeric_limits<double>::max_digits10);
}

inline int cmd_curve(const RunConfig& cfg, std::ostream& out) {
    const ChannelSpec spec = build_channel(cfg);
    const Scheme scheme = build_scheme(cfg);
    const SweepResult res =
        sweep(scheme, spec, snr_grid_db(cfg.snr_min_db, cfg.snr_max_db, cfg.points));
    const double snr_at_min_db = linear_to_db(res.snr_at_min);
    if (cfg.output == "json") {
        nlohmann::json j{{"schema", 1}, {"command", "curve"}, {"config", config_json(cfg, spec)}};
        if (!cfg.quiet) {
            j["points"] = nlohmann::json::array();
            for (const auto& p : res.points) {
                j["points"].push_back({{"snr_db", linear_to_db(p.snr)},
                                       {"rate_nats", p.rate_nats},
                                       {"spectral_eff", p.spectral_eff},
                                       {"eb_n0_db", number(p.eb_n0_db)}});
            }
        }
        j["summary"] = {{"min_eb_db", number(res.min_eb_db)},
                        {"se_at_min", res.se_at_min},
                        {"snr_at_min_db", snr_at_min_db}};
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    full_precision(out);
    if (!cfg.quiet) {
        out << "snr_db,rate_nats,spectral_eff,eb_n0_db\n";
        for (const auto& p : res.points) {
            out << linear_to_db(p.snr) << ',' << p.rate_nats << ',' << p.spectral_eff << ','
                << p.eb_n0_db << '\n';
        }
    }
    out << "# min_eb_db=" << res.min_eb_db << ",se_at_min=" << res.se_at_min
        << ",snr_at_min_db=" << snr_at_min_db << '\n';
    return kExitOk;
}

inline int cmd_lowsnr(const RunConfig& cfg, std::ostream& out) {
    if (cfg.scheme != "psk") throw UsageError("lowsnr is defined for PSK only");
    if (cfg.nu) throw UsageError("--nu does not apply to PSK");
    if (cfg.m_list.empty()) throw UsageError("--m-list is empty");
    const ChannelSpec spec = build_channel(cfg);
    struct Row {
        std::string m;
        LowSnrSummary s;
    };
    std::vector<Row> rows;
    for (int m : cfg.m_list) {
        const PskConfig p{m};
        p.validate();
        rows.push_back({std::to_string(m), psk_lowsnr(p, spec)});
    }
    rows.push_back({"inf", psk_lowsnr_asymptotic(spec)});
    const Row* best = &rows.front();
    for (const auto& r : rows) {
        if (r.s.eb_n0_zero_se_db < best->s.eb_n0_zero_se_db) best = &r;
    }
    if (cfg.output == "json") {
        nlohmann::json j{{"schema", 1}, {"command", "lowsnr"}, {"config", config_json(cfg, spec)}};
        if (!cfg.quiet) {
            j["rows"] = nlohmann::json::array();
            for (const auto& r : rows) {
                j["rows"].push_back({{"m", r.m},
                                     {"c_dot0", r.s.c_dot0},
                                     {"c_ddot0", number(r.s.c_ddot0.value())},
                                     {"c_ddot0_infinite", r.s.c_ddot0.is_infinite()},
                                     {"eb_zero_se_db", number(r.s.eb_n0_zero_se_db)},
                                     {"s0", r.s.s0}});
            }
        }
        j["summary"] = {{"best_m", best->m}, {"eb_zero_se_db", number(best->s.eb_n0_zero_se_db)}};
        out << j.dump(2) << '\n';
        return kExitOk;
    }
    full_precision(out);
    if (!cfg.quiet) {
        out << "m,c_dot0,c_ddot0,eb_zero_se_db,s0\n";
        for (const auto& r : rows) {
            out << r.m << ',' << r.s.c_dot0 << ',' << r.s.c_ddot0.value() << ','
                << r.s.eb_n0_zero_se_db << ',' << r.s.s0 << '\n';
        }
    }
    out << "# best_m=" << best->m << ",eb_zero_se_db=" << best->s.eb_n0_zero_se_db << '\n';
    return kExitOk;
}

inline int cmd_simulate(const RunConfig& cfg, std::ostream& out) {
    if (!cfg.snr_db) throw UsageError("simulate needs --snr-db");
    if (cfg.trials < 1) throw UsageError("--trials must be at least 1");
    const ChannelSpec spec = build_channel(cfg);
    const Scheme scheme = build_scheme(cfg);
    const double snr = db_to_linear(*cfg.snr_db);
    const SimReport report = std::holds_alternative<PskConfig>(scheme)
                                 ? simulate_psk(std::get<PskConfig>(scheme), spec, snr, cfg.trials, cfg.seed)
                                 : simulate_oofsk(std::get<OofskConfig>(scheme), spec, snr, cfg.trials, cfg.seed);
    if (cfg.output == "json") {
        nlohmann::json j = to_json(report);
        j["command"] = "simulate";
        j["config"] = config_json(cfg, spec);
        j["config"]["snr_db"] = *cfg.snr_db;
        if (cfg.quiet) {
            j.erase("counts");
            j.erase("empirical");
            j.erase("analytic");
        }
        out << j.dump(2) << '\n';
    } else {
        full_precision(out);
        if (!cfg.quiet) {
            out << "input,output,count,empirical,analytic\n";
            for (std::size_t x = 0; x < report.counts.size(); ++x) {
                for (std::size_t y = 0; y < report.counts[x].size(); ++y) {
                    out << x << ',' << y << ',' << report.counts[x][y] << ',' << report.empirical[x][y]
                        << ',' << report.analytic[x][y] << '\n';
                }
            }
        }
        out << "# max_abs_dev=" << report.max_abs_dev << ",sigma_bound=" << report.sigma_bound
            << ",max_z=" << report.max_z << ",passed=" << (report.passed() ? "true" : "false") << '\n';
    }
    return report.passed() ? kExitOk : kExitDeviation;
}

}  // namespace cli_detail

/// Parses argv and runs one subcommand. Returns the process exit code:
/// 0 success, 1 usage error, 2 numeric failure, 3 simulation deviation.
inline int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Hard-decision PSK and OOFSK capacity and bit-energy tool", "hdcap"};
    app.require_subcommand(1);

    RunConfig flags;
    std::string config_path;
    std::vector<std::pair<CLI::Option*, std::function<void(RunConfig&)>>> bound;

    const auto add_common = [&](CLI::App* sub) {
        const auto bind = [&](CLI::Option* opt, auto member) {
            bound.emplace_back(opt, [&flags, member](RunConfig& c) { c.*member = flags.*member; });
        };
        bind(sub->add_option("--scheme", flags.scheme, "psk, oofsk or fsk"), &RunConfig::scheme);
        bind(sub->add_option("--m", flags.m, "constellation size / number of tones"), &RunConfig::m);
        bind(sub->add_option("--nu", flags.nu, "OOFSK duty cycle in (0, 1]"), &RunConfig::nu);
        bind(sub->add_option("--channel", flags.channel, "awgn, coherent or rician"), &RunConfig::channel);
        bind(sub->add_option("--k", flags.k, "Rician factor d^2/gamma^2"), &RunConfig::k);
        bind(sub->add_option("--omega", flags.omega, "total channel power with --k"), &RunConfig::omega);
        bind(sub->add_option("--d", flags.d, "line-of-sight gain"), &RunConfig::d);
        bind(sub->add_option("--gamma-sq", flags.gamma_sq, "diffuse gain variance"), &RunConfig::gamma_sq);
        bind(sub->add_option("--output", flags.output, "csv or json"), &RunConfig::output);
        bind(sub->add_flag("--quiet", flags.quiet, "summary only"), &RunConfig::quiet);
        sub->add_option("--config", config_path, "JSON file with RunConfig fields")
            ->check(CLI::ExistingFile);
        return bind;
    };

    auto* curve = app.add_subcommand("curve", "rate and bit energy over an SNR grid");
    {
        auto bind = add_common(curve);
        bind(curve->add_option("--snr-min-db", flags.snr_min_db), &RunConfig::snr_min_db);
        bind(curve->add_option("--snr-max-db", flags.snr_max_db), &RunConfig::snr_max_db);
        bind(curve->add_option("--points", flags.points), &RunConfig::points);
    }
    auto* lowsnr = app.add_subcommand("lowsnr", "zero-SNR derivatives, bit energy and wideband slope");
    {
        auto bind = add_common(lowsnr);
        bind(lowsnr->add_option("--m-list", flags.m_list, "comma-separated constellation sizes")
                 ->delimiter(','),
             &RunConfig::m_list);
    }
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo check of the transition law");
    {
        auto bind = add_common(simulate);
        bind(simulate->add_option("--snr-db", flags.snr_db), &RunConfig::snr_db);
        bind(simulate->add_option("--trials", flags.trials), &RunConfig::trials);
        bind(simulate->add_option("--seed", flags.seed), &RunConfig::seed);
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        RunConfig cfg = config_path.empty() ? RunConfig{} : cli_detail::load_config(config_path);
        for (const auto& [opt, apply] : bound) {
            if (opt->count() > 0) apply(cfg);
        }
        cli_detail::check_output(cfg);
        if (curve->parsed()) return cli_detail::cmd_curve(cfg, out);
        if (lowsnr->parsed()) return cli_detail::cmd_lowsnr(cfg, out);
        return cli_detail::cmd_simulate(cfg, out);
    } catch (const UsageError& e) {
        err << "usage error: " << e.what() << '\n';
        return kExitUsage;
    } catch (const DomainError& e) {
        err << "invalid parameter: " << e.what() << '\n';
        return kExitUsage;
    } catch (const NumericError& e) {
        err << "numeric failure: " << e.what() << '\n';
        return kExitNumeric;
    }
}

}  // namespace hdcap
