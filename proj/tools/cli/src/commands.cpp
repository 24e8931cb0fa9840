#include "dqpt_cli/commands.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>
#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <iostream>
#include <limits>

#include "dqpt/errors.hpp"

namespace dqpt::cli {
namespace {

using nlohmann::json;

constexpr const char* kUnits = "hbar = k_B = 1; energies in model units, times in inverse model-energy units";

std::filesystem::path output_dir(const RunConfig& config, const CommandOptions& options) {
    auto dir = options.output.value_or(config.output_dir);
    std::filesystem::create_directories(dir);
    return dir;
}

std::ofstream open_output(const std::filesystem::path& file) {
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + file.string());
    return out;
}

void write_json(const std::filesystem::path& file, const json& j) {
    auto out = open_output(file);
    out << j.dump(2) << '\n';
}

json real_json(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    return v;
}

json temperature_json(Temperature t) {
    json j;
    j["beta"] = real_json(t.beta());
    j["T"] = t.beta() == 0.0 ? json("inf") : real_json(t.is_zero_temperature() ? 0.0 : 1.0 / t.beta());
    return j;
}

json report_json(const CriticalReport& report) {
    json j;
    j["method"] = report.method;
    j["orthogonality_12"] = report.orthogonality_12;
    j["parallel_02"] = report.parallel_02;
    j["metamorphic_possible"] = report.metamorphic_possible;
    j["critical_momenta"] = json::array();
    for (std::size_t i = 0; i < report.momenta.size(); ++i) {
        const auto& m = report.momenta[i];
        json e;
        e["index"] = i;
        e["k"] = m.k;
        e["cos_k"] = std::cos(m.k);
        e["omega1"] = m.omega1;
        e["dot_12"] = m.dot_12;
        e["cross_02"] = m.cross_02;
        e["thermal_norm"] = m.thermal_norm;
        e["parallel_02"] = m.parallel_02;
        e["ordinary_times"] = m.ordinary_times;
        e["tau_star"] = m.tau_star;
        j["critical_momenta"].push_back(e);
    }
    if (report.tau_match) {
        const auto& t = *report.tau_match;
        j["tau_match"] = {{"matched", t.matched},   {"near", t.near},         {"kc_index", t.kc_index},
                          {"n", t.n},               {"tau_star", t.tau_star}, {"relative_deviation", t.relative_deviation}};
    } else {
        j["tau_match"] = nullptr;
    }
    return j;
}

QuenchSchedule schedule_or_probe(const RunConfig& config) {
    if (config.tau) return build_schedule(config).schedule;
    if (!config.stages) throw ConfigError("config needs a 'model' section with h0, h1, h2");
    return QuenchSchedule(build_dispersion((*config.stages)[0]), build_dispersion((*config.stages)[1]),
                          build_dispersion((*config.stages)[2]), 1.0);
}

void warn_near_tau(const CriticalReport& report, std::ostream& err) {
    if (report.tau_match && report.tau_match->near) {
        const auto& m = *report.tau_match;
        err << fmt::format("warning: tau is within {:.3g} (relative) of tau*_{} = {:.12g} at kc={} but does not match it\n",
                           m.relative_deviation, m.n, m.tau_star, m.kc_index);
    }
}

}  // namespace

std::string format_real(double v) {
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    if (std::isnan(v)) return "nan";
    return fmt::format("{:.16e}", v);
}

void write_rate_csv(const std::filesystem::path& file, const RateCurve& curve) {
    auto out = open_output(file);
    out << "t,g\n";
    for (std::size_t i = 0; i < curve.times.size(); ++i) {
        out << format_real(curve.times[i]) << ',' << format_real(curve.g[i]) << '\n';
    }
}

void write_diagram_csv(const std::filesystem::path& file, const DiagramGrid& grid) {
    auto out = open_output(file);
    out << "x,y,exists\n";
    const std::size_t nx = grid.x.values.size();
    for (std::size_t iy = 0; iy < grid.y.values.size(); ++iy) {
        for (std::size_t ix = 0; ix < nx; ++ix) {
            out << format_real(grid.x.values[ix]) << ',' << format_real(grid.y.values[iy]) << ','
                << (grid.at(ix, iy) ? 1 : 0) << '\n';
        }
    }
}

void write_deviation_csv(const std::filesystem::path& file, std::span<const DeviationSample> samples) {
    auto out = open_output(file);
    out << "epsilon,g_i\n";
    for (const auto& s : samples) out << format_real(s.epsilon) << ',' << format_real(s.g_i) << '\n';
}

std::vector<double> deviation_epsilons(const DeviationConfig& config) {
    std::vector<double> eps;
    if (!config.epsilons.empty()) {
        eps = config.epsilons;
    } else {
        if (!(config.eps_min > 0.0) || !(config.eps_max > config.eps_min) || config.count < 2) {
            throw InvalidParameter("deviation range needs 0 < eps_min < eps_max and count >= 2");
        }
        const double lo = std::log10(config.eps_min);
        const double hi = std::log10(config.eps_max);
        for (std::size_t i = 0; i < config.count; ++i) {
            eps.push_back(std::pow(10.0, lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(config.count - 1)));
        }
        if (config.mirror) {
            const std::size_t n = eps.size();
            for (std::size_t i = 0; i < n; ++i) eps.push_back(-eps[i]);
        }
    }
    for (double e : eps) {
        if (e == 0.0 || !std::isfinite(e)) throw InvalidParameter("deviation offsets must be finite and nonzero");
    }
    return eps;
}

double deviation_slope(std::span<const DeviationSample> samples) {
    double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
    std::size_t n = 0;
    for (const auto& s : samples) {
        if (!std::isfinite(s.g_i) || s.epsilon == 0.0) continue;
        const double x = -std::log(std::abs(s.epsilon));
        sx += x;
        sy += s.g_i;
        sxx += x * x;
        sxy += x * s.g_i;
        ++n;
    }
    if (n < 2) throw InvalidParameter("slope needs at least two finite samples");
    const double dn = static_cast<double>(n);
    return (dn * sxy - sx * sy) / (dn * sxx - sx * sx);
}

int cmd_rate_curve(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    const auto resolved = build_schedule(config);
    const auto temp = build_temperature(config);
    if (config.n_modes < 2) throw InvalidParameter("grid.N must be at least 2");
    const RateJob job{resolved.schedule, temp, config.n_modes, config.pin_critical};
    const auto times = uniform_times(config.t_max, config.n_steps);

    const auto grid = job_grid(job);
    const auto uniform = MomentumGrid::uniform(config.n_modes);
    const auto field = thermal_bloch(job.schedule.h0, temp, grid.points());
    const auto curve = rate_function(job.schedule, field, times, options.threads);
    const auto kinks = detect_kinks(curve, config.kinks);
    const auto report = check_metamorphic_conditions(job.schedule, temp, config.critical);
    warn_near_tau(report, err);

    const auto dir = output_dir(config, options);
    write_rate_csv(dir / "rate.csv", curve);

    json side;
    side["units"] = kUnits;
    side["tau"] = job.schedule.tau;
    side["tau_spec"] = config.tau->describe();
    side["tau_source"] = resolved.symbolic_tau ? "tau_star" : "literal";
    side["tau_match"] = report_json(report)["tau_match"];
    side["metamorphic_possible"] = report.metamorphic_possible;
    side["temperature"] = temperature_json(temp);
    side["n_modes"] = curve.n_modes;
    side["pin_critical"] = config.pin_critical;
    json pinned = json::array();
    for (std::size_t i = 0; i < grid.size(); ++i) {
        if (grid[i] != uniform[i]) pinned.push_back(grid[i]);
    }
    side["pinned_momenta"] = pinned;
    side["t_max"] = config.t_max;
    side["n_steps"] = config.n_steps;
    const bool reached = config.t_max >= job.schedule.tau;
    side["second_quench_reached"] = reached;
    if (!reached) side["note"] = "t_max < tau: the curve covers the first stage only";
    side["kinks"] = kinks;
    std::size_t before = 0;
    for (double t : kinks) before += t < job.schedule.tau ? 1 : 0;
    side["kinks_before_tau"] = before;
    side["kinks_after_tau"] = kinks.size() - before;
    const bool tabulated = job.schedule.h0.as_tabulated() || job.schedule.h1.as_tabulated() ||
                           job.schedule.h2.as_tabulated();
    if (tabulated) {
        side["convergence"] = {{"skipped", "tabulated stages fix the momentum grid"}};
    } else {
        // same curve on a 2N grid; the spread bounds the finite-N error of the Riemann sum
        RateJob doubled = job;
        doubled.n_modes = 2 * job.n_modes;
        const auto fine = run_rate_job(doubled, times, options.threads);
        double spread = 0.0;
        std::size_t compared = 0;
        for (std::size_t i = 0; i < times.size(); ++i) {
            if (!std::isfinite(curve.g[i]) || !std::isfinite(fine.g[i])) continue;
            spread = std::max(spread, std::abs(curve.g[i] - fine.g[i]));
            ++compared;
        }
        side["convergence"] = {{"n_modes_doubled", doubled.n_modes}, {"max_abs_diff", spread}, {"samples", compared}};
    }
    std::size_t infinite = 0;
    for (double g : curve.g) infinite += std::isinf(g) ? 1 : 0;
    side["infinite_samples"] = infinite;

    if (!config.batch.empty()) {
        const auto items = batch_rate_curves(job, config.batch, times, options.threads);
        json manifest = json::array();
        for (std::size_t i = 0; i < items.size(); ++i) {
            json entry;
            entry["index"] = i;
            json ov = json::object();
            for (const auto& [k, v] : config.batch[i].values) ov[k] = real_json(v);
            entry["overrides"] = ov;
            if (items[i].curve) {
                const auto name = fmt::format("rate_{:03d}.csv", i);
                write_rate_csv(dir / name, *items[i].curve);
                entry["file"] = name;
                entry["tau"] = items[i].curve->tau;
            } else {
                entry["error"] = items[i].error;
                err << fmt::format("batch item {}: {}\n", i, items[i].error);
            }
            manifest.push_back(entry);
        }
        write_json(dir / "batch_manifest.json", json{{"items", manifest}});
        side["batch_manifest"] = "batch_manifest.json";
    }
    write_json(dir / "rate.json", side);

    out << fmt::format("rate-curve: {} samples, N = {}, tau = {:.12g} ({}), {} kink(s), {} infinite sample(s) -> {}\n",
                       curve.times.size(), curve.n_modes, job.schedule.tau, side["tau_source"].get<std::string>(),
                       kinks.size(), infinite, (dir / "rate.csv").string());
    return kSuccess;
}

int cmd_critical(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err) {
    const auto schedule = schedule_or_probe(config);
    const auto temp = build_temperature(config);
    const auto report = check_metamorphic_conditions(schedule, temp, config.critical);
    if (config.tau) warn_near_tau(report, err);

    json j = report_json(report);
    if (!config.tau) j["tau_match"] = nullptr;
    j["tau"] = config.tau ? json(schedule.tau) : json(nullptr);
    j["temperature"] = temperature_json(temp);
    j["units"] = kUnits;
    const auto dir = output_dir(config, options);
    write_json(dir / "critical.json", j);

    out << fmt::format("critical: {} critical momentum(s), metamorphic_possible = {}\n", report.momenta.size(),
                       report.metamorphic_possible);
    for (std::size_t i = 0; i < report.momenta.size(); ++i) {
        const auto& m = report.momenta[i];
        out << fmt::format("  kc[{}] = {:.12g} (cos = {:.12g}), omega1 = {:.12g}", i, m.k, std::cos(m.k), m.omega1);
        if (!m.tau_star.empty()) out << fmt::format(", tau*_0 = {:.12g}", m.tau_star.front());
        out << '\n';
    }
    return kSuccess;
}

int cmd_phase_diagram(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream&) {
    if (!config.diagram) throw ConfigError("config needs a 'diagram' section");
    const auto& d = *config.diagram;
    DiagramGrid grid;
    if (d.model == "ssh") {
        grid = ssh_phase_diagram(Axis::linspace("J11/J12", d.r1.min, d.r1.max, d.r1.count),
                                 Axis::linspace("J21/J22", d.r2.min, d.r2.max, d.r2.count), options.threads);
    } else {
        grid = kitaev_phase_diagram(d.m1, d.c1, Axis::linspace("m2", d.m2.min, d.m2.max, d.m2.count),
                                    Axis::linspace("c2", d.c2.min, d.c2.max, d.c2.count), options.threads);
    }
    const auto dir = output_dir(config, options);
    write_diagram_csv(dir / "diagram.csv", grid);
    std::size_t shaded = 0;
    for (auto c : grid.cells) shaded += c;
    out << fmt::format("phase-diagram ({}): {} x {} cells, {} with a critical momentum -> {}\n", d.model,
                       grid.x.values.size(), grid.y.values.size(), shaded, (dir / "diagram.csv").string());
    return kSuccess;
}

int cmd_deviation(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream&) {
    const auto eps = deviation_epsilons(config.deviation);
    const auto schedule = schedule_or_probe(config);
    const auto temp = build_temperature(config);
    const auto report = check_metamorphic_conditions(schedule, temp, config.critical);
    const auto& dv = config.deviation;
    if (dv.kc >= report.momenta.size()) {
        throw InvalidParameter("deviation.kc = " + std::to_string(dv.kc) + " but only " +
                               std::to_string(report.momenta.size()) + " critical momentum(s) exist");
    }
    if (config.n_modes < 2) throw InvalidParameter("grid.N must be at least 2");
    const auto& kc = report.momenta[dv.kc];
    const double tau_star = metamorphic_tau(kc.omega1, dv.n);
    const auto samples = deviation_gi(kc.omega1, tau_star, eps, config.n_modes);

    const auto dir = output_dir(config, options);
    write_deviation_csv(dir / "deviation.csv", samples);
    json side;
    side["units"] = kUnits;
    side["kc_index"] = dv.kc;
    side["k"] = kc.k;
    side["omega1"] = kc.omega1;
    side["n"] = dv.n;
    side["tau_star"] = tau_star;
    side["n_modes"] = config.n_modes;
    std::vector<DeviationSample> positive;
    for (const auto& s : samples) {
        if (s.epsilon > 0.0) positive.push_back(s);
    }
    if (positive.size() >= 2) {
        side["slope_vs_minus_ln_eps"] = deviation_slope(positive);
        side["expected_slope"] = 2.0 / static_cast<double>(config.n_modes);
    }
    write_json(dir / "deviation.json", side);
    out << fmt::format("deviation: {} offsets around tau* = {:.12g} -> {}\n", samples.size(), tau_star,
                       (dir / "deviation.csv").string());
    return kSuccess;
}

int cmd_oracle_check(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream&) {
    const std::size_t draws = options.draws.value_or(config.oracle.draws);
    const std::uint64_t seed = options.seed.value_or(config.oracle.seed);
    if (draws == 0) throw InvalidParameter("oracle check needs at least one draw");

    oracle::ClosedForm closed = oracle::closed_form_amplitude;
    if (options.inject_fault) {
        closed = [](const oracle::StageSamples& s, double tau, Temperature t, double time) {
            return std::conj(oracle::closed_form_amplitude(s, tau, t, time));
        };
    }
    const auto summary = oracle::run_oracle_check(draws, seed, closed, 1e-12, options.threads);

    json j;
    j["draws"] = summary.draws;
    j["seed"] = summary.seed;
    j["threshold"] = summary.threshold;
    j["max_deviation"] = real_json(summary.max_deviation);
    j["max_modulus"] = summary.max_modulus;
    j["passed"] = summary.passed;
    j["fault_injected"] = options.inject_fault;
    const auto& w = summary.worst;
    j["worst"] = {{"model", w.model}, {"k", w.k}, {"beta", real_json(w.beta)}, {"tau", w.tau}, {"t", w.t}};
    const auto dir = output_dir(config, options);
    write_json(dir / "oracle.json", j);
    out << j.dump(2) << '\n';
    return summary.passed ? kSuccess : kVerificationFailure;
}

int run(std::span<const std::string> args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Loschmidt amplitudes, rate functions and metamorphic DQPT conditions for double quenches"};
    app.require_subcommand(1);
    CommandOptions options;
    std::string config_path;
    std::string output;
    std::size_t draws = 0;
    std::uint64_t seed = 0;
    CLI::Option* draws_opt = nullptr;
    CLI::Option* seed_opt = nullptr;

    struct Entry {
        const char* name;
        const char* help;
        int (*fn)(const RunConfig&, const CommandOptions&, std::ostream&, std::ostream&);
        CLI::App* sub = nullptr;
    };
    std::vector<Entry> entries{
        {"rate-curve", "Rate function g(t) on a time grid (rate.csv + rate.json)", cmd_rate_curve},
        {"critical", "Critical momenta, t*_n, tau*_n and metamorphic conditions (critical.json)", cmd_critical},
        {"phase-diagram", "Existence diagram of critical momenta (diagram.csv)", cmd_phase_diagram},
        {"deviation", "Singular contribution g_i for offsets from tau* (deviation.csv)", cmd_deviation},
        {"oracle-check", "Closed forms vs brute-force 2x2 traces over seeded draws (oracle.json)", cmd_oracle_check},
    };
    for (auto& e : entries) {
        e.sub = app.add_subcommand(e.name, e.help);
        e.sub->add_option("config", config_path, "YAML run configuration")->required();
        e.sub->add_option("--threads", options.threads, "Worker cap (default: DQPT_THREADS or all cores)");
        e.sub->add_option("--output,-o", output, "Output directory (overrides the config)");
        if (std::string(e.name) == "oracle-check") {
            draws_opt = e.sub->add_option("--draws", draws, "Number of random draws");
            seed_opt = e.sub->add_option("--seed", seed, "RNG seed");
            e.sub->add_flag("--inject-fault", options.inject_fault, "Corrupt the closed form (harness self-test)")
                ->group("");
        }
    }

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kParseError;
    }

    for (const auto& e : entries) {
        if (!e.sub->parsed()) continue;
        if (!output.empty()) options.output = output;
        if (draws_opt != nullptr && draws_opt->count() > 0) options.draws = draws;
        if (seed_opt != nullptr && seed_opt->count() > 0) options.seed = seed;
        try {
            const auto config = load_config(config_path);
            return e.fn(config, options, out, err);
        } catch (const ConfigError& ex) {
            err << "config error: " << ex.what() << '\n';
            return kParseError;
        } catch (const InvalidParameter& ex) {
            err << "invalid parameters: " << ex.what() << '\n';
            return kInvalidParameters;
        } catch (const LookupError& ex) {
            err << "invalid parameters: " << ex.what() << '\n';
            return kInvalidParameters;
        } catch (const std::exception& ex) {
            err << "error: " << ex.what() << '\n';
            return kVerificationFailure;
        }
    }
    return kParseError;
}

}  // namespace dqpt::cli
