#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "dqpt/critical.hpp"
#include "dqpt/loschmidt.hpp"
#include "dqpt/model.hpp"
#include "dqpt/sweep.hpp"
#include "dqpt/thermal.hpp"

namespace dqpt::cli {

/// Malformed or missing configuration (exit code 2).
class ConfigError : public std::runtime_error {
  public:
    explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

struct StageConfig {
    DispersionKind kind = DispersionKind::Ssh;
    SshParams ssh;
    KitaevParams kitaev;
    std::filesystem::path table;
};

/// Literal tau, or `tau_star:n=<int>,kc=<index>`.
struct TauSpec {
    std::optional<double> literal;
    int n = 0;
    std::size_t kc = 0;

    bool symbolic() const { return !literal.has_value(); }
    std::string describe() const;
};

TauSpec parse_tau_spec(const std::string& text);

struct AxisConfig {
    double min = 0.0;
    double max = 1.0;
    std::size_t count = 201;
};

struct DiagramConfig {
    std::string model;  // "ssh" or "kitaev"
    AxisConfig r1{0.1, 3.0, 201};
    AxisConfig r2{0.1, 3.0, 201};
    double m1 = 0.2;
    double c1 = 5.0;
    AxisConfig c2{-4.0, 4.0, 201};
    AxisConfig m2{-4.0, 4.0, 201};
};

struct DeviationConfig {
    std::size_t kc = 0;
    int n = 0;
    std::vector<double> epsilons;  // explicit list; empty means log-spaced
    double eps_min = 1e-6;
    double eps_max = 1e-1;
    std::size_t count = 61;
    bool mirror = false;
};

struct OracleConfig {
    std::size_t draws = 10000;
    std::uint64_t seed = 20240601;
};

/// Parsed run configuration. Sections are optional; commands check what they need.
struct RunConfig {
    std::filesystem::path source_dir;
    std::optional<std::array<StageConfig, 3>> stages;
    std::optional<double> beta;  // +inf encodes T = 0
    std::optional<TauSpec> tau;
    std::size_t n_modes = 1000;
    bool pin_critical = true;
    double t_max = 10.0;
    std::size_t n_steps = 2001;
    std::filesystem::path output_dir = ".";
    CriticalOptions critical;
    KinkOptions kinks;
    std::optional<DiagramConfig> diagram;
    DeviationConfig deviation;
    OracleConfig oracle;
    std::vector<ScheduleOverride> batch;
};

/// Parses YAML text; relative paths resolve against `source_dir`.
RunConfig parse_config(const std::string& text, const std::filesystem::path& source_dir = ".");
RunConfig load_config(const std::filesystem::path& file);

/// Parses "inf", "+inf", ".inf" or a decimal number.
double parse_extended_real(const std::string& text);

BlochDispersion build_dispersion(const StageConfig& stage);
Temperature build_temperature(const RunConfig& config);

struct ResolvedSchedule {
    QuenchSchedule schedule;
    bool symbolic_tau = false;
};

/// Builds the schedule, resolving a symbolic tau from the critical report.
ResolvedSchedule build_schedule(const RunConfig& config);

/// Reads a `k,e,delta,nx,ny,nz` CSV into a tabulated dispersion.
TabulatedDispersion load_table(const std::filesystem::path& file);

}  // namespace dqpt::cli
