#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "dqpt/critical.hpp"
#include "dqpt/loschmidt.hpp"
#include "dqpt/oracle.hpp"
#include "dqpt/sweep.hpp"
#include "dqpt_cli/config.hpp"

namespace dqpt::cli {

enum ExitCode : int {
    kSuccess = 0,
    kVerificationFailure = 1,
    kParseError = 2,
    kInvalidParameters = 3,
};

struct CommandOptions {
    unsigned threads = 0;
    std::optional<std::filesystem::path> output;
    std::optional<std::size_t> draws;
    std::optional<std::uint64_t> seed;
    bool inject_fault = false;  // oracle-check harness self-test
};

/// Decimal with 17 significant digits, or `inf` / `-inf`.
std::string format_real(double v);

void write_rate_csv(const std::filesystem::path& file, const RateCurve& curve);
void write_diagram_csv(const std::filesystem::path& file, const DiagramGrid& grid);
void write_deviation_csv(const std::filesystem::path& file, std::span<const DeviationSample> samples);

/// Log-spaced offsets between eps_min and eps_max (and their negatives when mirrored).
std::vector<double> deviation_epsilons(const DeviationConfig& config);

/// Least-squares slope of g_i against -ln|eps| over the finite samples.
double deviation_slope(std::span<const DeviationSample> samples);

int cmd_rate_curve(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_critical(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_phase_diagram(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_deviation(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err);
int cmd_oracle_check(const RunConfig& config, const CommandOptions& options, std::ostream& out, std::ostream& err);

/// Full command line (without the program name). Returns the process exit code.
int run(std::span<const std::string> args, std::ostream& out, std::ostream& err);

}  // namespace dqpt::cli
