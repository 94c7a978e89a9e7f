#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gradnoise/cli/report.h"
#include "gradnoise/linsys.h"

namespace gradnoise::cli {

enum class SpectrumSource { kList, kFile, kEndpoints };

const char* spectrum_source_name(SpectrumSource source);

struct RunConfig {
  std::string command;
  Method method = Method::kGD;

  std::optional<double> mu;
  std::optional<double> L;
  std::optional<int> d;
  /// Raw --spectrum argument: a comma list or @path.
  std::string spectrum;

  std::optional<double> alpha;
  std::optional<double> beta;
  /// Requested rate for certify.
  std::optional<double> rho;

  std::optional<double> tau;
  std::string tau_grid;
  std::optional<double> eps;
  std::string eps_grid;
  std::optional<int> grid_alpha;
  std::optional<int> grid_beta;
  bool upper_bound = false;
  bool compare_gd = false;
  bool panels = false;

  std::string objective = "quadratic";
  double sigma = 1.0;
  int replicas = 100;
  int kmax = 1000;
  std::optional<int> burnin;
  std::uint64_t seed = 0;
  double delta = 0.1;
  int samples = 2000;
  double kappa = 1e3;
  std::string trajectory;
  int trajectory_replicas = 1;

  OutputFormat format = OutputFormat::kTable;
  std::string out;
};

/// Resolved problem class: an explicit spectrum or the endpoints mu, L with
/// dimension d.
struct Problem {
  SpectrumSource source = SpectrumSource::kEndpoints;
  double mu = 0.0;
  double L = 0.0;
  int d = 0;
  /// Present for explicit spectra.
  std::optional<QuadraticSpectrum> spectrum;
};

/// Parses a sweep: "lo:step:hi", "log:lo:hi:n" or a comma list. Throws
/// kInvalidArgument for malformed or empty ranges.
std::vector<double> parse_grid(const std::string& text);

/// Parses a comma or whitespace separated list of reals.
std::vector<double> parse_list(const std::string& text);

/// Parses argv (without the program name). Throws Error(kInvalidArgument)
/// on malformed input. Returns nullopt when help was requested; the help
/// text is written to help_out.
std::optional<RunConfig> parse_args(const std::vector<std::string>& args,
                                    std::ostream& help_out);

Problem resolve_problem(const RunConfig& config);

struct CommandResult {
  Report report;
  int exit_code = 0;
  /// Set with a nonzero exit code when a report is still produced.
  std::string error_code;
  std::string error_message;
};

/// Runs the subcommand. Throws gradnoise::Error on failures that produce no
/// report.
CommandResult execute(const RunConfig& config);

/// Machine-readable error object written to stderr.
std::string error_json(const std::string& code, const std::string& message,
                       int exit_code);

/// Full front end: parse, execute, write the report to --out or out and
/// errors to err. Returns the process exit code.
int run(const std::vector<std::string>& args, std::ostream& out,
        std::ostream& err);

}  // namespace gradnoise::cli
