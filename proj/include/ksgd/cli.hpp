#pragma once

// Subcommands of the ksgd executable. Each returns the process exit code:
//   0 completed / all checks pass, 1 configuration or input error,
//   2 blow-up detected, 3 any other run failure, 4 hypothesis failure.

#include <filesystem>
#include <iosfwd>

namespace ksgd {

enum ExitCode : int {
    kExitOk = 0,
    kExitConfig = 1,
    kExitBlowUp = 2,
    kExitFailure = 3,
    kExitHypothesis = 4,
};

struct CliOptions {
    bool dense = false;
    int threads = 0;  ///< 0 selects the hardware concurrency
};

/// Writes series.csv, final.snap and outcome.txt into out_dir.
int cmd_run(const std::filesystem::path& config, const std::filesystem::path& out_dir, const CliOptions& options,
            std::ostream& out, std::ostream& err);

/// Writes sweep.csv (and q1_matrix.csv for a source.gamma x source.c grid);
/// with dense output also run_<k>/ per combination.
int cmd_sweep(const std::filesystem::path& config, const std::filesystem::path& out_dir, const CliOptions& options,
              std::ostream& out, std::ostream& err);

/// Prints the hypothesis report and derived constants.
int cmd_check(const std::filesystem::path& config, std::ostream& out, std::ostream& err);

/// Renders series.csv or sweep.csv (detected from the header) to a PPM image.
int cmd_plot(const std::filesystem::path& csv, const std::filesystem::path& image, std::ostream& err);

}  // namespace ksgd
