#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "fgsgd/checkpoint.hpp"
#include "fgsgd/optimizer.hpp"
#include "fgsgd/tinynet.hpp"
#include "fgsgd/trainer.hpp"

namespace fgsgd {

inline constexpr int kExitOk = 0;
inline constexpr int kExitCheckFailed = 1;
inline constexpr int kExitInputError = 2;

// Overrides the root directory that relative run directories are placed under.
inline constexpr const char* kOutputRootEnv = "FGSGD_OUTPUT_ROOT";

struct DataSource {
  // Synthetic blobs unless `csv` is set.
  std::size_t classes = 0;
  std::size_t per_class = 0;
  double spread = 1.0;
  std::uint64_t seed = 0;
  std::optional<std::filesystem::path> csv;  // resolved against the config's directory
};

struct ExperimentConfig {
  std::uint64_t seed = 0;
  NetSpec net;
  DataSource data;
  std::vector<LayoutChoice> layouts;  // one per layer
  OptConfig optimizer;
  TrainOptions train;
  double lambda_momentum = 0.9;
  std::filesystem::path output;
  nlohmann::json effective;  // the parsed config with overrides applied
};

/// Parses a JSON config. Syntax errors and invalid values raise InputError whose
/// message starts with "<source>:<line>:"; value errors also name the JSON pointer.
/// `seed_override` replaces the top-level seed (and every seed derived from it).
ExperimentConfig parse_config(const std::string& text, const std::string& source,
                              const std::filesystem::path& base_dir,
                              std::optional<std::uint64_t> seed_override = std::nullopt);
ExperimentConfig load_config(const std::filesystem::path& path,
                             std::optional<std::uint64_t> seed_override = std::nullopt);

Dataset load_dataset(const ExperimentConfig& config);

// `config.output` placed under $FGSGD_OUTPUT_ROOT when that is set.
std::filesystem::path resolve_output_dir(const ExperimentConfig& config);

std::string metrics_header();
std::string metrics_row(const EpochMetrics& m);

struct RunResult {
  std::filesystem::path dir;
  std::vector<EpochMetrics> metrics;
  Model model;
};

/// Trains for config.optimizer.epochs epochs and writes config.json, layout.json,
/// metrics.csv (flushed per epoch) and the final checkpoint into the run directory.
RunResult run_experiment(const ExperimentConfig& config);

struct GradcheckReport {
  struct Sweep {
    double h = 0.0;
    double max_rel_error = 0.0;
  };
  double max_rel_error = 0.0;  // at h = 1e-5
  std::vector<Sweep> sweep;    // h in {1e-4, 1e-5, 1e-6}
  std::size_t coordinates = 0;
};

inline constexpr double kGradcheckTolerance = 1e-5;
// Gradient magnitudes below this are compared in absolute terms.
inline constexpr double kGradcheckFloor = 1e-3;

/// Central-difference check of tinynet::backward over every weight coordinate
/// for `draws` random weight draws (seeds seed, seed+1, ...).
/// `corrupt` perturbs the analytic gradient; it exists to test the failure path.
GradcheckReport gradient_check(std::span<const LayerShape> shapes,
                               std::span<const std::vector<double>> batch,
                               std::span<const int> labels, std::uint64_t seed,
                               std::size_t draws = 10, bool corrupt = false);

/// Per-member and per-group norms plus the bound flags of every group.
nlohmann::json norm_report(const Checkpoint& ckpt);

/// The three generalization-bound functionals evaluated on the checkpoint's group norms.
nlohmann::json bounds_report(const Checkpoint& ckpt, std::size_t samples, double width);

int cmd_train(const std::filesystem::path& config, std::optional<std::uint64_t> seed,
              std::ostream& out, std::ostream& err);
int cmd_gradcheck(const std::filesystem::path& config, std::ostream& out, std::ostream& err,
                  bool corrupt = false);
int cmd_norms(const std::filesystem::path& checkpoint, std::ostream& out, std::ostream& err);
int cmd_bounds(const std::filesystem::path& checkpoint, std::size_t samples, double width,
               std::ostream& out, std::ostream& err);

}  // namespace fgsgd
