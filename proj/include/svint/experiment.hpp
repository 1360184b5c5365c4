#pragma once

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "svint/analysis.hpp"

namespace svint {

struct ExperimentConfig {
  std::string study = "simulate";
  std::string model = "oscillator";
  std::map<std::string, double> model_params;
  std::vector<std::string> integrators = {"svi"};
  double h = 0.01;
  double t0 = 0.0;
  double t1 = 1.0;
  int paths = 100;
  std::uint64_t seed = 0;
  std::string out = "out";
  int threads = 1;
  int level_lo = 4;
  int level_hi = 8;
  int ref_level = 12;
  double fd_step = 1e-5;
  int samples = 100;
  StepperConfig stepper() const;
};

// key = value lines, '#' comments, dotted keys for model parameters.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);
void apply_override(ExperimentConfig& cfg, const std::string& key,
                    const std::string& value);
void validate_config(const ExperimentConfig& cfg);

// Canonical serialization, one key = value per line, sorted, defaults
// included. Parses back to an identical config.
std::string serialize_config(const ExperimentConfig& cfg);

// FNV-1a over the canonical serialization with out and threads excluded.
std::string config_hash(const ExperimentConfig& cfg);

// Runs the configured study and writes its CSVs and summary under cfg.out.
// Throws on any error; on failure the caller is responsible for the FAILED
// marker.
void run_experiment(const ExperimentConfig& cfg);

} // namespace svint
