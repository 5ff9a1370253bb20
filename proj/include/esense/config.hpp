#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "esense/classifier.hpp"
#include "esense/geometry.hpp"

namespace esense {

/// Every knob of an experiment. Defaults reproduce the reference setup:
/// 20 poses, 128 receptors, orbit radius 1, targets of size 0.3 at the
/// origin, 10 frequencies 1..10.
struct ExperimentConfig {
  TrajectoryOptions trajectory;

  // Target used by `simulate`.
  std::string target = "ellipse";  // dictionary name or "custom"
  std::string target_file;         // polyline for custom targets
  double target_sigma = 0.0;       // 0 keeps the dictionary value
  double target_epsilon = -1.0;    // negative keeps the dictionary value
  double target_angle = 0.0;
  Vec2 target_location = Vec2::Zero();

  double scale = 0.3;
  int target_nodes = 256;
  int dictionary_nodes = 512;
  std::vector<double> frequencies{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int order = 2;     // CGPT order stored in the dictionary
  int sv_order = 1;  // recovery order for sv and svr
  int sd_order = 3;  // recovery order for sd
  double xi = 0.0;

  FeatureFamily family = FeatureFamily::sv;
  std::vector<double> noise{0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5, 1.75, 2.0};
  int trials = 1000;
  std::uint64_t seed = 1;
  int threads = 0;  // 0 keeps the OpenMP default

  /// Sets one key from its textual value; throws ValidationError for unknown
  /// keys or malformed values.
  void set(const std::string& key, const std::string& value);
  /// Checks cross-field preconditions before any computation.
  void validate() const;
  /// Canonical "key = value" listing of every field, sorted by key.
  std::string canonical() const;
  /// 16-hex-digit FNV-1a hash of canonical().
  std::string hash() const;

  int recovery_order(FeatureFamily f) const;
  DictionaryOptions dictionary_options() const;
  SimulationSetup simulation_setup() const;
  /// Dictionary shape for the configured target, with overrides applied.
  DictionaryShape target_shape() const;
};

/// Reads a TOML-style file: `key = value` lines, `#` comments, optional
/// quotes around strings and `[a, b, ...]` lists. Section headers are
/// ignored.
ExperimentConfig load_config(const std::string& path, ExperimentConfig base = {});

/// Parses "a,b,c" or "[a, b, c]" into numbers.
std::vector<double> parse_number_list(const std::string& text);

}  // namespace esense
