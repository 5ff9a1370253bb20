#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "esense/features.hpp"
#include "esense/forward.hpp"
#include "esense/geometry.hpp"
#include "esense/gpt.hpp"
#include "esense/inversion.hpp"

namespace esense {

/// Feature families used for matching:
///   sd      shape descriptors I1, I2 at each frequency
///   sv      singular values of the first-order PT at each frequency
///   svr     ratios of those singular values to the top-frequency ones
///   pt_imag singular values of Im of the first-order PT, recovered from
///           postprocessed skin data without the background field
enum class FeatureFamily { sd, sv, svr, pt_imag };

FeatureFamily parse_feature_family(const std::string& name);
std::string feature_family_name(FeatureFamily family);

/// One feature vector per frequency.
using FeatureSeries = std::vector<Eigen::VectorXd>;

/// Features of one family computed from per-frequency CGPTs (sd, sv, svr).
FeatureSeries features_from_cgpt(const std::vector<CgptMatrix>& cgpt, FeatureFamily family);
/// pt_imag features from per-frequency Im of the first-order PT.
FeatureSeries features_from_imaginary_pt(const std::vector<Mat2>& im_pt);

struct DictionaryShape {
  std::string name;
  ShapeSpec shape;
  double sigma = 2.0;
  double epsilon = 1.0;
};

/// The eight reference targets at unit diameter: disk, ellipse, A, E,
/// square, rectangle, triangle and a second ellipse with sigma = 5 and
/// epsilon = 2 (the others have sigma = 2, epsilon = 1).
std::vector<DictionaryShape> default_dictionary_shapes();

/// Looks a reference target up by name; throws ValidationError listing the
/// valid names.
DictionaryShape dictionary_shape(const std::string& name);

struct DictionaryEntry {
  std::string name;
  ShapeSpec shape;
  double sigma = 2.0;
  double epsilon = 1.0;
  double scale = 1.0;
  std::vector<CgptMatrix> cgpt;      // per frequency
  std::vector<Eigen::Vector2d> tau;  // per frequency
  std::vector<Eigen::Vector2d> mu;   // per frequency below the top one
  Mat2 i1 = Mat2::Zero();            // descriptors at the first frequency
  Mat2 i2 = Mat2::Zero();
};

struct Dictionary {
  int version = 1;
  std::vector<double> frequencies;
  int order = 2;
  std::vector<DictionaryEntry> entries;

  int size() const { return static_cast<int>(entries.size()); }
  int index_of(const std::string& name) const;
  /// Features of an entry for a family, derived from the stored CGPTs.
  FeatureSeries features(int entry, FeatureFamily family) const;
  /// Copy restricted to a subset of the frequency grid.
  Dictionary select_frequencies(const std::vector<int>& indices) const;
};

struct DictionaryOptions {
  std::vector<double> frequencies{1, 2, 3, 4, 5, 6, 7, 8, 9, 10};
  int order = 2;
  double scale = 0.3;
  int nodes = 512;
};

Dictionary build_dictionary(const std::vector<DictionaryShape>& shapes, const DictionaryOptions& options);

/// Contrast of an entry at a given angular frequency.
Contrast entry_contrast(const DictionaryEntry& e, double omega);

struct MatchResult {
  std::vector<double> scores;
  int winner = -1;
  FeatureFamily family = FeatureFamily::sv;
};

/// Precomputed dictionary features for repeated matching.
class Matcher {
 public:
  Matcher(const Dictionary& dictionary, FeatureFamily family);
  MatchResult match(const FeatureSeries& query) const;
  FeatureFamily family() const { return family_; }

 private:
  FeatureFamily family_;
  std::vector<FeatureSeries> reference_;
};

/// e_n = sum_f ||q_n^(f) - q^(f)||^2, winner = argmin with ties to the
/// lowest index.
MatchResult match(const FeatureSeries& query, const Dictionary& dictionary, FeatureFamily family);

/// Adds eps * (W1 + i W2) with standard Gaussian W1, W2 and
/// eps = level * (max Re Q - min Re Q).
Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& q, double level, std::mt19937_64& rng);
/// Real variant: eps * W with eps = level * (max - min).
Eigen::MatrixXd add_noise(const Eigen::MatrixXd& y, double level, std::mt19937_64& rng);
/// Noise on every frequency of a measurement set with a seeded generator.
MeasurementSet add_noise(const MeasurementSet& data, double level, std::uint64_t seed);

/// Geometry of the simulated experiment around one target.
struct SimulationSetup {
  TrajectoryOptions trajectory;
  double xi = 0.0;
  int target_nodes = 256;
  double target_angle = 0.0;
  Vec2 target_location = Vec2::Zero();
};

/// Simulated noiseless measurements of a dictionary entry used as target.
MeasurementSet simulate_entry(const DictionaryEntry& entry, const std::vector<double>& frequencies,
                              const std::vector<FishPose>& poses, const SimulationSetup& setup);

/// Data reduction for one feature family: noise is added to clean data,
/// the CGPTs (or Im PT) are recovered and features are formed.
class RecoveryPipeline {
 public:
  /// `order` is the CGPT recovery order (ignored by pt_imag). pt_imag uses
  /// `background` when given and computes it otherwise.
  RecoveryPipeline(const MeasurementSet& clean, FeatureFamily family, int order,
                   const BackgroundField* background = nullptr);

  FeatureFamily family() const { return family_; }
  int order() const { return order_; }

  /// Features of the noiseless data.
  FeatureSeries features() const;
  /// Features after adding noise at `level` with the given generator.
  FeatureSeries noisy_features(double level, std::mt19937_64& rng) const;
  /// Features of externally supplied data matrices (one per frequency).
  FeatureSeries features_from(const std::vector<Eigen::MatrixXcd>& q) const;

  std::vector<CgptMatrix> recover(const std::vector<Eigen::MatrixXcd>& q) const;
  std::vector<Mat2> recover_imaginary(const std::vector<Eigen::MatrixXd>& y) const;

  const std::vector<Eigen::MatrixXcd>& clean_data() const { return q_; }
  const std::vector<Eigen::MatrixXd>& clean_imaginary_data() const { return y_; }

 private:
  FeatureFamily family_;
  int order_;
  std::vector<Eigen::MatrixXcd> q_;
  std::vector<LinearForwardMap> maps_;
  std::vector<Eigen::MatrixXd> y_;
  std::vector<ImaginaryPtFit> fits_;
};

/// Recovery order used for each family: sd needs the order-2 diagonal
/// block and therefore K = 3; sv, svr and pt_imag use K = 1.
int default_recovery_order(FeatureFamily family);

struct StabilityOptions {
  FeatureFamily family = FeatureFamily::sv;
  std::vector<double> noise_levels;
  int trials = 1000;
  std::uint64_t seed = 1;
  bool stop_at_chance = true;
};

struct StabilityRow {
  double noise_level = 0.0;
  std::string target;
  int trials = 0;
  int detections = 0;
  double rate() const { return trials > 0 ? static_cast<double>(detections) / trials : 0.0; }
};

/// Detection probability at a noise level averaged over targets.
double mean_rate(const std::vector<StabilityRow>& rows, double noise_level);

/// Generator for one trial; depends only on (seed, level, target, trial), so
/// results do not depend on the number of threads.
std::mt19937_64 trial_rng(std::uint64_t seed, double level, int target, int trial);

/// Monte Carlo detection rates. pipelines[t] holds the clean data of
/// dictionary entry t. Levels are processed in order; after each level
/// `on_level` receives its rows, and the sweep stops once the mean
/// detection rate drops to chance (1 / dictionary size).
std::vector<StabilityRow> stability_sweep(
    const Dictionary& dictionary, const std::vector<RecoveryPipeline>& pipelines,
    const StabilityOptions& options,
    const std::function<void(const std::vector<StabilityRow>&)>& on_level = {});

}  // namespace esense
