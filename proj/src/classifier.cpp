#include "esense/classifier.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <limits>

#include "parallel.hpp"

namespace esense {

FeatureFamily parse_feature_family(const std::string& name) {
  if (name == "sd") return FeatureFamily::sd;
  if (name == "sv") return FeatureFamily::sv;
  if (name == "svr") return FeatureFamily::svr;
  if (name == "pt-imag" || name == "pt_imag") return FeatureFamily::pt_imag;
  throw ValidationError("unknown feature family '" + name + "' (valid: sd, sv, svr, pt-imag)");
}

std::string feature_family_name(FeatureFamily family) {
  switch (family) {
    case FeatureFamily::sd: return "sd";
    case FeatureFamily::sv: return "sv";
    case FeatureFamily::svr: return "svr";
    case FeatureFamily::pt_imag: return "pt-imag";
  }
  return "?";
}

FeatureSeries features_from_cgpt(const std::vector<CgptMatrix>& cgpt, FeatureFamily family) {
  if (cgpt.empty()) throw ValidationError("features: no frequencies");
  FeatureSeries out;
  switch (family) {
    case FeatureFamily::sd:
      for (const CgptMatrix& m : cgpt) {
        const ShapeDescriptors d = shape_descriptors(m);
        Eigen::VectorXd v(8);
        v << d.i1.reshaped<Eigen::RowMajor>(), d.i2.reshaped<Eigen::RowMajor>();
        out.push_back(v);
      }
      break;
    case FeatureFamily::sv:
    case FeatureFamily::svr: {
      std::vector<CMat2> pts;
      for (const CgptMatrix& m : cgpt) pts.push_back(m.first_order());
      const PtSpectrum spec = pt_spectrum(pts, family == FeatureFamily::svr);
      if (family == FeatureFamily::sv) {
        for (const Eigen::Vector2d& t : spec.tau) out.push_back(t);
      } else {
        if (spec.mu.empty()) throw ValidationError("svr features need at least two frequencies");
        for (const Eigen::Vector2d& t : spec.mu) out.push_back(t);
      }
      break;
    }
    case FeatureFamily::pt_imag: {
      std::vector<Mat2> im;
      for (const CgptMatrix& m : cgpt) im.push_back(m.first_order().imag());
      return features_from_imaginary_pt(im);
    }
  }
  return out;
}

FeatureSeries features_from_imaginary_pt(const std::vector<Mat2>& im_pt) {
  if (im_pt.empty()) throw ValidationError("features: no frequencies");
  FeatureSeries out;
  for (const Mat2& m : im_pt) {
    const Mat2 sym = 0.5 * (m + m.transpose());
    out.push_back(Eigen::JacobiSVD<Mat2>(sym).singularValues());
  }
  return out;
}

std::vector<DictionaryShape> default_dictionary_shapes() {
  const double rect_h = 1.0 / std::sqrt(5.0);
  return {
      {"disk", {ShapeKind::disk, 0.5, 0.5, 0.0, ""}, 2.0, 1.0},
      {"ellipse", {ShapeKind::ellipse, 0.5, 0.25, 0.0, ""}, 2.0, 1.0},
      {"A", {ShapeKind::letter_a, 1.0, 1.0, 0.0, ""}, 2.0, 1.0},
      {"E", {ShapeKind::letter_e, 1.0, 1.0, 0.0, ""}, 2.0, 1.0},
      {"square", {ShapeKind::square, 1.0 / std::sqrt(2.0), 1.0, 0.0, ""}, 2.0, 1.0},
      {"rectangle", {ShapeKind::rectangle, 2.0 * rect_h, rect_h, 0.0, ""}, 2.0, 1.0},
      {"triangle", {ShapeKind::triangle, 1.0, 1.0, 0.0, ""}, 2.0, 1.0},
      {"ellipse2", {ShapeKind::ellipse, 0.5, 0.25, 0.0, ""}, 5.0, 2.0},
  };
}

DictionaryShape dictionary_shape(const std::string& name) {
  std::string valid;
  for (const DictionaryShape& s : default_dictionary_shapes()) {
    if (s.name == name) return s;
    valid += (valid.empty() ? "" : ", ") + s.name;
  }
  throw ValidationError("unknown target '" + name + "' (valid: " + valid + ")");
}

int Dictionary::index_of(const std::string& name) const {
  for (int i = 0; i < size(); ++i)
    if (entries[i].name == name) return i;
  return -1;
}

FeatureSeries Dictionary::features(int entry, FeatureFamily family) const {
  if (entry < 0 || entry >= size()) throw ValidationError("dictionary entry out of range");
  return features_from_cgpt(entries[entry].cgpt, family);
}

Dictionary Dictionary::select_frequencies(const std::vector<int>& indices) const {
  Dictionary out;
  out.version = version;
  out.order = order;
  for (int f : indices) {
    if (f < 0 || f >= static_cast<int>(frequencies.size()))
      throw ValidationError("select_frequencies: index out of range");
    out.frequencies.push_back(frequencies[f]);
  }
  for (const DictionaryEntry& e : entries) {
    DictionaryEntry d = e;
    d.cgpt.clear();
    std::vector<CMat2> pts;
    for (int f : indices) {
      d.cgpt.push_back(e.cgpt[f]);
      pts.push_back(e.cgpt[f].first_order());
    }
    const PtSpectrum spec = pt_spectrum(pts, pts.size() >= 2);
    d.tau = spec.tau;
    d.mu = spec.mu;
    if (order >= 2) {
      const ShapeDescriptors sd = shape_descriptors(d.cgpt.front());
      d.i1 = sd.i1;
      d.i2 = sd.i2;
    }
    out.entries.push_back(std::move(d));
  }
  return out;
}

Contrast entry_contrast(const DictionaryEntry& e, double omega) { return {e.sigma, e.epsilon, omega}; }

Dictionary build_dictionary(const std::vector<DictionaryShape>& shapes, const DictionaryOptions& options) {
  if (shapes.empty()) throw ValidationError("build_dictionary: no shapes");
  if (options.frequencies.empty()) throw ValidationError("build_dictionary: no frequencies");
  if (!std::is_sorted(options.frequencies.begin(), options.frequencies.end()))
    throw ValidationError("build_dictionary: frequencies must be sorted ascending");
  if (options.order < 1) throw ValidationError("build_dictionary: order must be at least 1");
  if (!(options.scale > 0.0)) throw ValidationError("build_dictionary: scale must be positive");

  Dictionary d;
  d.frequencies = options.frequencies;
  d.order = options.order;
  d.entries.resize(shapes.size());
  const int f_count = static_cast<int>(options.frequencies.size());
  std::vector<Boundary> boundaries(shapes.size());
  for (size_t i = 0; i < shapes.size(); ++i) {
    DictionaryEntry& e = d.entries[i];
    e.name = shapes[i].name;
    e.shape = shapes[i].shape;
    e.sigma = shapes[i].sigma;
    e.epsilon = shapes[i].epsilon;
    e.scale = options.scale;
    e.cgpt.resize(f_count);
    boundaries[i] = transform(make_shape(e.shape, options.nodes), options.scale, 0.0, Vec2::Zero());
  }
  const int tasks = static_cast<int>(shapes.size()) * f_count;
  detail::parallel_for(tasks, [&](int task) {
    const int i = task / f_count, f = task % f_count;
    DictionaryEntry& e = d.entries[i];
    e.cgpt[f] = cgpt(boundaries[i], entry_contrast(e, options.frequencies[f]).lambda(), options.order);
  });
  for (DictionaryEntry& e : d.entries) {
    std::vector<CMat2> pts;
    for (const CgptMatrix& m : e.cgpt) pts.push_back(m.first_order());
    const PtSpectrum spec = pt_spectrum(pts, f_count >= 2);
    e.tau = spec.tau;
    e.mu = spec.mu;
    if (options.order >= 2) {
      const ShapeDescriptors sd = shape_descriptors(e.cgpt.front());
      e.i1 = sd.i1;
      e.i2 = sd.i2;
    }
  }
  return d;
}

// ---------------------------------------------------------------------------

Matcher::Matcher(const Dictionary& dictionary, FeatureFamily family) : family_(family) {
  if (dictionary.size() == 0) throw ValidationError("match: empty dictionary");
  for (int i = 0; i < dictionary.size(); ++i) reference_.push_back(dictionary.features(i, family));
}

MatchResult Matcher::match(const FeatureSeries& query) const {
  MatchResult out;
  out.family = family_;
  double best = std::numeric_limits<double>::infinity();
  for (size_t n = 0; n < reference_.size(); ++n) {
    const FeatureSeries& ref = reference_[n];
    if (ref.size() != query.size())
      throw ValidationError("match: query has " + std::to_string(query.size()) + " frequencies, dictionary " +
                            std::to_string(ref.size()));
    double e = 0.0;
    for (size_t f = 0; f < ref.size(); ++f) {
      if (ref[f].size() != query[f].size()) throw ValidationError("match: feature length mismatch");
      e += (ref[f] - query[f]).squaredNorm();
    }
    out.scores.push_back(e);
    // Strict comparison keeps the lowest index on ties; NaN never wins.
    if (e < best) {
      best = e;
      out.winner = static_cast<int>(n);
    }
  }
  return out;
}

MatchResult match(const FeatureSeries& query, const Dictionary& dictionary, FeatureFamily family) {
  return Matcher(dictionary, family).match(query);
}

// ---------------------------------------------------------------------------

Eigen::MatrixXcd add_noise(const Eigen::MatrixXcd& q, double level, std::mt19937_64& rng) {
  if (level < 0.0) throw ValidationError("noise level must be non-negative");
  if (level == 0.0 || q.size() == 0) return q;
  const double eps = level * (q.real().maxCoeff() - q.real().minCoeff());
  std::normal_distribution<double> gauss;
  Eigen::MatrixXcd out = q;
  for (Eigen::Index j = 0; j < q.cols(); ++j)
    for (Eigen::Index i = 0; i < q.rows(); ++i) {
      const double re = gauss(rng);
      const double im = gauss(rng);
      out(i, j) += eps * cplx(re, im);
    }
  return out;
}

Eigen::MatrixXd add_noise(const Eigen::MatrixXd& y, double level, std::mt19937_64& rng) {
  if (level < 0.0) throw ValidationError("noise level must be non-negative");
  if (level == 0.0 || y.size() == 0) return y;
  const double eps = level * (y.maxCoeff() - y.minCoeff());
  std::normal_distribution<double> gauss;
  Eigen::MatrixXd out = y;
  for (Eigen::Index j = 0; j < y.cols(); ++j)
    for (Eigen::Index i = 0; i < y.rows(); ++i) out(i, j) += eps * gauss(rng);
  return out;
}

MeasurementSet add_noise(const MeasurementSet& data, double level, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  MeasurementSet out = data;
  for (Eigen::MatrixXcd& q : out.q) q = add_noise(q, level, rng);
  return out;
}

// ---------------------------------------------------------------------------

MeasurementSet simulate_entry(const DictionaryEntry& entry, const std::vector<double>& frequencies,
                              const std::vector<FishPose>& poses, const SimulationSetup& setup) {
  const Boundary target = transform(make_shape(entry.shape, setup.target_nodes), entry.scale,
                                    setup.target_angle, setup.target_location);
  std::vector<Contrast> contrasts;
  for (double w : frequencies) contrasts.push_back(entry_contrast(entry, w));
  return data_matrix(poses, target, contrasts, setup.target_location, setup.xi);
}

int default_recovery_order(FeatureFamily family) { return family == FeatureFamily::sd ? 3 : 1; }

RecoveryPipeline::RecoveryPipeline(const MeasurementSet& clean, FeatureFamily family, int order,
                                   const BackgroundField* background)
    : family_(family), order_(order) {
  clean.validate();
  if (family == FeatureFamily::sd && order < 3)
    throw ValidationError("shape descriptors need CGPT recovery order K >= 3");
  if (family == FeatureFamily::svr && clean.frequency_count() < 2)
    throw ValidationError("svr features need at least two frequencies");
  if (family == FeatureFamily::pt_imag) {
    BackgroundField own;
    if (!background) {
      own = background_field(clean.poses, clean.target_location, clean.xi);
      background = &own;
    }
    if (background->gradient.size() != clean.poses.size())
      throw ValidationError("background field does not match the measurement poses");
    fits_.emplace_back(clean.poses, background->gradient, clean.target_location);
    y_ = postprocessed_imaginary_data(clean.poses, clean.flux, background->flux, clean.xi);
  } else {
    q_ = clean.q;
    maps_ = assemble_operators(clean, order);
  }
}

std::vector<CgptMatrix> RecoveryPipeline::recover(const std::vector<Eigen::MatrixXcd>& q) const {
  if (maps_.empty()) throw ValidationError("this pipeline does not recover CGPTs");
  if (q.size() != maps_.size()) throw ValidationError("recover: one data matrix per frequency expected");
  std::vector<CgptMatrix> out;
  for (size_t f = 0; f < q.size(); ++f) out.push_back(maps_[f].recover(q[f]));
  return out;
}

std::vector<Mat2> RecoveryPipeline::recover_imaginary(const std::vector<Eigen::MatrixXd>& y) const {
  if (fits_.empty()) throw ValidationError("this pipeline does not recover Im PT");
  std::vector<Mat2> out;
  for (const Eigen::MatrixXd& m : y) out.push_back(fits_.front().fit_symmetric(m));
  return out;
}

FeatureSeries RecoveryPipeline::features_from(const std::vector<Eigen::MatrixXcd>& q) const {
  if (family_ == FeatureFamily::pt_imag)
    throw ValidationError("pt-imag features are formed from skin flux, not from the data matrix");
  return features_from_cgpt(recover(q), family_);
}

FeatureSeries RecoveryPipeline::features() const {
  if (family_ == FeatureFamily::pt_imag) return features_from_imaginary_pt(recover_imaginary(y_));
  return features_from(q_);
}

FeatureSeries RecoveryPipeline::noisy_features(double level, std::mt19937_64& rng) const {
  if (family_ == FeatureFamily::pt_imag) {
    std::vector<Eigen::MatrixXd> y;
    for (const Eigen::MatrixXd& m : y_) y.push_back(add_noise(m, level, rng));
    return features_from_imaginary_pt(recover_imaginary(y));
  }
  std::vector<Eigen::MatrixXcd> q;
  for (const Eigen::MatrixXcd& m : q_) q.push_back(add_noise(m, level, rng));
  return features_from(q);
}

// ---------------------------------------------------------------------------

double mean_rate(const std::vector<StabilityRow>& rows, double noise_level) {
  double sum = 0.0;
  int count = 0;
  for (const StabilityRow& r : rows)
    if (r.noise_level == noise_level) {
      sum += r.rate();
      ++count;
    }
  return count > 0 ? sum / count : 0.0;
}

std::mt19937_64 trial_rng(std::uint64_t seed, double level, int target, int trial) {
  const std::uint64_t lv = std::bit_cast<std::uint64_t>(level);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(lv), static_cast<std::uint32_t>(lv >> 32),
                    static_cast<std::uint32_t>(target), static_cast<std::uint32_t>(trial)};
  return std::mt19937_64(seq);
}

std::vector<StabilityRow> stability_sweep(const Dictionary& dictionary,
                                          const std::vector<RecoveryPipeline>& pipelines,
                                          const StabilityOptions& options,
                                          const std::function<void(const std::vector<StabilityRow>&)>& on_level) {
  if (options.trials < 1) throw ValidationError("stability sweep: trials must be at least 1");
  if (static_cast<int>(pipelines.size()) != dictionary.size())
    throw ValidationError("stability sweep: one pipeline per dictionary entry expected");
  for (double level : options.noise_levels)
    if (level < 0.0) throw ValidationError("stability sweep: noise levels must be non-negative");
  for (const RecoveryPipeline& p : pipelines)
    if (p.family() != options.family) throw ValidationError("stability sweep: pipeline family mismatch");

  const Matcher matcher(dictionary, options.family);
  const double chance = 1.0 / dictionary.size();
  std::vector<StabilityRow> rows;
  for (double level : options.noise_levels) {
    std::vector<StabilityRow> level_rows;
    for (int t = 0; t < dictionary.size(); ++t) {
      std::vector<char> hit(options.trials, 0);
      detail::parallel_for(options.trials, [&](int trial) {
        std::mt19937_64 rng = trial_rng(options.seed, level, t, trial);
        hit[trial] = matcher.match(pipelines[t].noisy_features(level, rng)).winner == t;
      });
      StabilityRow row;
      row.noise_level = level;
      row.target = dictionary.entries[t].name;
      row.trials = options.trials;
      row.detections = static_cast<int>(std::count(hit.begin(), hit.end(), 1));
      level_rows.push_back(row);
    }
    rows.insert(rows.end(), level_rows.begin(), level_rows.end());
    if (on_level) on_level(level_rows);
    if (options.stop_at_chance && mean_rate(level_rows, level) <= chance) break;
  }
  return rows;
}

}  // namespace esense
