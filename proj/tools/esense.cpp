// Command-line front end: build-dict, simulate, classify, stability.

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <optional>
#include <set>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>
#include <omp.h>

#include "esense/classifier.hpp"
#include "esense/config.hpp"
#include "esense/serialization.hpp"

namespace fs = std::filesystem;
using namespace esense;

namespace {

constexpr int exit_validation = 2;
constexpr int exit_numerical = 3;

struct CommonFlags {
  std::string config;
  std::string out = "esense_out";
  std::string family;
  std::string fish;
  std::string noise;
  std::string target;
  std::vector<std::string> set;
  double aperture = -1.0;
  long long seed = -1;
  int threads = -1;
  int trials = -1;
};

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_config(f.config);
  for (const std::string& kv : f.set) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos) throw ValidationError("--set expects key=value, got '" + kv + "'");
    c.set(kv.substr(0, eq), kv.substr(eq + 1));
  }
  if (!f.family.empty()) c.family = parse_feature_family(f.family);
  if (!f.fish.empty()) c.trajectory.kind = parse_fish_kind(f.fish);
  if (!f.noise.empty()) c.noise = parse_number_list(f.noise);
  if (!f.target.empty()) c.target = f.target;
  if (f.aperture >= 0.0) c.trajectory.aperture = f.aperture;
  if (f.seed >= 0) c.seed = static_cast<std::uint64_t>(f.seed);
  if (f.threads >= 0) c.threads = f.threads;
  if (f.trials >= 0) c.trials = f.trials;
  c.validate();
  if (c.threads > 0) omp_set_num_threads(c.threads);
  return c;
}

void warn(const std::string& msg) { std::cerr << "warning: " << msg << "\n"; }

std::string dictionary_path(const std::string& out) { return (fs::path(out) / "dictionary.json").string(); }

Dictionary build(const ExperimentConfig& c) {
  if (c.frequencies.size() < 2) warn("a single frequency: ratio (mu) features are omitted");
  return build_dictionary(default_dictionary_shapes(), c.dictionary_options());
}

/// Dictionary from --dict when given, otherwise built from the config.
Dictionary obtain_dictionary(const std::string& path, const ExperimentConfig& c) {
  if (!path.empty()) return read_dictionary(path);
  return build(c);
}

DictionaryEntry target_entry(const ExperimentConfig& c) {
  const DictionaryShape s = c.target_shape();
  DictionaryEntry e;
  e.name = s.name;
  e.shape = s.shape;
  e.sigma = s.sigma;
  e.epsilon = s.epsilon;
  e.scale = c.scale;
  return e;
}

void check_compatible(const Dictionary& d, const MeasurementSet& m) {
  if (d.frequencies != m.frequencies)
    throw ValidationError("dictionary and measurements use different frequency grids");
}

// ---------------------------------------------------------------------------

int cmd_build_dict(const CommonFlags& flags) {
  const ExperimentConfig c = resolve(flags);
  fs::create_directories(flags.out);
  const Dictionary d = build(c);
  const std::string path = dictionary_path(flags.out);
  write_dictionary(path, d, c.hash());
  std::cout << "wrote " << path << " (" << d.size() << " entries, " << d.frequencies.size()
            << " frequencies)\n";
  return 0;
}

int cmd_simulate(const CommonFlags& flags) {
  const ExperimentConfig c = resolve(flags);
  const DictionaryEntry entry = target_entry(c);
  const std::vector<FishPose> poses = fish_trajectory(c.trajectory);
  MeasurementBundle b;
  b.data = simulate_entry(entry, c.frequencies, poses, c.simulation_setup());
  b.trajectory = c.trajectory;
  b.target = entry.name;
  b.config_hash = c.hash();
  // Only the first level of the noise list applies to a single bundle; an
  // explicit --noise is required so that the default sweep grid is not used.
  if (!flags.noise.empty()) {
    if (c.noise.size() > 1) warn("simulate uses only the first noise level");
    b.noise_level = c.noise.front();
    if (b.noise_level > 0.0) b.data = add_noise(b.data, b.noise_level, c.seed);
  }
  write_bundle(flags.out, b);
  std::cout << "wrote bundle for '" << entry.name << "' to " << flags.out << " (" << b.data.frequency_count()
            << " frequencies, " << b.data.positions() << " x " << b.data.receptors() << ")\n";
  return 0;
}

int cmd_classify(const CommonFlags& flags, const std::string& bundle_dir, const std::string& dict_path) {
  const ExperimentConfig c = resolve(flags);
  const MeasurementBundle b = read_bundle(bundle_dir);
  Dictionary d = obtain_dictionary(dict_path, c);
  check_compatible(d, b.data);
  const RecoveryPipeline pipeline(b.data, c.family, c.recovery_order(c.family));
  const MatchResult r = Matcher(d, c.family).match(pipeline.features());

  nlohmann::json scores = nlohmann::json::array();
  for (int n = 0; n < d.size(); ++n) scores.push_back({{"entry", d.entries[n].name}, {"score", r.scores[n]}});
  const nlohmann::json out = {{"config_hash", c.hash()},
                              {"bundle", bundle_dir},
                              {"bundle_target", b.target},
                              {"family", feature_family_name(r.family)},
                              {"winner", d.entries[r.winner].name},
                              {"winner_index", r.winner},
                              {"scores", scores}};
  fs::create_directories(flags.out);
  const fs::path json_path = fs::path(flags.out) / "classify.json";
  std::ofstream(json_path) << out.dump(1) << "\n";
  const fs::path csv_path = fs::path(flags.out) / "scores.csv";
  std::ofstream csv(csv_path);
  csv << "# config_hash=" << c.hash() << "\nentry,score\n";
  char buf[64];
  for (int n = 0; n < d.size(); ++n) {
    std::snprintf(buf, sizeof buf, "%.17g", r.scores[n]);
    csv << d.entries[n].name << "," << buf << "\n";
  }
  std::cout << "winner: " << d.entries[r.winner].name << "\n";
  for (int n = 0; n < d.size(); ++n) std::cout << "  " << d.entries[n].name << "  " << r.scores[n] << "\n";
  return 0;
}

/// Existing stability rows keyed by noise level; checks the config hash.
std::map<double, std::vector<StabilityRow>> read_existing(const fs::path& path, const std::string& hash) {
  std::map<double, std::vector<StabilityRow>> rows;
  std::ifstream in(path);
  if (!in) return rows;
  std::string line;
  while (std::getline(in, line)) {
    if (line.rfind("# config_hash=", 0) == 0) {
      if (line.substr(14) != hash)
        throw ValidationError(path.string() + " was produced with a different configuration; choose another --out");
      continue;
    }
    if (line.empty() || line[0] == '#' || line.rfind("noise_level", 0) == 0) continue;
    std::stringstream ss(line);
    std::string level, target, trials, detections;
    std::getline(ss, level, ',');
    std::getline(ss, target, ',');
    std::getline(ss, trials, ',');
    std::getline(ss, detections, ',');
    StabilityRow r;
    r.noise_level = std::stod(level);
    r.target = target;
    r.trials = std::stoi(trials);
    r.detections = std::stoi(detections);
    rows[r.noise_level].push_back(r);
  }
  return rows;
}

int cmd_stability(const CommonFlags& flags, const std::string& dict_path) {
  const ExperimentConfig c = resolve(flags);
  Dictionary d = obtain_dictionary(dict_path, c);
  if (c.family == FeatureFamily::svr && d.frequencies.size() < 2)
    throw ValidationError("svr stability needs at least two frequencies");

  fs::create_directories(flags.out);
  const fs::path csv_path = fs::path(flags.out) / ("stability_" + feature_family_name(c.family) + ".csv");
  // The noise grid is left out of the resume key so that a longer grid
  // extends an existing file.
  ExperimentConfig key = c;
  key.noise.clear();
  const std::string resume_hash = key.hash();
  const auto existing = read_existing(csv_path, resume_hash);
  const double chance = 1.0 / d.size();

  std::vector<double> pending;
  bool stopped = false;
  for (double level : c.noise) {
    auto it = existing.find(level);
    if (it != existing.end()) {
      if (mean_rate(it->second, level) <= chance) stopped = true;
      continue;
    }
    if (!stopped) pending.push_back(level);
  }
  if (pending.empty()) {
    std::cout << "nothing to do: " << csv_path.string() << " already covers the noise grid\n";
    return 0;
  }

  const std::vector<FishPose> poses = fish_trajectory(c.trajectory);
  const SimulationSetup setup = c.simulation_setup();
  std::optional<BackgroundField> background;
  if (c.family == FeatureFamily::pt_imag) background = background_field(poses, setup.target_location, c.xi);
  std::vector<RecoveryPipeline> pipelines;
  for (const DictionaryEntry& e : d.entries) {
    std::cout << "simulating " << e.name << "\n" << std::flush;
    pipelines.emplace_back(simulate_entry(e, d.frequencies, poses, setup), c.family,
                           c.recovery_order(c.family), background ? &*background : nullptr);
  }

  const bool fresh = !fs::exists(csv_path);
  std::ofstream csv(csv_path, std::ios::app);
  if (fresh) csv << "# config_hash=" << resume_hash << "\nnoise_level,target,trials,detections,rate\n";
  StabilityOptions so;
  so.family = c.family;
  so.noise_levels = pending;
  so.trials = c.trials;
  so.seed = c.seed;
  stability_sweep(d, pipelines, so, [&](const std::vector<StabilityRow>& rows) {
    char buf[128];
    for (const StabilityRow& r : rows) {
      std::snprintf(buf, sizeof buf, "%.17g,%s,%d,%d,%.6f\n", r.noise_level, r.target.c_str(), r.trials,
                    r.detections, r.rate());
      csv << buf;
    }
    csv.flush();
    std::printf("noise %.4g: mean detection rate %.4f\n", rows.front().noise_level,
                mean_rate(rows, rows.front().noise_level));
    std::fflush(stdout);
  });
  std::cout << "wrote " << csv_path.string() << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Electro-sensing target classification from multifrequency measurements"};
  app.require_subcommand(1);
  CommonFlags flags;
  std::string bundle_dir, dict_path;

  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", flags.config, "TOML-style key = value configuration file");
    sub->add_option("--set", flags.set, "Override a configuration key (key=value), repeatable");
    sub->add_option("--seed", flags.seed, "Random seed");
    sub->add_option("--threads", flags.threads, "Worker thread cap (0 keeps the default)");
    sub->add_option("--out", flags.out, "Output directory");
    sub->add_option("--family", flags.family, "Feature family: sd, sv, svr, pt-imag");
    sub->add_option("--fish", flags.fish, "Fish body: ellipse, twisted");
    sub->add_option("--aperture", flags.aperture, "Angular span of the fish poses in radians");
    sub->add_option("--noise", flags.noise, "Noise levels as a comma-separated list");
    sub->add_option("--trials", flags.trials, "Monte Carlo trials per target and noise level");
    sub->add_option("--target", flags.target, "Target name (dictionary shape or custom)");
  };

  CLI::App* build_cmd = app.add_subcommand("build-dict", "Compute the dictionary of reference features");
  add_common(build_cmd);
  CLI::App* sim_cmd = app.add_subcommand("simulate", "Simulate a measurement bundle for one target");
  add_common(sim_cmd);
  CLI::App* cls_cmd = app.add_subcommand("classify", "Classify a measurement bundle against a dictionary");
  add_common(cls_cmd);
  cls_cmd->add_option("--bundle", bundle_dir, "Measurement bundle directory")->required();
  cls_cmd->add_option("--dict", dict_path, "Dictionary JSON (built from the config when omitted)");
  CLI::App* stab_cmd = app.add_subcommand("stability", "Monte Carlo detection rate versus noise level");
  add_common(stab_cmd);
  stab_cmd->add_option("--dict", dict_path, "Dictionary JSON (built from the config when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : exit_validation;
  }

  try {
    if (*build_cmd) return cmd_build_dict(flags);
    if (*sim_cmd) return cmd_simulate(flags);
    if (*cls_cmd) return cmd_classify(flags, bundle_dir, dict_path);
    if (*stab_cmd) return cmd_stability(flags, dict_path);
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return exit_numerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_validation;
  }
  return 0;
}
