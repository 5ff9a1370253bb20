#include "esense/config.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

namespace esense {

namespace {

std::string trim(const std::string& s) {
  const auto first = s.find_first_not_of(" \t\r\n");
  if (first == std::string::npos) return "";
  const auto last = s.find_last_not_of(" \t\r\n");
  return s.substr(first, last - first + 1);
}

std::string unquote(std::string s) {
  s = trim(s);
  if (s.size() >= 2 && (s.front() == '"' || s.front() == '\'') && s.back() == s.front())
    return s.substr(1, s.size() - 2);
  return s;
}

double to_double(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ValidationError("config: '" + key + "' expects a number, got '" + text + "'");
  return v;
}

long long to_integer(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  long long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
    throw ValidationError("config: '" + key + "' expects an integer, got '" + text + "'");
  return v;
}

std::string number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string list(const std::vector<double>& v) {
  std::string out = "[";
  for (size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + number(v[i]);
  return out + "]";
}

}  // namespace

std::vector<double> parse_number_list(const std::string& text) {
  std::string t = trim(text);
  if (!t.empty() && t.front() == '[') {
    if (t.back() != ']') throw ValidationError("config: unterminated list '" + text + "'");
    t = t.substr(1, t.size() - 2);
  }
  std::vector<double> out;
  std::stringstream ss(t);
  std::string item;
  while (std::getline(ss, item, ','))
    if (!trim(item).empty()) out.push_back(to_double("list", item));
  return out;
}

void ExperimentConfig::set(const std::string& raw_key, const std::string& raw_value) {
  const std::string key = trim(raw_key);
  const std::string value = unquote(raw_value);
  auto integer = [&] { return static_cast<int>(to_integer(key, value)); };
  auto real = [&] { return to_double(key, value); };

  if (key == "fish") trajectory.kind = parse_fish_kind(value);
  else if (key == "positions") trajectory.positions = integer();
  else if (key == "receptors") trajectory.receptors = integer();
  else if (key == "orbit_radius") trajectory.orbit_radius = real();
  else if (key == "aperture") trajectory.aperture = real();
  else if (key == "body_nodes") trajectory.body_nodes = integer();
  else if (key == "target") target = value;
  else if (key == "target_file") target_file = value;
  else if (key == "target_sigma") target_sigma = real();
  else if (key == "target_epsilon") target_epsilon = real();
  else if (key == "target_angle") target_angle = real();
  else if (key == "target_x") target_location.x() = real();
  else if (key == "target_y") target_location.y() = real();
  else if (key == "scale") scale = real();
  else if (key == "target_nodes") target_nodes = integer();
  else if (key == "dictionary_nodes") dictionary_nodes = integer();
  else if (key == "frequencies") frequencies = parse_number_list(value);
  else if (key == "order") order = integer();
  else if (key == "sv_order") sv_order = integer();
  else if (key == "sd_order") sd_order = integer();
  else if (key == "xi") xi = real();
  else if (key == "family") family = parse_feature_family(value);
  else if (key == "noise") noise = parse_number_list(value);
  else if (key == "trials") trials = integer();
  else if (key == "seed") seed = static_cast<std::uint64_t>(to_integer(key, value));
  else if (key == "threads") threads = integer();
  else
    throw ValidationError("config: unknown key '" + key + "'");
}

void ExperimentConfig::validate() const {
  if (trajectory.positions < 1) throw ValidationError("positions must be at least 1");
  if (trajectory.receptors < 1) throw ValidationError("receptors must be at least 1");
  if (!(trajectory.aperture > 0.0)) throw ValidationError("aperture must be positive");
  if (!(trajectory.orbit_radius > 0.0)) throw ValidationError("orbit_radius must be positive");
  if (trajectory.body_nodes < 16 || trajectory.body_nodes % 2) throw ValidationError("body_nodes must be even and >= 16");
  if (target_nodes < 16) throw ValidationError("target_nodes must be at least 16");
  if (dictionary_nodes < 16) throw ValidationError("dictionary_nodes must be at least 16");
  if (!(scale > 0.0)) throw ValidationError("scale must be positive");
  if (!(scale < trajectory.orbit_radius)) throw ValidationError("scale must be smaller than the orbit radius");
  if (frequencies.empty()) throw ValidationError("frequencies must not be empty");
  if (!std::is_sorted(frequencies.begin(), frequencies.end()))
    throw ValidationError("frequencies must be sorted ascending");
  for (double w : frequencies)
    if (!(w > 0.0)) throw ValidationError("frequencies must be positive");
  if (order < 1) throw ValidationError("order must be at least 1");
  if (sv_order < 1) throw ValidationError("sv_order must be at least 1");
  if (sd_order < 3) throw ValidationError("sd_order must be at least 3 (descriptors use the order-2 diagonal block)");
  if (xi < 0.0) throw ValidationError("xi must be non-negative");
  for (double l : noise)
    if (l < 0.0) throw ValidationError("noise levels must be non-negative");
  if (trials < 1) throw ValidationError("trials must be at least 1");
  if (threads < 0) throw ValidationError("threads must be non-negative");
  if (target == "custom" && target_file.empty()) throw ValidationError("custom target needs target_file");
  if (target != "custom") dictionary_shape(target);
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["fish"] = fish_kind_name(trajectory.kind);
  kv["positions"] = std::to_string(trajectory.positions);
  kv["receptors"] = std::to_string(trajectory.receptors);
  kv["orbit_radius"] = number(trajectory.orbit_radius);
  kv["aperture"] = number(trajectory.aperture);
  kv["body_nodes"] = std::to_string(trajectory.body_nodes);
  kv["target"] = target;
  kv["target_file"] = target_file;
  kv["target_sigma"] = number(target_sigma);
  kv["target_epsilon"] = number(target_epsilon);
  kv["target_angle"] = number(target_angle);
  kv["target_x"] = number(target_location.x());
  kv["target_y"] = number(target_location.y());
  kv["scale"] = number(scale);
  kv["target_nodes"] = std::to_string(target_nodes);
  kv["dictionary_nodes"] = std::to_string(dictionary_nodes);
  kv["frequencies"] = list(frequencies);
  kv["order"] = std::to_string(order);
  kv["sv_order"] = std::to_string(sv_order);
  kv["sd_order"] = std::to_string(sd_order);
  kv["xi"] = number(xi);
  kv["family"] = feature_family_name(family);
  kv["noise"] = list(noise);
  kv["trials"] = std::to_string(trials);
  kv["seed"] = std::to_string(seed);
  // threads is deliberately excluded: results do not depend on it.
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

int ExperimentConfig::recovery_order(FeatureFamily f) const {
  switch (f) {
    case FeatureFamily::sd: return sd_order;
    case FeatureFamily::sv:
    case FeatureFamily::svr: return sv_order;
    case FeatureFamily::pt_imag: return 1;
  }
  return sv_order;
}

DictionaryOptions ExperimentConfig::dictionary_options() const {
  DictionaryOptions o;
  o.frequencies = frequencies;
  o.order = order;
  o.scale = scale;
  o.nodes = dictionary_nodes;
  return o;
}

SimulationSetup ExperimentConfig::simulation_setup() const {
  SimulationSetup s;
  s.trajectory = trajectory;
  s.xi = xi;
  s.target_nodes = target_nodes;
  s.target_angle = target_angle;
  s.target_location = target_location;
  return s;
}

DictionaryShape ExperimentConfig::target_shape() const {
  DictionaryShape s;
  if (target == "custom") {
    s.name = "custom";
    s.shape.kind = ShapeKind::custom;
    s.shape.a = 1.0;
    s.shape.file = target_file;
  } else {
    s = dictionary_shape(target);
  }
  if (target_sigma > 0.0) s.sigma = target_sigma;
  if (target_epsilon >= 0.0) s.epsilon = target_epsilon;
  return s;
}

ExperimentConfig load_config(const std::string& path, ExperimentConfig base) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open config file '" + path + "'");
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    // Strip comments outside quotes.
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
      if (line[i] == '"') quoted = !quoted;
      if (line[i] == '#' && !quoted) {
        line.resize(i);
        break;
      }
    }
    line = trim(line);
    if (line.empty() || line.front() == '[') continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + ":" + std::to_string(lineno) + ": expected 'key = value'");
    base.set(line.substr(0, eq), line.substr(eq + 1));
  }
  return base;
}

}  // namespace esense
