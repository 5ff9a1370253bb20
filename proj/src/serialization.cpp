#include "esense/serialization.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace esense {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

json complex_pair(cplx z) { return json::array({z.real(), z.imag()}); }

cplx complex_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("expected [re, im] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json mat2(const Mat2& m) { return json::array({json::array({m(0, 0), m(0, 1)}), json::array({m(1, 0), m(1, 1)})}); }

Mat2 mat2_from(const json& j) {
  if (!j.is_array() || j.size() != 2 || j[0].size() != 2 || j[1].size() != 2)
    throw ValidationError("expected a 2x2 array");
  Mat2 m;
  m << j[0][0].get<double>(), j[0][1].get<double>(), j[1][0].get<double>(), j[1][1].get<double>();
  return m;
}

json vec2(const Vec2& v) { return json::array({v.x(), v.y()}); }

Vec2 vec2_from(const json& j) {
  if (!j.is_array() || j.size() != 2) throw ValidationError("expected an [x, y] pair");
  return {j[0].get<double>(), j[1].get<double>()};
}

json shape_to_json(const ShapeSpec& s) {
  return {{"kind", shape_kind_name(s.kind)}, {"a", s.a}, {"b", s.b}, {"rounding", s.rounding}, {"file", s.file}};
}

ShapeSpec shape_from_json(const json& j) {
  ShapeSpec s;
  s.kind = parse_shape_kind(j.at("kind").get<std::string>());
  s.a = j.at("a").get<double>();
  s.b = j.at("b").get<double>();
  s.rounding = j.value("rounding", 0.0);
  s.file = j.value("file", std::string());
  return s;
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ValidationError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ValidationError("cannot write '" + path + "'");
  out << text;
  if (!out) throw ValidationError("write failed for '" + path + "'");
}

std::string matrix_csv(const Eigen::MatrixXcd& m, const std::string& hash) {
  std::string out = "# config_hash=" + hash + "\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_complex(m(i, j));
    }
    out += '\n';
  }
  return out;
}

Eigen::MatrixXcd matrix_from_csv(const std::string& path, Eigen::Index rows, Eigen::Index cols) {
  std::istringstream in(read_text(path));
  std::vector<std::vector<cplx>> data;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line.front() == '#') continue;
    std::vector<cplx> row;
    std::stringstream ls(line);
    std::string cell;
    while (std::getline(ls, cell, ',')) row.push_back(parse_complex(cell));
    data.push_back(std::move(row));
  }
  if (static_cast<Eigen::Index>(data.size()) != rows)
    throw ValidationError(path + ": expected " + std::to_string(rows) + " rows, found " +
                          std::to_string(data.size()));
  Eigen::MatrixXcd m(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i) {
    if (static_cast<Eigen::Index>(data[i].size()) != cols)
      throw ValidationError(path + ": row " + std::to_string(i + 1) + " has " + std::to_string(data[i].size()) +
                            " entries, expected " + std::to_string(cols));
    for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = data[i][j];
  }
  return m;
}

}  // namespace

// ---------------------------------------------------------------------------

json dictionary_to_json(const Dictionary& d, const std::string& config_hash) {
  json entries = json::array();
  for (const DictionaryEntry& e : d.entries) {
    json cg = json::array();
    for (const CgptMatrix& c : e.cgpt) {
      json rows = json::array();
      for (int m = 1; m <= c.order(); ++m) {
        json row = json::array();
        for (int n = 1; n <= c.order(); ++n)
          row.push_back(json::array({complex_pair(c.cc(m, n)), complex_pair(c.cs(m, n)),
                                     complex_pair(c.sc(m, n)), complex_pair(c.ss(m, n))}));
        rows.push_back(row);
      }
      cg.push_back(rows);
    }
    json tau = json::array(), mu = json::array();
    for (const Eigen::Vector2d& t : e.tau) tau.push_back(vec2(t));
    for (const Eigen::Vector2d& t : e.mu) mu.push_back(vec2(t));
    entries.push_back({{"name", e.name},
                       {"shape", shape_to_json(e.shape)},
                       {"sigma", e.sigma},
                       {"epsilon", e.epsilon},
                       {"scale", e.scale},
                       {"cgpt", cg},
                       {"tau", tau},
                       {"mu", mu},
                       {"descriptors", {{"I1", mat2(e.i1)}, {"I2", mat2(e.i2)}}}});
  }
  return {{"version", d.version},
          {"config_hash", config_hash},
          {"frequencies", d.frequencies},
          {"order", d.order},
          {"entries", entries}};
}

Dictionary dictionary_from_json(const json& j) {
  try {
    Dictionary d;
    d.version = j.at("version").get<int>();
    d.frequencies = j.at("frequencies").get<std::vector<double>>();
    d.order = j.at("order").get<int>();
    const size_t nf = d.frequencies.size();
    for (const json& je : j.at("entries")) {
      DictionaryEntry e;
      e.name = je.at("name").get<std::string>();
      e.shape = shape_from_json(je.at("shape"));
      e.sigma = je.at("sigma").get<double>();
      e.epsilon = je.at("epsilon").get<double>();
      e.scale = je.at("scale").get<double>();
      const json& cg = je.at("cgpt");
      if (cg.size() != nf) throw ValidationError("entry '" + e.name + "': cgpt count differs from frequencies");
      for (const json& jf : cg) {
        if (static_cast<int>(jf.size()) != d.order)
          throw ValidationError("entry '" + e.name + "': cgpt order differs from the dictionary order");
        CgptMatrix c(d.order);
        for (int m = 1; m <= d.order; ++m) {
          if (static_cast<int>(jf[m - 1].size()) != d.order)
            throw ValidationError("entry '" + e.name + "': ragged cgpt block array");
          for (int n = 1; n <= d.order; ++n) {
            const json& blk = jf[m - 1][n - 1];
            if (blk.size() != 4) throw ValidationError("entry '" + e.name + "': cgpt block needs 4 values");
            CMat2& b = c.block(m, n);
            b << complex_from(blk[0]), complex_from(blk[1]), complex_from(blk[2]), complex_from(blk[3]);
          }
        }
        e.cgpt.push_back(c);
      }
      for (const json& t : je.at("tau")) e.tau.push_back(vec2_from(t));
      for (const json& t : je.at("mu")) e.mu.push_back(vec2_from(t));
      if (e.tau.size() != nf) throw ValidationError("entry '" + e.name + "': tau count differs from frequencies");
      e.i1 = mat2_from(je.at("descriptors").at("I1"));
      e.i2 = mat2_from(je.at("descriptors").at("I2"));
      d.entries.push_back(std::move(e));
    }
    return d;
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("malformed dictionary: ") + ex.what());
  }
}

void write_dictionary(const std::string& path, const Dictionary& dictionary, const std::string& config_hash) {
  write_text(path, dictionary_to_json(dictionary, config_hash).dump(1) + "\n");
}

Dictionary read_dictionary(const std::string& path) {
  json j;
  try {
    j = json::parse(read_text(path));
  } catch (const json::parse_error& ex) {
    throw ValidationError(path + ": " + ex.what());
  }
  return dictionary_from_json(j);
}

// ---------------------------------------------------------------------------

std::string format_complex(cplx z) {
  char buf[96];
  std::snprintf(buf, sizeof buf, "%.17g%+.17gj", z.real(), z.imag());
  return buf;
}

cplx parse_complex(const std::string& raw) {
  std::string t;
  for (char c : raw)
    if (c != ' ' && c != '\t') t += c;
  if (t.empty()) throw ValidationError("empty complex entry");
  if (t.back() != 'j') {
    // Real number without imaginary part.
    size_t used = 0;
    double re = 0.0;
    try {
      re = std::stod(t, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != t.size()) throw ValidationError("malformed complex entry '" + raw + "'");
    return {re, 0.0};
  }
  // Split at the last sign that is not an exponent sign and not leading.
  size_t split = std::string::npos;
  for (size_t i = t.size() - 1; i > 0; --i)
    if ((t[i] == '+' || t[i] == '-') && t[i - 1] != 'e' && t[i - 1] != 'E') {
      split = i;
      break;
    }
  if (split == std::string::npos) throw ValidationError("malformed complex entry '" + raw + "'");
  const std::string re_s = t.substr(0, split);
  const std::string im_s = t.substr(split, t.size() - split - 1);
  try {
    size_t u1 = 0, u2 = 0;
    const double re = std::stod(re_s, &u1);
    const double im = std::stod(im_s, &u2);
    if (u1 != re_s.size() || u2 != im_s.size()) throw ValidationError("");
    return {re, im};
  } catch (const std::exception&) {
    throw ValidationError("malformed complex entry '" + raw + "'");
  }
}

void write_bundle(const std::string& directory, const MeasurementBundle& bundle) {
  const MeasurementSet& d = bundle.data;
  d.validate();
  fs::create_directories(directory);
  const fs::path dir(directory);

  json poses = json::array();
  for (const FishPose& p : d.poses) {
    json rec = json::array();
    for (const Vec2& r : p.receptors) rec.push_back(vec2(r));
    poses.push_back({{"index", p.index},
                     {"angle", p.angle},
                     {"dipole_position", vec2(p.dipole_position)},
                     {"dipole_moment", vec2(p.dipole_moment)},
                     {"receptors", rec}});
  }
  const TrajectoryOptions& t = bundle.trajectory;
  json meta = {{"config_hash", bundle.config_hash},
               {"target", bundle.target},
               {"noise_level", bundle.noise_level},
               {"frequencies", d.frequencies},
               {"target_location", vec2(d.target_location)},
               {"xi", d.xi},
               {"positions", d.positions()},
               {"receptors", d.receptors()},
               {"body_nodes", d.poses.front().body.size()},
               {"fish",
                {{"kind", fish_kind_name(t.kind)},
                 {"positions", t.positions},
                 {"orbit_radius", t.orbit_radius},
                 {"aperture", t.aperture},
                 {"receptors", t.receptors},
                 {"body_nodes", t.body_nodes}}},
               {"poses", poses}};
  write_text((dir / "metadata.json").string(), meta.dump(1) + "\n");
  for (int f = 0; f < d.frequency_count(); ++f) {
    const std::string i = std::to_string(f + 1);
    write_text((dir / ("q_f" + i + ".csv")).string(), matrix_csv(d.q[f], bundle.config_hash));
    write_text((dir / ("flux_f" + i + ".csv")).string(), matrix_csv(d.flux[f], bundle.config_hash));
  }
}

MeasurementBundle read_bundle(const std::string& directory) {
  const fs::path dir(directory);
  json meta;
  try {
    meta = json::parse(read_text((dir / "metadata.json").string()));
  } catch (const json::parse_error& ex) {
    throw ValidationError("metadata.json: " + std::string(ex.what()));
  }
  try {
    MeasurementBundle b;
    b.config_hash = meta.value("config_hash", std::string());
    b.target = meta.value("target", std::string());
    b.noise_level = meta.value("noise_level", 0.0);
    const json& fish = meta.at("fish");
    b.trajectory.kind = parse_fish_kind(fish.at("kind").get<std::string>());
    b.trajectory.positions = fish.at("positions").get<int>();
    b.trajectory.orbit_radius = fish.at("orbit_radius").get<double>();
    b.trajectory.aperture = fish.at("aperture").get<double>();
    b.trajectory.receptors = fish.at("receptors").get<int>();
    b.trajectory.body_nodes = fish.at("body_nodes").get<int>();

    MeasurementSet& d = b.data;
    d.frequencies = meta.at("frequencies").get<std::vector<double>>();
    d.target_location = vec2_from(meta.at("target_location"));
    d.xi = meta.at("xi").get<double>();
    d.poses = fish_trajectory(b.trajectory);

    const int s = meta.at("positions").get<int>();
    const int r = meta.at("receptors").get<int>();
    const int n = meta.at("body_nodes").get<int>();
    if (s != d.positions() || r != d.receptors() || n != d.poses.front().body.size())
      throw ValidationError("bundle dimensions disagree with the fish options");
    const json& jp = meta.at("poses");
    if (static_cast<int>(jp.size()) != s) throw ValidationError("bundle pose list has the wrong length");
    for (int i = 0; i < s; ++i) {
      const json& rec = jp[i].at("receptors");
      if (static_cast<int>(rec.size()) != r) throw ValidationError("bundle receptor list has the wrong length");
      for (int k = 0; k < r; ++k)
        if ((vec2_from(rec[k]) - d.poses[i].receptors[k]).norm() > 1e-9)
          throw ValidationError("bundle receptor positions do not match the fish options");
    }
    for (size_t f = 0; f < d.frequencies.size(); ++f) {
      const std::string i = std::to_string(f + 1);
      d.q.push_back(matrix_from_csv((dir / ("q_f" + i + ".csv")).string(), s, r));
      d.flux.push_back(matrix_from_csv((dir / ("flux_f" + i + ".csv")).string(), s, n));
    }
    d.validate();
    return b;
  } catch (const json::exception& ex) {
    throw ValidationError(std::string("malformed metadata.json: ") + ex.what());
  }
}

}  // namespace esense
