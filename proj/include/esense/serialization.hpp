#pragma once

#include <string>

#include <json.hpp>

#include "esense/classifier.hpp"
#include "esense/forward.hpp"
#include "esense/geometry.hpp"

namespace esense {

// Dictionary files ----------------------------------------------------------

/// JSON layout:
///   {version, config_hash, frequencies[], order,
///    entries[{name, shape{kind, a, b, rounding, file}, sigma, epsilon, scale,
///             cgpt[f][m][n][4 x [re, im]], tau[f][2], mu[f][2],
///             descriptors{I1[2][2], I2[2][2]}}]}
/// cgpt blocks are ordered cc, cs, sc, ss with m, n starting at 1.
nlohmann::json dictionary_to_json(const Dictionary& dictionary, const std::string& config_hash = "");
Dictionary dictionary_from_json(const nlohmann::json& j);

void write_dictionary(const std::string& path, const Dictionary& dictionary,
                      const std::string& config_hash = "");
Dictionary read_dictionary(const std::string& path);

// Measurement bundles ---------------------------------------------------------

/// "re+imj" with round-trip precision.
std::string format_complex(cplx z);
cplx parse_complex(const std::string& text);

/// A measurement set together with everything needed to rebuild its poses.
struct MeasurementBundle {
  MeasurementSet data;
  TrajectoryOptions trajectory;
  std::string target;
  std::string config_hash;
  double noise_level = 0.0;
};

/// Writes q_f{i}.csv (S x R), flux_f{i}.csv (S x N) and metadata.json into
/// `directory`, creating it if needed. Every CSV starts with a
/// "# config_hash=..." comment line.
void write_bundle(const std::string& directory, const MeasurementBundle& bundle);

/// Reads a bundle back. Poses are regenerated from the stored trajectory
/// options and checked against the stored receptor positions; any
/// disagreement in dimensions or geometry raises ValidationError.
MeasurementBundle read_bundle(const std::string& directory);

}  // namespace esense
