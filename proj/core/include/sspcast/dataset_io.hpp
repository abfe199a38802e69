#pragma once

#include <string>
#include <vector>

#include "sspcast/profile.hpp"

namespace sspcast {

/// Profile CSV:
///
///   # timestamp=<epoch seconds>
///   depth_m,speed_mps
///   <depth>,<speed>
///   ...
void write_profile_csv(const SoundSpeedProfile& profile, const std::string& path);
SoundSpeedProfile read_profile_csv(const std::string& path);
SoundSpeedProfile parse_profile_csv(const std::string& text, const std::string& origin = "<memory>");

/// Manifest JSON: {"scheme": {"kind": ..., "depths_m": [...]}, "profiles": ["a.csv", ...]}.
/// Relative profile paths are resolved against the manifest's directory.
struct Manifest {
  LayerScheme scheme;
  std::vector<std::string> profiles;
};

void write_manifest(const Manifest& manifest, const std::string& path);
Manifest read_manifest(const std::string& path);

struct Dataset {
  LayerScheme scheme;
  std::vector<SoundSpeedProfile> profiles;
};

/// Reads the manifest and every profile it lists, in order.
Dataset load_dataset(const std::string& manifest_path);

}  // namespace sspcast
