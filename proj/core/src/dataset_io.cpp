#include "sspcast/dataset_io.hpp"

#include <charconv>
#include <filesystem>
#include <optional>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "sspcast/errors.hpp"
#include "sspcast/format.hpp"

namespace sspcast {

namespace fs = std::filesystem;

namespace {

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) s.remove_suffix(1);
  return s;
}

template <typename T>
bool parse_number(std::string_view text, T& out) {
  text = trim(text);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), out);
  return ec == std::errc() && ptr == text.data() + text.size();
}

}  // namespace

void write_profile_csv(const SoundSpeedProfile& profile, const std::string& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "# timestamp=" << profile.timestamp() << '\n' << "depth_m,speed_mps\n";
  for (const auto& s : profile.samples()) out << format_exact(s.depth) << ',' << format_exact(s.speed) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

SoundSpeedProfile parse_profile_csv(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  auto fail = [&](const std::string& what) -> ParseError {
    return ParseError(origin + ":" + std::to_string(line_no) + ": " + what);
  };

  std::optional<Timestamp> timestamp;
  bool header_seen = false;
  std::vector<DepthSample> samples;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view view = trim(line);
    if (view.empty()) continue;
    if (view.front() == '#') {
      constexpr std::string_view key = "timestamp=";
      const std::string_view body = trim(view.substr(1));
      if (body.starts_with(key)) {
        Timestamp ts = 0;
        if (!parse_number(body.substr(key.size()), ts)) throw fail("malformed timestamp");
        timestamp = ts;
      }
      continue;
    }
    if (!header_seen) {
      if (view != "depth_m,speed_mps") throw fail("expected header 'depth_m,speed_mps'");
      header_seen = true;
      continue;
    }
    const auto comma = view.find(',');
    DepthSample sample;
    if (comma == std::string_view::npos || !parse_number(view.substr(0, comma), sample.depth) ||
        !parse_number(view.substr(comma + 1), sample.speed)) {
      throw fail("expected '<depth>,<speed>'");
    }
    samples.push_back(sample);
  }
  if (!timestamp) throw ParseError(origin + ": missing '# timestamp=' line");
  if (!header_seen) throw ParseError(origin + ": missing header line");
  try {
    return {*timestamp, std::move(samples)};
  } catch (const InvalidInput& e) {
    throw ParseError(origin + ": " + e.what());
  }
}

SoundSpeedProfile read_profile_csv(const std::string& path) { return parse_profile_csv(read_text(path), path); }

void write_manifest(const Manifest& manifest, const std::string& path) {
  nlohmann::ordered_json doc;
  doc["scheme"]["kind"] = to_string(manifest.scheme.kind());
  doc["scheme"]["depths_m"] = manifest.scheme.depths();
  doc["profiles"] = manifest.profiles;
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << doc.dump(2) << '\n';
  if (!out) throw IoError("failed writing " + path);
}

Manifest read_manifest(const std::string& path) {
  const std::string text = read_text(path);
  try {
    const auto doc = nlohmann::json::parse(text);
    LayerScheme scheme(doc.at("scheme").at("depths_m").get<std::vector<double>>(),
                       layer_kind_from_string(doc.at("scheme").at("kind").get<std::string>()));
    auto profiles = doc.at("profiles").get<std::vector<std::string>>();
    const fs::path base = fs::path(path).parent_path();
    for (auto& p : profiles) {
      if (fs::path(p).is_relative()) p = (base / p).lexically_normal().string();
    }
    return {std::move(scheme), std::move(profiles)};
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(path + ": " + e.what());
  } catch (const InvalidInput& e) {
    throw ParseError(path + ": " + e.what());
  }
}

Dataset load_dataset(const std::string& manifest_path) {
  Manifest manifest = read_manifest(manifest_path);
  Dataset dataset{std::move(manifest.scheme), {}};
  dataset.profiles.reserve(manifest.profiles.size());
  for (const auto& p : manifest.profiles) dataset.profiles.push_back(read_profile_csv(p));
  return dataset;
}

}  // namespace sspcast
