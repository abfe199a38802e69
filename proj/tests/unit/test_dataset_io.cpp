#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <random>

#include "oracles.hpp"
#include "sspcast/dataset_io.hpp"
#include "sspcast/errors.hpp"
#include "sspcast/synth.hpp"

using namespace sspcast;

namespace {

void write_text(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out << text;
}

}  // namespace

TEST_CASE("profile CSV round trip", "[dataset_io]") {
  const auto dir = oracle::scratch_dir("profile_csv");
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(1450.0, 1550.0);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<DepthSample> samples;
    double depth = 0.0;
    const std::size_t n = 1 + rng() % 30;
    for (std::size_t k = 0; k < n; ++k) {
      samples.push_back({depth, u(rng)});
      depth += 0.1 + std::uniform_real_distribution<double>(0.0, 100.0)(rng);
    }
    const SoundSpeedProfile p(static_cast<Timestamp>(rng() % 2000000000), samples);
    const std::string path = (dir / "p.csv").string();
    write_profile_csv(p, path);
    CHECK(read_profile_csv(path) == p);
  }
}

TEST_CASE("profile CSV parsing", "[dataset_io]") {
  const SoundSpeedProfile p = parse_profile_csv("# timestamp=100\ndepth_m,speed_mps\n0,1500.5\n10, 1499\r\n\n");
  CHECK(p.timestamp() == 100);
  CHECK(p.depths() == std::vector<double>{0, 10});
  CHECK(p.speeds() == std::vector<double>{1500.5, 1499});

  CHECK_THROWS_AS(parse_profile_csv("depth_m,speed_mps\n0,1500\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("# timestamp=1\n0,1500\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("# timestamp=1\ndepth_m,speed_mps\n0;1500\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("# timestamp=1\ndepth_m,speed_mps\n0,abc\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("# timestamp=x\ndepth_m,speed_mps\n0,1500\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("# timestamp=1\ndepth_m,speed_mps\n10,1500\n5,1501\n"), ParseError);
  CHECK_THROWS_AS(parse_profile_csv("# timestamp=1\ndepth_m,speed_mps\n"), ParseError);
  CHECK_THROWS_AS(read_profile_csv((oracle::scratch_dir("profile_csv") / "absent.csv").string()), IoError);
}

TEST_CASE("manifest and dataset", "[dataset_io]") {
  const auto dir = oracle::scratch_dir("manifest");
  std::filesystem::create_directories(dir / "profiles");
  SynthSpec spec;
  spec.scheme = LayerScheme({0, 10, 50}, LayerKind::unequal_interval);
  spec.steps = 5;
  spec.noise_sigma = 0.3;
  const SynthDataset data = generate(spec);

  Manifest m{spec.scheme, {}};
  for (std::size_t k = 0; k < data.profiles.size(); ++k) {
    const std::string name = "profiles/p" + std::to_string(k) + ".csv";
    write_profile_csv(data.profiles[k], (dir / name).string());
    m.profiles.push_back(name);
  }
  write_manifest(m, (dir / "manifest.json").string());

  const Manifest back = read_manifest((dir / "manifest.json").string());
  CHECK(back.scheme == m.scheme);
  REQUIRE(back.profiles.size() == 5);
  CHECK(std::filesystem::equivalent(back.profiles[2], dir / "profiles" / "p2.csv"));

  const Dataset loaded = load_dataset((dir / "manifest.json").string());
  CHECK(loaded.scheme == spec.scheme);
  CHECK(loaded.profiles == data.profiles);
  CHECK(build_series(loaded.profiles, loaded.scheme).values() == data.series.values());

  write_text(dir / "bad.json", "{\"scheme\": {\"kind\": \"sideways\", \"depths_m\": [0, 1]}, \"profiles\": []}");
  CHECK_THROWS_AS(read_manifest((dir / "bad.json").string()), ParseError);
  write_text(dir / "bad.json", "{\"scheme\": {\"kind\": \"equal_interval\", \"depths_m\": [5, 1]}, \"profiles\": []}");
  CHECK_THROWS_AS(read_manifest((dir / "bad.json").string()), ParseError);
  write_text(dir / "bad.json", "not json");
  CHECK_THROWS_AS(read_manifest((dir / "bad.json").string()), ParseError);
  CHECK_THROWS_AS(read_manifest((dir / "none.json").string()), IoError);
}
