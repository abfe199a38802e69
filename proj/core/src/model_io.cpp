#include "sspcast/model_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <iterator>

#include <zlib.h>

#include "sspcast/errors.hpp"

namespace sspcast {

static_assert(std::endian::native == std::endian::little, "model files are written in host order");

namespace {

constexpr char kMagic[8] = {'S', 'S', 'P', 'H', 'L', 'S', 'T', 'M'};
constexpr std::size_t kPreambleSize = sizeof(kMagic) + sizeof(std::uint32_t) + sizeof(std::uint64_t);

class Writer {
 public:
  template <typename T>
  void put(T value) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(&value);
    bytes_.insert(bytes_.end(), p, p + sizeof(T));
  }
  void put_doubles(const double* data, std::size_t count) {
    const auto* p = reinterpret_cast<const std::uint8_t*>(data);
    bytes_.insert(bytes_.end(), p, p + count * sizeof(double));
  }
  void put_raw(const char* data, std::size_t count) { bytes_.insert(bytes_.end(), data, data + count); }
  std::vector<std::uint8_t>& bytes() { return bytes_; }

 private:
  std::vector<std::uint8_t> bytes_;
};

class Reader {
 public:
  Reader(const std::vector<std::uint8_t>& bytes, std::size_t end) : bytes_(bytes), end_(end) {}

  template <typename T>
  T get() {
    T value;
    std::memcpy(&value, take(sizeof(T)), sizeof(T));
    return value;
  }
  void get_doubles(double* out, std::size_t count) {
    if (count > (end_ - pos_) / sizeof(double)) fail_truncated();
    std::memcpy(out, take(count * sizeof(double)), count * sizeof(double));
  }
  std::size_t remaining() const { return end_ - pos_; }
  void skip(std::size_t n) { take(n); }

 private:
  [[noreturn]] static void fail_truncated() {
    throw ModelFormatError(ModelFormatFault::truncated, "unexpected end of model data");
  }
  const std::uint8_t* take(std::size_t n) {
    if (n > end_ - pos_) fail_truncated();
    const std::uint8_t* p = bytes_.data() + pos_;
    pos_ += n;
    return p;
  }

  const std::vector<std::uint8_t>& bytes_;
  std::size_t end_;
  std::size_t pos_ = 0;
};

std::uint32_t crc_of(const std::uint8_t* data, std::size_t size) {
  return static_cast<std::uint32_t>(crc32(crc32(0L, Z_NULL, 0), data, static_cast<uInt>(size)));
}

[[noreturn]] void shape_error(const std::string& what) {
  throw ModelFormatError(ModelFormatFault::shape_inconsistent, what);
}

}  // namespace

std::vector<std::uint8_t> serialize_model(const HierarchicalModel& model) {
  model.validate();
  const std::size_t layers = model.scheme.size();
  const std::size_t per_layer = LstmParams::parameter_count(model.config.hidden_size, 1);

  Writer w;
  w.put_raw(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kModelFormatVersion);
  w.put<std::uint64_t>(0);  // patched below

  w.put<std::uint32_t>(static_cast<std::uint32_t>(layers));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(model.scheme.kind()));
  w.put_doubles(model.scheme.depths().data(), layers);

  const TrainConfig& c = model.config;
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.hidden_size));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.window_length));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.epochs));
  w.put<std::uint32_t>(static_cast<std::uint32_t>(c.batch_size));
  w.put<std::uint8_t>(static_cast<std::uint8_t>(c.optimizer));
  w.put<std::uint8_t>(c.shuffle ? 1 : 0);
  w.put<double>(c.learning_rate);
  w.put<std::uint64_t>(c.rng_seed);

  w.put<std::uint32_t>(static_cast<std::uint32_t>(model.training_timestamps.size()));
  for (Timestamp ts : model.training_timestamps) w.put<std::int64_t>(ts);

  w.put_doubles(model.normalization.min.data(), layers);
  w.put_doubles(model.normalization.max.data(), layers);

  w.put<std::uint64_t>(per_layer);
  for (const auto& p : model.layers) w.put_doubles(p.flat().data(), per_layer);

  auto& bytes = w.bytes();
  const std::uint64_t total = bytes.size() + sizeof(std::uint32_t);
  std::memcpy(bytes.data() + sizeof(kMagic) + sizeof(std::uint32_t), &total, sizeof(total));
  w.put<std::uint32_t>(crc_of(bytes.data(), bytes.size()));
  return std::move(bytes);
}

HierarchicalModel deserialize_model(const std::vector<std::uint8_t>& bytes) {
  if (bytes.size() < kPreambleSize + sizeof(std::uint32_t)) {
    if (bytes.size() >= sizeof(kMagic) && std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
      throw ModelFormatError(ModelFormatFault::bad_magic, "not a model file");
    }
    throw ModelFormatError(ModelFormatFault::truncated, "file shorter than the model preamble");
  }
  if (std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw ModelFormatError(ModelFormatFault::bad_magic, "not a model file");
  }
  std::uint32_t version = 0;
  std::uint64_t declared = 0;
  std::memcpy(&version, bytes.data() + sizeof(kMagic), sizeof(version));
  std::memcpy(&declared, bytes.data() + sizeof(kMagic) + sizeof(version), sizeof(declared));
  if (version != kModelFormatVersion) {
    throw ModelFormatError(ModelFormatFault::version_mismatch,
                           "file version " + std::to_string(version) + ", expected " +
                               std::to_string(kModelFormatVersion));
  }
  if (bytes.size() < declared) {
    throw ModelFormatError(ModelFormatFault::truncated, "file has " + std::to_string(bytes.size()) +
                                                            " bytes, header declares " + std::to_string(declared));
  }
  if (bytes.size() > declared) {
    throw ModelFormatError(ModelFormatFault::trailing_bytes, "file is longer than its header declares");
  }
  const std::size_t body_end = bytes.size() - sizeof(std::uint32_t);
  std::uint32_t stored_crc = 0;
  std::memcpy(&stored_crc, bytes.data() + body_end, sizeof(stored_crc));
  if (crc_of(bytes.data(), body_end) != stored_crc) {
    throw ModelFormatError(ModelFormatFault::checksum_mismatch, "model data is corrupted");
  }

  Reader r(bytes, body_end);
  r.skip(kPreambleSize);

  const std::size_t layers = r.get<std::uint32_t>();
  const auto kind_byte = r.get<std::uint8_t>();
  if (kind_byte > static_cast<std::uint8_t>(LayerKind::unequal_interval)) shape_error("unknown scheme kind");
  if (layers > r.remaining() / sizeof(double)) shape_error("layer count exceeds file size");
  std::vector<double> depths(layers);
  r.get_doubles(depths.data(), layers);

  TrainConfig config;
  config.hidden_size = r.get<std::uint32_t>();
  config.window_length = r.get<std::uint32_t>();
  config.epochs = r.get<std::uint32_t>();
  config.batch_size = r.get<std::uint32_t>();
  const auto optimizer_byte = r.get<std::uint8_t>();
  if (optimizer_byte > static_cast<std::uint8_t>(OptimizerKind::sgd)) shape_error("unknown optimizer");
  config.optimizer = static_cast<OptimizerKind>(optimizer_byte);
  config.shuffle = r.get<std::uint8_t>() != 0;
  config.learning_rate = r.get<double>();
  config.rng_seed = r.get<std::uint64_t>();

  const std::size_t stamps = r.get<std::uint32_t>();
  if (stamps > r.remaining() / sizeof(std::int64_t)) shape_error("timestamp count exceeds file size");
  std::vector<Timestamp> timestamps(stamps);
  for (auto& ts : timestamps) ts = r.get<std::int64_t>();

  NormalizationParams normalization;
  normalization.min.resize(layers);
  normalization.max.resize(layers);
  r.get_doubles(normalization.min.data(), layers);
  r.get_doubles(normalization.max.data(), layers);

  const auto per_layer = r.get<std::uint64_t>();
  if (config.hidden_size == 0 || per_layer != LstmParams::parameter_count(config.hidden_size, 1)) {
    shape_error("parameter block size does not match the hidden size");
  }
  if (r.remaining() != layers * per_layer * sizeof(double)) shape_error("parameter blocks do not fill the file");

  try {
    HierarchicalModel model{LayerScheme(std::move(depths), static_cast<LayerKind>(kind_byte)), {},
                            std::move(normalization), config, std::move(timestamps)};
    model.layers.reserve(layers);
    for (std::size_t k = 0; k < layers; ++k) {
      LstmParams params(config.hidden_size, 1);
      r.get_doubles(params.flat().data(), per_layer);
      model.layers.push_back(std::move(params));
    }
    model.validate();
    return model;
  } catch (const InvalidInput& e) {
    shape_error(e.what());
  }
}

void save_model(const HierarchicalModel& model, const std::string& path) {
  const auto bytes = serialize_model(model);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write model file " + path);
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("failed writing model file " + path);
}

HierarchicalModel load_model(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open model file " + path);
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  return deserialize_model(bytes);
}

}  // namespace sspcast
