#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sspcast/hierarchy.hpp"

namespace sspcast {

/// Binary model container, little-endian:
///
///   "SSPHLSTM" | u32 version | u64 file size | scheme | train config | timestamps
///   | normalization | per-layer parameter blocks | u32 CRC-32 of all preceding bytes
///
/// The size grows linearly with the layer count for a fixed hidden size.
inline constexpr std::uint32_t kModelFormatVersion = 1;

std::vector<std::uint8_t> serialize_model(const HierarchicalModel& model);
/// Throws ModelFormatError; never returns a partially read model.
HierarchicalModel deserialize_model(const std::vector<std::uint8_t>& bytes);

void save_model(const HierarchicalModel& model, const std::string& path);
HierarchicalModel load_model(const std::string& path);

}  // namespace sspcast
