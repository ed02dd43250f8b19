#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "slimnet/network.hpp"

namespace slimnet {

/// Binary checkpoint layout, all integers little-endian:
///   8 bytes  magic "SLIMCKPT"
///   u32      format version (currently 1)
///   u64      architecture JSON length
///   bytes    architecture JSON (canonical expanded form)
///   u64      parameter count
///   f64[]    parameters in declaration order (layer, neuron, weights, bias)
///   u64      FNV-1a 64 checksum of every preceding byte
/// Loading validates magic, version, bounds, checksum, the embedded
/// architecture, the parameter count, and that every value is finite;
/// failures raise FormatError carrying the byte offset.
std::vector<std::uint8_t> serialize_checkpoint(const Network& net);
Network parse_checkpoint(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const Network& net, const std::string& path);
Network load_checkpoint(const std::string& path);

std::uint64_t fnv1a64(const std::uint8_t* data, std::size_t n);

}  // namespace slimnet
