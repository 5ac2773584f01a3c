#pragma once

#include <filesystem>

#include "jano/tensor.hpp"

namespace jano {

// ".jlat" binary layout, little endian:
//   bytes 0..3   magic "JANO"
//   bytes 4..7   format version (u32, currently 1)
//   bytes 8..23  dims C, F, H, W (4 x u32)
//   bytes 24..   row-major float32 payload, C*F*H*W values
inline constexpr uint32_t kLatentFormatVersion = 1;

void save_latent(const LatentTensor& tensor, const std::filesystem::path& path);

/// Throws FormatError (with byte offset) on bad magic, unknown version,
/// truncation, dims/payload mismatch, or non-finite payload values.
LatentTensor load_latent(const std::filesystem::path& path);

}  // namespace jano
