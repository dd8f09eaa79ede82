#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include "probsense/csi/channel.hpp"

namespace probsense::csi {

struct RecordingMeta {
  std::string home_id;
  MotionLabel label = MotionLabel::kNoMotion;
  std::uint64_t seed = 0;
};

// On-disk recording: a JSON header {dims, sample_rate_hz, home_id, label,
// seed, payload} plus a sidecar binary of little-endian float32 (real, imag)
// pairs in row-major (tx, rx, sc, sample) order. The payload path in the
// header is relative to the header's directory.
void write_csi(const std::filesystem::path& header_path, const CsiTensor& tensor,
               const RecordingMeta& meta);

struct CsiRecording {
  CsiTensor tensor;
  RecordingMeta meta;
};
CsiRecording read_csi(const std::filesystem::path& header_path);

// FNV-1a over a file's bytes, hex-encoded. Used for manifest content hashes.
std::string file_content_hash(const std::filesystem::path& path);

}  // namespace probsense::csi
