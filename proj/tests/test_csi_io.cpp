#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <stdexcept>

#include "probsense/csi/channel.hpp"
#include "probsense/csi/csi_io.hpp"

using namespace probsense::csi;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  const fs::path dir = fs::temp_directory_path() / "probsense-io-test";
  fs::create_directories(dir);
  return dir;
}

CsiTensor small_tensor(std::uint64_t seed) {
  ChannelConfig cfg = make_home("Home-1", seed);
  MotionScenario s;
  s.label = MotionLabel::kMotion;
  s.duration_s = 0.2;
  s.home_id = "Home-1";
  return synth_csi(cfg, s, seed);
}

}  // namespace

TEST_CASE("recordings round-trip through header plus payload") {
  const fs::path dir = temp_dir();
  const fs::path header = dir / "rec.json";
  const CsiTensor tensor = small_tensor(11);
  RecordingMeta meta;
  meta.home_id = "Home-1";
  meta.label = MotionLabel::kMotion;
  meta.seed = 11;
  write_csi(header, tensor, meta);

  CHECK(fs::exists(header));
  CHECK(fs::exists(dir / "rec.bin"));
  // float32 pairs: 8 bytes per complex value.
  CHECK(fs::file_size(dir / "rec.bin") == tensor.size() * 8);

  const CsiRecording rt = read_csi(header);
  CHECK(rt.meta.home_id == "Home-1");
  CHECK(rt.meta.label == MotionLabel::kMotion);
  CHECK(rt.meta.seed == 11);
  CHECK(rt.tensor.n_tx == tensor.n_tx);
  CHECK(rt.tensor.n_rx == tensor.n_rx);
  CHECK(rt.tensor.n_sc == tensor.n_sc);
  CHECK(rt.tensor.n_samples == tensor.n_samples);
  CHECK(rt.tensor.sample_rate_hz == tensor.sample_rate_hz);
  REQUIRE(rt.tensor.size() == tensor.size());
  // Values pass through a float32 quantization; bound the relative error.
  for (std::size_t i = 0; i < tensor.size(); ++i) {
    const double scale = std::max(1.0, std::abs(tensor.values[i]));
    CHECK(std::abs(rt.tensor.values[i] - tensor.values[i]) < 1e-6 * scale);
  }
}

TEST_CASE("float32 payload round-trips bit-exactly once quantized") {
  const fs::path dir = temp_dir();
  const fs::path header = dir / "requant.json";
  const CsiTensor tensor = small_tensor(12);
  RecordingMeta meta{"Home-1", MotionLabel::kNoMotion, 12};
  write_csi(header, tensor, meta);
  const CsiRecording once = read_csi(header);
  write_csi(header, once.tensor, meta);
  const CsiRecording twice = read_csi(header);
  CHECK(once.tensor.values == twice.tensor.values);
}

TEST_CASE("payload size mismatch is an error") {
  const fs::path dir = temp_dir();
  const fs::path header = dir / "bad.json";
  const CsiTensor tensor = small_tensor(13);
  RecordingMeta meta{"Home-1", MotionLabel::kMotion, 13};
  write_csi(header, tensor, meta);
  fs::resize_file(dir / "bad.bin", 12);
  CHECK_THROWS_AS(read_csi(header), std::runtime_error);
}

TEST_CASE("missing files are errors") {
  const fs::path dir = temp_dir();
  CHECK_THROWS_AS(read_csi(dir / "nope.json"), std::runtime_error);

  const fs::path header = dir / "orphan.json";
  const CsiTensor tensor = small_tensor(14);
  RecordingMeta meta{"Home-1", MotionLabel::kMotion, 14};
  write_csi(header, tensor, meta);
  fs::remove(dir / "orphan.bin");
  CHECK_THROWS_AS(read_csi(header), std::runtime_error);
}

TEST_CASE("content hash is stable and content-sensitive") {
  const fs::path dir = temp_dir();
  const fs::path a = dir / "a.bin";
  const fs::path b = dir / "b.bin";
  std::ofstream(a, std::ios::binary) << "hello";
  std::ofstream(b, std::ios::binary) << "hello!";
  CHECK(file_content_hash(a) == file_content_hash(a));
  CHECK(file_content_hash(a) != file_content_hash(b));
  // 64-bit FNV, hex-encoded.
  CHECK(file_content_hash(a).size() == 16);
}
