#include "probsense/csi/csi_io.hpp"

#include <bit>
#include <cstring>
#include <fstream>
#include <stdexcept>
#include <vector>

#include <json.hpp>

#include "probsense/rng.hpp"

namespace probsense::csi {

namespace {

void put_f32_le(std::vector<unsigned char>& buf, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  buf.push_back(static_cast<unsigned char>(bits & 0xff));
  buf.push_back(static_cast<unsigned char>((bits >> 8) & 0xff));
  buf.push_back(static_cast<unsigned char>((bits >> 16) & 0xff));
  buf.push_back(static_cast<unsigned char>((bits >> 24) & 0xff));
}

float get_f32_le(const unsigned char* p) {
  const std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                             (static_cast<std::uint32_t>(p[1]) << 8) |
                             (static_cast<std::uint32_t>(p[2]) << 16) |
                             (static_cast<std::uint32_t>(p[3]) << 24);
  float v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void write_csi(const std::filesystem::path& header_path, const CsiTensor& tensor,
               const RecordingMeta& meta) {
  tensor.validate();
  std::filesystem::path payload_path = header_path;
  payload_path.replace_extension(".bin");

  std::vector<unsigned char> payload;
  payload.reserve(tensor.values.size() * 8);
  for (const std::complex<double>& v : tensor.values) {
    put_f32_le(payload, static_cast<float>(v.real()));
    put_f32_le(payload, static_cast<float>(v.imag()));
  }
  {
    std::ofstream bin(payload_path, std::ios::binary | std::ios::trunc);
    if (!bin) {
      throw std::runtime_error("cannot open for write: " + payload_path.string());
    }
    bin.write(reinterpret_cast<const char*>(payload.data()),
              static_cast<std::streamsize>(payload.size()));
    if (!bin) {
      throw std::runtime_error("write failed: " + payload_path.string());
    }
  }

  nlohmann::json header;
  header["dims"] = {{"n_tx", tensor.n_tx},
                    {"n_rx", tensor.n_rx},
                    {"n_sc", tensor.n_sc},
                    {"n_samples", tensor.n_samples}};
  header["sample_rate_hz"] = tensor.sample_rate_hz;
  header["home_id"] = meta.home_id;
  header["label"] = std::string(to_string(meta.label));
  header["seed"] = meta.seed;
  header["payload"] = payload_path.filename().string();

  std::ofstream out(header_path, std::ios::trunc);
  if (!out) {
    throw std::runtime_error("cannot open for write: " + header_path.string());
  }
  out << header.dump(2) << "\n";
  if (!out) {
    throw std::runtime_error("write failed: " + header_path.string());
  }
}

CsiRecording read_csi(const std::filesystem::path& header_path) {
  std::ifstream in(header_path);
  if (!in) {
    throw std::runtime_error("cannot open: " + header_path.string());
  }
  nlohmann::json header = nlohmann::json::parse(in);

  CsiRecording rec;
  rec.tensor.n_tx = header.at("dims").at("n_tx").get<int>();
  rec.tensor.n_rx = header.at("dims").at("n_rx").get<int>();
  rec.tensor.n_sc = header.at("dims").at("n_sc").get<int>();
  rec.tensor.n_samples = header.at("dims").at("n_samples").get<int>();
  rec.tensor.sample_rate_hz = header.at("sample_rate_hz").get<double>();
  rec.meta.home_id = header.at("home_id").get<std::string>();
  rec.meta.label = motion_label_from_string(header.at("label").get<std::string>());
  rec.meta.seed = header.at("seed").get<std::uint64_t>();

  const std::filesystem::path payload_path =
      header_path.parent_path() / header.at("payload").get<std::string>();
  std::ifstream bin(payload_path, std::ios::binary);
  if (!bin) {
    throw std::runtime_error("cannot open payload: " + payload_path.string());
  }
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(bin)),
                                   std::istreambuf_iterator<char>());
  const std::size_t expect = static_cast<std::size_t>(rec.tensor.n_tx) *
                             rec.tensor.n_rx * rec.tensor.n_sc *
                             static_cast<std::size_t>(rec.tensor.n_samples);
  if (bytes.size() != expect * 8) {
    throw std::runtime_error("payload size mismatch in " + payload_path.string());
  }
  rec.tensor.values.resize(expect);
  for (std::size_t i = 0; i < expect; ++i) {
    const unsigned char* p = bytes.data() + i * 8;
    rec.tensor.values[i] =
        std::complex<double>(get_f32_le(p), get_f32_le(p + 4));
  }
  rec.tensor.validate();
  return rec;
}

std::string file_content_hash(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw std::runtime_error("cannot open: " + path.string());
  }
  std::uint64_t h = 1469598103934665603ull;
  char buf[4096];
  while (in.read(buf, sizeof(buf)) || in.gcount() > 0) {
    const std::streamsize n = in.gcount();
    for (std::streamsize i = 0; i < n; ++i) {
      h ^= static_cast<unsigned char>(buf[i]);
      h *= 1099511628211ull;
    }
    if (!in) break;
  }
  char hex[17];
  std::snprintf(hex, sizeof(hex), "%016llx",
                static_cast<unsigned long long>(h));
  return std::string(hex);
}

}  // namespace probsense::csi
