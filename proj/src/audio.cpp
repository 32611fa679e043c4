#include "framealign/audio.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <string>

#include "framealign/error.hpp"

namespace framealign {

namespace {

constexpr std::uint16_t kFormatPcm = 1;
constexpr std::uint16_t kFormatFloat = 3;
constexpr std::uint16_t kFormatExtensible = 0xFFFE;

std::uint16_t load_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t load_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t load_u64(const unsigned char* p) {
  return static_cast<std::uint64_t>(load_u32(p)) |
         (static_cast<std::uint64_t>(load_u32(p + 4)) << 32);
}

void store_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>(v >> 8));
}

void store_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void store_u64(std::string& out, std::uint64_t v) {
  store_u32(out, static_cast<std::uint32_t>(v & 0xFFFFFFFFu));
  store_u32(out, static_cast<std::uint32_t>(v >> 32));
}

[[noreturn]] void unreadable(const std::filesystem::path& path, const std::string& why) {
  throw Error("unreadable file " + path.string() + ": " + why);
}

}  // namespace

AudioClip read_wav(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) unreadable(path, "cannot open");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  const auto* data = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t size = bytes.size();

  if (size < 12 || std::memcmp(data, "RIFF", 4) != 0 || std::memcmp(data + 8, "WAVE", 4) != 0) {
    unreadable(path, "missing RIFF/WAVE header");
  }

  bool have_fmt = false;
  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const unsigned char* payload = nullptr;
  std::size_t payload_size = 0;

  std::size_t pos = 12;
  while (pos + 8 <= size) {
    const unsigned char* chunk = data + pos;
    const std::uint32_t chunk_size = load_u32(chunk + 4);
    const std::size_t body = pos + 8;
    if (std::memcmp(chunk, "fmt ", 4) == 0) {
      if (chunk_size < 16 || body + 16 > size) unreadable(path, "truncated fmt chunk");
      format = load_u16(data + body);
      channels = load_u16(data + body + 2);
      rate = load_u32(data + body + 4);
      bits = load_u16(data + body + 14);
      if (format == kFormatExtensible) {
        if (chunk_size < 40 || body + 26 > size) unreadable(path, "truncated extensible fmt chunk");
        format = load_u16(data + body + 24);
      }
      have_fmt = true;
    } else if (std::memcmp(chunk, "data", 4) == 0) {
      payload = data + body;
      // Streams written without a final size sometimes carry 0 or 0xFFFFFFFF.
      payload_size = std::min<std::size_t>(chunk_size, size - std::min(body, size));
      break;
    }
    pos = body + chunk_size + (chunk_size & 1u);
  }

  if (!have_fmt) unreadable(path, "no fmt chunk");
  if (payload == nullptr) unreadable(path, "no data chunk");
  if (channels < 1 || channels > 2) {
    throw Error("unsupported encoding in " + path.string() + ": " + std::to_string(channels) +
                " channels");
  }
  if (rate == 0) unreadable(path, "zero sample rate");

  const bool pcm16 = format == kFormatPcm && bits == 16;
  const bool f32 = format == kFormatFloat && bits == 32;
  const bool f64 = format == kFormatFloat && bits == 64;
  if (!pcm16 && !f32 && !f64) {
    throw Error("unsupported encoding in " + path.string() + ": format " +
                std::to_string(format) + ", " + std::to_string(bits) + " bits");
  }

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_bytes = bytes_per_sample * channels;
  const std::size_t frames = payload_size / frame_bytes;
  if (frames == 0) throw Error("zero-length audio in " + path.string());

  AudioClip clip;
  clip.sample_rate = static_cast<int>(rate);
  clip.samples.resize(frames);
  for (std::size_t i = 0; i < frames; ++i) {
    double acc = 0.0;
    for (std::size_t c = 0; c < channels; ++c) {
      const unsigned char* p = payload + i * frame_bytes + c * bytes_per_sample;
      double v;
      if (pcm16) {
        v = static_cast<std::int16_t>(load_u16(p)) / 32768.0;
      } else if (f32) {
        v = std::bit_cast<float>(load_u32(p));
      } else {
        v = std::bit_cast<double>(load_u64(p));
      }
      acc += v;
    }
    clip.samples[i] = channels == 1 ? acc : acc / channels;
  }
  for (double v : clip.samples) {
    if (!std::isfinite(v)) unreadable(path, "non-finite sample");
  }
  return clip;
}

void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               const WavWriteOptions& options) {
  if (clip.sample_rate <= 0) throw Error("write_wav: non-positive sample rate");
  if (clip.samples.empty()) throw Error("write_wav: empty clip");
  if (options.strict) {
    for (std::size_t i = 0; i < clip.samples.size(); ++i) {
      const double v = clip.samples[i];
      if (!(v >= -1.0 && v <= 1.0)) {
        throw Error("write_wav: sample " + std::to_string(i) + " out of range (" +
                    std::to_string(v) + ")");
      }
    }
  }

  std::uint16_t format = kFormatPcm;
  std::uint16_t bits = 16;
  if (options.encoding == WavEncoding::kFloat32) {
    format = kFormatFloat;
    bits = 32;
  } else if (options.encoding == WavEncoding::kFloat64) {
    format = kFormatFloat;
    bits = 64;
  }
  const std::uint32_t block_align = bits / 8;
  const std::uint64_t data_bytes = clip.samples.size() * static_cast<std::uint64_t>(block_align);
  if (data_bytes > 0xFFFFFFFFull - 36) throw Error("write_wav: clip too long for RIFF");

  std::string out;
  out.reserve(44 + data_bytes);
  out.append("RIFF");
  store_u32(out, static_cast<std::uint32_t>(36 + data_bytes));
  out.append("WAVEfmt ");
  store_u32(out, 16);
  store_u16(out, format);
  store_u16(out, 1);
  store_u32(out, static_cast<std::uint32_t>(clip.sample_rate));
  store_u32(out, static_cast<std::uint32_t>(clip.sample_rate) * block_align);
  store_u16(out, static_cast<std::uint16_t>(block_align));
  store_u16(out, bits);
  out.append("data");
  store_u32(out, static_cast<std::uint32_t>(data_bytes));

  for (double v : clip.samples) {
    switch (options.encoding) {
      case WavEncoding::kPcm16: {
        const double scaled = std::round(std::clamp(v, -1.0, 1.0) * 32768.0);
        const auto q = static_cast<std::int16_t>(std::clamp(scaled, -32768.0, 32767.0));
        store_u16(out, static_cast<std::uint16_t>(q));
        break;
      }
      case WavEncoding::kFloat32:
        store_u32(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
        break;
      case WavEncoding::kFloat64:
        store_u64(out, std::bit_cast<std::uint64_t>(v));
        break;
    }
  }

  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw Error("write_wav: cannot open " + path.string());
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw Error("write_wav: I/O failure writing " + path.string());
}

void validate_clip(const AudioClip& clip) {
  if (clip.sample_rate <= 0) throw Error("audio clip has non-positive sample rate");
  if (clip.samples.empty()) throw Error("audio clip is empty");
  for (double v : clip.samples) {
    if (!std::isfinite(v)) throw Error("audio clip has non-finite samples");
  }
}

double rms(std::span<const double> samples) {
  if (samples.empty()) throw Error("rms of empty input");
  double acc = 0.0;
  for (double v : samples) acc += v * v;
  return std::sqrt(acc / static_cast<double>(samples.size()));
}

double db_to_linear(Decibels db) { return std::pow(10.0, db.value / 20.0); }

double power_to_db(double mean_power) {
  if (mean_power <= 0.0) return kSilenceFloorDb;
  return 10.0 * std::log10(mean_power);
}

}  // namespace framealign
