#pragma once

#include <filesystem>
#include <span>
#include <vector>

namespace framealign {

/// Mono waveform held in double precision, amplitudes nominally in [-1, 1].
struct AudioClip {
  std::vector<double> samples;
  int sample_rate = 16000;

  double duration_s() const {
    return static_cast<double>(samples.size()) / sample_rate;
  }
  std::size_t size() const { return samples.size(); }
};

/// Level in dB, power-ratio convention (amplitude ratio = 10^(dB/20)).
struct Decibels {
  double value = 0.0;
};

/// Sentinel reported for windows with exactly zero energy.
inline constexpr double kSilenceFloorDb = -120.0;

enum class WavEncoding {
  kPcm16,
  kFloat32,
  kFloat64,
};

struct WavWriteOptions {
  WavEncoding encoding = WavEncoding::kPcm16;
  // Reject samples outside [-1, 1] instead of clamping them.
  bool strict = false;
};

/// Reads a PCM16 / IEEE float WAV with one or two channels. Stereo input is
/// averaged to mono. Throws Error on unreadable or unsupported files.
AudioClip read_wav(const std::filesystem::path& path);

void write_wav(const AudioClip& clip, const std::filesystem::path& path,
               const WavWriteOptions& options = {});

/// Throws if the clip violates AudioClip invariants (positive rate,
/// non-empty, finite samples).
void validate_clip(const AudioClip& clip);

double rms(std::span<const double> samples);
inline double rms(const AudioClip& clip) { return rms(clip.samples); }

double db_to_linear(Decibels db);

// 10*log10 of a mean power; zero maps to kSilenceFloorDb.
double power_to_db(double mean_power);

}  // namespace framealign
