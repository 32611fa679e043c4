#pragma once

// Synthetic inputs shared by the unit and acceptance suites.

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <string>
#include <vector>

#include "framealign/audio.hpp"
#include "framealign/cluster.hpp"
#include "framealign/manifest.hpp"
#include "framealign/mixer.hpp"
#include "framealign/rng.hpp"

namespace fixtures {

namespace fs = std::filesystem;
using framealign::AudioClip;

// Scratch directory removed on destruction.
class TempDir {
 public:
  explicit TempDir(const std::string& tag = "fa") {
    std::string templ = (fs::temp_directory_path() / (tag + "_XXXXXX")).string();
    if (::mkdtemp(templ.data()) == nullptr) throw std::runtime_error("mkdtemp failed");
    path_ = templ;
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;
  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& rel) const { return path_ / rel; }

 private:
  fs::path path_;
};

inline AudioClip silence(double seconds, int sr = 16000) {
  AudioClip c;
  c.sample_rate = sr;
  c.samples.assign(static_cast<std::size_t>(std::llround(seconds * sr)), 0.0);
  return c;
}

// Writes a sine of the given peak amplitude into [start_s, end_s).
inline void add_tone(AudioClip& clip, double start_s, double end_s, double peak,
                     double freq_hz = 440.0) {
  const auto a = static_cast<std::size_t>(std::llround(start_s * clip.sample_rate));
  const auto b = std::min(clip.size(),
                          static_cast<std::size_t>(std::llround(end_s * clip.sample_rate)));
  for (std::size_t i = a; i < b; ++i) {
    const double t = static_cast<double>(i) / clip.sample_rate;
    clip.samples[i] += peak * std::sin(2.0 * std::numbers::pi * freq_hz * t);
  }
}

inline double dbfs_amplitude(double db) { return std::pow(10.0, db / 20.0); }

// Low-level deterministic noise used as a background.
inline AudioClip noise(double seconds, double amplitude, std::uint64_t seed, int sr = 16000) {
  AudioClip c = silence(seconds, sr);
  framealign::Rng rng(seed);
  for (double& v : c.samples) v = amplitude * rng.uniform(-1.0, 1.0);
  return c;
}

// The clipper's canonical fixture: silence, a -6 dBFS tone over [2, 5) s,
// silence up to 8 s.
inline AudioClip tone_fixture(double on = 2.0, double off = 5.0, double total = 8.0) {
  AudioClip c = silence(total);
  add_tone(c, on, off, dbfs_amplitude(-6.0) * std::sqrt(2.0));
  return c;
}

// Ten clusters of eight phrases. Cluster c has centroid e_c in R^16.
// Phrases "c<c>_p<j>"; the last phrase of each cluster carries only an
// embedding so the loader has to assign it.
inline constexpr int kClusters = 10;
inline constexpr int kPerCluster = 8;
inline constexpr int kDim = 16;

inline std::string phrase_name(int cluster, int j) {
  return "c" + std::to_string(cluster) + "_p" + std::to_string(j);
}

inline int cluster_of_name(const std::string& phrase) {
  return std::stoi(phrase.substr(1, phrase.find('_') - 1));
}

inline std::vector<double> near_axis(int axis, double jitter, std::uint64_t seed) {
  framealign::Rng rng(seed);
  std::vector<double> v(kDim, 0.0);
  for (double& x : v) x = jitter * rng.uniform(-1.0, 1.0);
  v[static_cast<std::size_t>(axis)] = 1.0;
  double n = 0.0;
  for (double x : v) n += x * x;
  for (double& x : v) x /= std::sqrt(n);
  return v;
}

inline void write_cluster_files(const fs::path& centroids, const fs::path& phrases) {
  std::vector<framealign::Json> crows, prows;
  for (int c = 0; c < kClusters; ++c) {
    std::vector<double> axis(kDim, 0.0);
    axis[static_cast<std::size_t>(c)] = 1.0;
    crows.push_back({{"cluster_id", c}, {"name", "cluster " + std::to_string(c)},
                     {"embedding", axis}});
    for (int j = 0; j < kPerCluster; ++j) {
      framealign::Json row{{"phrase", phrase_name(c, j)}};
      if (j + 1 < kPerCluster) {
        row["cluster_id"] = c;
      } else {
        row["embedding"] = near_axis(c, 0.05, static_cast<std::uint64_t>(c * 100 + j));
      }
      prows.push_back(row);
    }
  }
  framealign::write_jsonl(centroids, crows);
  framealign::write_jsonl(phrases, prows);
}

inline framealign::ClusterSpace make_space() {
  std::vector<framealign::Centroid> cs;
  std::vector<std::pair<framealign::PhraseEntry, std::optional<int>>> ps;
  for (int c = 0; c < kClusters; ++c) {
    std::vector<double> axis(kDim, 0.0);
    axis[static_cast<std::size_t>(c)] = 1.0;
    cs.push_back({c, "cluster " + std::to_string(c), axis});
    for (int j = 0; j < kPerCluster; ++j) {
      ps.push_back({framealign::PhraseEntry{phrase_name(c, j), {}, 0}, c});
    }
  }
  return framealign::ClusterSpace(std::move(cs), std::move(ps));
}

// Twenty single-event source recordings, two labels per cluster for the
// first ten clusters. Event lengths vary between 1.2 s and 6 s, onsets
// between 0.5 s and 2 s; each file is 8 s long.
struct SourceBank {
  fs::path manifest;
  std::vector<std::string> labels;
  std::vector<std::pair<double, double>> truth;  // tone interval per clip
};

inline SourceBank write_source_bank(const fs::path& dir, int count = 20) {
  fs::create_directories(dir / "audio");
  SourceBank bank;
  bank.manifest = dir / "sources.jsonl";
  std::vector<framealign::Json> rows;
  for (int i = 0; i < count; ++i) {
    const double on = 0.5 + 0.075 * i;
    const double len = 1.2 + 0.24 * i;
    const double peak = dbfs_amplitude(-10.0 + 0.2 * i) * std::sqrt(2.0);
    AudioClip c = silence(8.0);
    add_tone(c, on, on + len, peak, 220.0 + 37.0 * i);
    const std::string id = "src" + std::to_string(100 + i);
    const std::string rel = "audio/" + id + ".wav";
    framealign::write_wav(c, dir / rel);
    const std::string label = phrase_name(i % kClusters, i / kClusters);
    rows.push_back({{"id", id}, {"audio", rel}, {"label", label}});
    bank.labels.push_back(label);
    bank.truth.emplace_back(on, on + len);
  }
  framealign::write_jsonl(bank.manifest, rows);
  return bank;
}

inline fs::path write_backgrounds(const fs::path& dir, int count = 4) {
  fs::create_directories(dir);
  for (int i = 0; i < count; ++i) {
    framealign::write_wav(noise(10.0, 0.02 + 0.01 * i, 900 + static_cast<std::uint64_t>(i)),
                          dir / ("bg" + std::to_string(i) + ".wav"));
  }
  return dir;
}

// In-memory bank for mixer tests: tones of assorted lengths, one phrase each.
inline std::vector<framealign::BankEvent> memory_bank(int count = 12) {
  std::vector<framealign::BankEvent> bank;
  for (int i = 0; i < count; ++i) {
    const double len = 1.0 + 0.5 * (i % 10);
    AudioClip c = silence(len);
    add_tone(c, 0.0, len, 0.3 + 0.05 * (i % 5), 300.0 + 50.0 * i);
    bank.push_back({"ev" + std::to_string(i), phrase_name(i % kClusters, i / kClusters), c});
  }
  return bank;
}

inline std::vector<framealign::Background> memory_backgrounds(int count = 3) {
  std::vector<framealign::Background> out;
  for (int i = 0; i < count; ++i) {
    out.push_back({"bg" + std::to_string(i),
                   noise(10.0, 0.05 + 0.02 * i, 500 + static_cast<std::uint64_t>(i))});
  }
  return out;
}

inline std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace fixtures
