#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "framealign/manifest.hpp"
#include "framealign/rng.hpp"

namespace framealign {

struct Centroid {
  int cluster_id = 0;
  std::string name;
  std::vector<double> embedding;  // unit norm
};

struct PhraseEntry {
  std::string phrase;
  std::vector<double> embedding;  // may be empty when cluster_id was given
  int cluster_id = 0;
};

/// Phrase database with its semantic clusters. Immutable once built.
class ClusterSpace {
 public:
  ClusterSpace() = default;

  // Phrases with an unset cluster (nullopt) are assigned to the nearest
  // centroid by cosine similarity; they must then carry an embedding.
  ClusterSpace(std::vector<Centroid> centroids,
               std::vector<std::pair<PhraseEntry, std::optional<int>>> phrases);

  static ClusterSpace load(const std::filesystem::path& centroids_jsonl,
                           const std::filesystem::path& phrases_jsonl);

  const std::vector<Centroid>& centroids() const { return centroids_; }
  const std::vector<PhraseEntry>& phrases() const { return phrases_; }
  std::size_t dimension() const { return dim_; }

  std::optional<int> cluster_of(const std::string& phrase) const;
  bool has_cluster(int cluster_id) const { return centroid_index_.contains(cluster_id); }

 private:
  std::vector<Centroid> centroids_;
  std::vector<PhraseEntry> phrases_;
  std::unordered_map<std::string, std::size_t> phrase_index_;
  std::unordered_map<int, std::size_t> centroid_index_;
  std::size_t dim_ = 0;
};

/// Nearest centroid by cosine similarity; exact ties go to the lowest id.
int assign_cluster(std::span<const double> embedding, const ClusterSpace& space);

struct PositivePhrase {
  std::string phrase;
  std::vector<std::uint8_t> labels;
  std::vector<double> embedding;  // used only when the phrase is not in the database
};

struct EnrichedAnnotation {
  std::vector<std::string> phrases;
  std::vector<std::vector<std::uint8_t>> labels;
  std::size_t positive_count = 0;
  std::vector<int> clusters;        // cluster id per phrase
  std::size_t duplicate_count = 0;  // only nonzero with replacement fallback
};

struct SamplerOptions {
  std::size_t total_phrases = 20;  // N
  // Sample with replacement when the pool is smaller than N - K instead of
  // failing.
  bool allow_replacement = false;
};

/// Pads K positives to N phrases with negatives drawn uniformly without
/// replacement from phrases whose cluster differs from every positive's.
EnrichedAnnotation sample_negative_phrases(const std::vector<PositivePhrase>& positives,
                                           const ClusterSpace& space,
                                           const SamplerOptions& options, int frames, Rng& rng);

// The candidate pool for a set of positive clusters, in database order.
std::vector<std::size_t> negative_pool(const ClusterSpace& space,
                                       std::span<const int> positive_clusters);

int resolve_cluster(const ClusterSpace& space, const std::string& phrase,
                    std::span<const double> embedding);

/// Enrichment for one manifest row; the stream is derived from (seed, row id).
EnrichedAnnotation enrich_scene(const SceneRecord& scene, const ClusterSpace& space,
                                const SamplerOptions& options, int frames, std::uint64_t seed);

std::vector<SceneRecord> enrich_manifest(const std::vector<SceneRecord>& scenes,
                                         const ClusterSpace& space,
                                         const SamplerOptions& options, int frames,
                                         std::uint64_t seed, int workers = 1);

}  // namespace framealign
