#include "framealign/cluster.hpp"

#include <algorithm>
#include <cmath>
#include <iostream>
#include <limits>
#include <numeric>
#include <unordered_set>

#include "framealign/error.hpp"
#include "framealign/mixer.hpp"
#include "framealign/parallel.hpp"

namespace framealign {

namespace {

constexpr double kUnitNormTol = 1e-6;
constexpr std::uint64_t kEnrichSalt = 11;

double norm(std::span<const double> v) {
  double acc = 0.0;
  for (double x : v) acc += x * x;
  return std::sqrt(acc);
}

double dot(std::span<const double> a, std::span<const double> b) {
  double acc = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) acc += a[i] * b[i];
  return acc;
}

}  // namespace

ClusterSpace::ClusterSpace(std::vector<Centroid> centroids,
                           std::vector<std::pair<PhraseEntry, std::optional<int>>> phrases)
    : centroids_(std::move(centroids)) {
  if (centroids_.empty()) throw Error("cluster space has no centroids");
  dim_ = centroids_.front().embedding.size();
  if (dim_ == 0) throw Error("centroid embeddings are empty");
  for (std::size_t i = 0; i < centroids_.size(); ++i) {
    const auto& c = centroids_[i];
    if (c.embedding.size() != dim_) {
      throw Error("centroid " + std::to_string(c.cluster_id) + " has dimension " +
                  std::to_string(c.embedding.size()) + ", expected " + std::to_string(dim_));
    }
    if (std::abs(norm(c.embedding) - 1.0) > kUnitNormTol) {
      throw Error("centroid " + std::to_string(c.cluster_id) + " is not unit-norm");
    }
    if (!centroid_index_.emplace(c.cluster_id, i).second) {
      throw Error("duplicate cluster_id " + std::to_string(c.cluster_id));
    }
  }
  phrases_.reserve(phrases.size());
  for (auto& [entry, cluster] : phrases) {
    if (cluster) {
      if (!has_cluster(*cluster)) {
        throw Error("phrase \"" + entry.phrase + "\" refers to unknown cluster " +
                    std::to_string(*cluster));
      }
      entry.cluster_id = *cluster;
    } else {
      if (entry.embedding.empty()) {
        throw Error("phrase \"" + entry.phrase + "\" has neither cluster_id nor embedding");
      }
      entry.cluster_id = assign_cluster(entry.embedding, *this);
    }
    if (!phrase_index_.emplace(entry.phrase, phrases_.size()).second) {
      throw Error("duplicate phrase in database: \"" + entry.phrase + "\"");
    }
    phrases_.push_back(std::move(entry));
  }
}

ClusterSpace ClusterSpace::load(const std::filesystem::path& centroids_jsonl,
                                const std::filesystem::path& phrases_jsonl) {
  std::vector<Centroid> centroids;
  std::size_t row = 0;
  for (const auto& j : read_jsonl(centroids_jsonl)) {
    ++row;
    try {
      centroids.push_back({j.at("cluster_id").get<int>(), j.value("name", std::string{}),
                           j.at("embedding").get<std::vector<double>>()});
    } catch (const nlohmann::json::exception& e) {
      throw Error(centroids_jsonl.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  std::vector<std::pair<PhraseEntry, std::optional<int>>> phrases;
  row = 0;
  for (const auto& j : read_jsonl(phrases_jsonl)) {
    ++row;
    try {
      PhraseEntry entry;
      entry.phrase = j.at("phrase").get<std::string>();
      if (j.contains("embedding")) entry.embedding = j["embedding"].get<std::vector<double>>();
      std::optional<int> cluster;
      if (j.contains("cluster_id")) cluster = j["cluster_id"].get<int>();
      if (!cluster && entry.embedding.empty()) {
        throw Error("needs \"embedding\" or \"cluster_id\"");
      }
      phrases.emplace_back(std::move(entry), cluster);
    } catch (const nlohmann::json::exception& e) {
      throw Error(phrases_jsonl.string() + ": row " + std::to_string(row) + ": " + e.what());
    } catch (const Error& e) {
      throw Error(phrases_jsonl.string() + ": row " + std::to_string(row) + ": " + e.what());
    }
  }
  return ClusterSpace(std::move(centroids), std::move(phrases));
}

std::optional<int> ClusterSpace::cluster_of(const std::string& phrase) const {
  auto it = phrase_index_.find(phrase);
  if (it == phrase_index_.end()) return std::nullopt;
  return phrases_[it->second].cluster_id;
}

int assign_cluster(std::span<const double> embedding, const ClusterSpace& space) {
  if (embedding.size() != space.dimension()) {
    throw Error("assign_cluster: embedding dimension " + std::to_string(embedding.size()) +
                " != centroid dimension " + std::to_string(space.dimension()));
  }
  const double n = norm(embedding);
  if (n == 0.0) throw Error("assign_cluster: zero-norm embedding");

  int best_id = 0;
  double best = -std::numeric_limits<double>::infinity();
  bool first = true;
  for (const auto& c : space.centroids()) {
    const double sim = dot(embedding, c.embedding) / (n * norm(c.embedding));
    if (first || sim > best || (sim == best && c.cluster_id < best_id)) {
      best = sim;
      best_id = c.cluster_id;
      first = false;
    }
  }
  return best_id;
}

int resolve_cluster(const ClusterSpace& space, const std::string& phrase,
                    std::span<const double> embedding) {
  if (auto c = space.cluster_of(phrase)) return *c;
  if (embedding.empty()) {
    throw Error("unknown phrase \"" + phrase + "\" (not in database and no embedding)");
  }
  return assign_cluster(embedding, space);
}

std::vector<std::size_t> negative_pool(const ClusterSpace& space,
                                       std::span<const int> positive_clusters) {
  std::vector<std::size_t> pool;
  const auto& phrases = space.phrases();
  for (std::size_t i = 0; i < phrases.size(); ++i) {
    if (std::find(positive_clusters.begin(), positive_clusters.end(), phrases[i].cluster_id) ==
        positive_clusters.end()) {
      pool.push_back(i);
    }
  }
  return pool;
}

EnrichedAnnotation sample_negative_phrases(const std::vector<PositivePhrase>& positives,
                                           const ClusterSpace& space,
                                           const SamplerOptions& options, int frames, Rng& rng) {
  const std::size_t k = positives.size();
  const std::size_t n = options.total_phrases;
  if (k > n) {
    throw Error("sample_negative_phrases: " + std::to_string(k) + " positives exceed N = " +
                std::to_string(n));
  }
  if (frames < 1) throw Error("sample_negative_phrases: frame count must be >= 1");

  EnrichedAnnotation out;
  out.positive_count = k;
  std::vector<int> positive_clusters;
  for (const auto& p : positives) {
    if (p.labels.size() != static_cast<std::size_t>(frames)) {
      throw Error("positive \"" + p.phrase + "\" has " + std::to_string(p.labels.size()) +
                  " frame labels, expected " + std::to_string(frames));
    }
    const int c = resolve_cluster(space, p.phrase, p.embedding);
    out.phrases.push_back(p.phrase);
    out.labels.push_back(p.labels);
    out.clusters.push_back(c);
    positive_clusters.push_back(c);
  }

  const std::size_t need = n - k;
  if (need == 0) return out;

  std::vector<std::size_t> pool = negative_pool(space, positive_clusters);
  std::vector<std::size_t> picks;
  if (pool.size() >= need) {
    for (std::size_t i = 0; i < need; ++i) {
      const std::size_t j = i + rng.index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      picks.push_back(pool[i]);
    }
  } else if (!options.allow_replacement || pool.empty()) {
    throw Error("negative pool exhausted: need " + std::to_string(need) + " negatives, pool has " +
                std::to_string(pool.size()));
  } else {
    // Every pool phrase once, then the remainder with replacement.
    for (std::size_t i = 0; i < pool.size(); ++i) {
      const std::size_t j = i + rng.index(pool.size() - i);
      std::swap(pool[i], pool[j]);
      picks.push_back(pool[i]);
    }
    while (picks.size() < need) picks.push_back(pool[rng.index(pool.size())]);
    out.duplicate_count = need - pool.size();
    std::cerr << "WARNING: negative pool has " << pool.size() << " phrases for " << need
              << " slots; sampled " << out.duplicate_count << " duplicates\n";
  }

  const std::vector<std::uint8_t> zeros(static_cast<std::size_t>(frames), 0);
  for (std::size_t idx : picks) {
    const auto& entry = space.phrases()[idx];
    out.phrases.push_back(entry.phrase);
    out.labels.push_back(zeros);
    out.clusters.push_back(entry.cluster_id);
  }
  return out;
}

EnrichedAnnotation enrich_scene(const SceneRecord& scene, const ClusterSpace& space,
                                const SamplerOptions& options, int frames, std::uint64_t seed) {
  const auto annotations = render_frame_labels(scene, frames);
  std::vector<PositivePhrase> positives;
  for (const auto& a : annotations) {
    PositivePhrase p{a.phrase, a.labels, {}};
    for (const auto& e : scene.events) {
      if (e.phrase == a.phrase && !e.embedding.empty()) {
        p.embedding = e.embedding;
        break;
      }
    }
    positives.push_back(std::move(p));
  }
  Rng rng = Rng::derive(seed, stable_hash(scene.id), kEnrichSalt);
  return sample_negative_phrases(positives, space, options, frames, rng);
}

std::vector<SceneRecord> enrich_manifest(const std::vector<SceneRecord>& scenes,
                                         const ClusterSpace& space,
                                         const SamplerOptions& options, int frames,
                                         std::uint64_t seed, int workers) {
  std::vector<SceneRecord> out(scenes.size());
  parallel_for(scenes.size(), workers, [&](std::size_t i) {
    try {
      const EnrichedAnnotation ann = enrich_scene(scenes[i], space, options, frames, seed);
      SceneRecord row = scenes[i];
      std::vector<PhraseSetEntry> set;
      for (std::size_t k = 0; k < ann.phrases.size(); ++k) {
        set.push_back({ann.phrases[k], k < ann.positive_count});
      }
      row.phrase_set = std::move(set);
      out[i] = std::move(row);
    } catch (const Error& e) {
      throw Error("scene " + scenes[i].id + ": " + e.what());
    }
  });
  return out;
}

}  // namespace framealign
