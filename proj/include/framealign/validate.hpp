#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "framealign/cluster.hpp"
#include "framealign/manifest.hpp"

namespace framealign {

enum class ManifestKind { kSources, kEvents, kRejections, kDataset, kEnriched, kEmpty };

std::string to_string(ManifestKind kind);

struct Diagnostic {
  std::size_t row = 0;  // 1-based; 0 for file-level problems
  std::string id;
  std::string message;
};

struct ValidationOptions {
  int frames = 64;
  double min_dur_s = 1.0;
  double max_dur_s = 7.5;
  bool check_audio = true;
  // Enriched manifests: required phrase-set size, if known.
  std::optional<std::size_t> phrase_count;
  bool allow_duplicate_negatives = false;
  // Enables cluster-disjointness checks on enriched manifests.
  const ClusterSpace* space = nullptr;
};

struct ValidationReport {
  ManifestKind kind = ManifestKind::kEmpty;
  std::size_t rows = 0;
  std::vector<Diagnostic> errors;

  bool ok() const { return errors.empty(); }
  Json to_json() const;
};

ValidationReport validate_manifest(const std::filesystem::path& path,
                                   const ValidationOptions& options);

}  // namespace framealign
