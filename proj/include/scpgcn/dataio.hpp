#pragma once

#include <map>
#include <string>
#include <vector>

#include "scpgcn/graph.hpp"
#include "scpgcn/linalg.hpp"

namespace scpgcn::dataio {

/// One dataset entry: where the two matrix files live and the class label.
struct ManifestRecord {
  std::string id;
  std::string structural_path;
  std::string functional_path;
  int label = 0;

  bool operator==(const ManifestRecord& other) const = default;
};

/// Describes a dataset on disk: per-instance matrix files plus the shared
/// node count. Paths are resolved relative to the manifest's directory
/// unless absolute.
struct DatasetManifest {
  std::vector<ManifestRecord> records;
  std::size_t n = 0;
  std::map<std::string, std::string> metadata;

  bool operator==(const DatasetManifest& other) const = default;
};

/// Parses and validates a manifest: unique ids, labels in {0, 1}, n >= 1.
/// Errors name the manifest path and, where relevant, the offending id.
DatasetManifest read_manifest(const std::string& path);

/// Writes the manifest as deterministic JSON (sorted keys, trailing newline).
void write_manifest(const DatasetManifest& manifest, const std::string& path);

/// Reads a whitespace-delimited text matrix, one row per line. Throws on
/// unreadable files, non-numeric tokens, or ragged rows, naming the path.
linalg::Matrix read_matrix_file(const std::string& path);

/// Writes a matrix as plain text, one row per line, entries printed with 17
/// significant digits so every double survives a round trip exactly.
void write_matrix_file(const linalg::Matrix& m, const std::string& path);

/// Loads every instance listed in the manifest and validates the full set of
/// network invariants. Asymmetry up to 1e-9 is repaired by exact
/// symmetrization; anything beyond that, wrong dimensions, out-of-range
/// values, or missing files is an error naming the instance id and file.
std::vector<graph::NetworkInstance> load_dataset(const std::string& manifest_path);

/// Saves matrices ("<id>_structural.txt" / "<id>_functional.txt") plus
/// "manifest.json" into dir (created if needed) and returns the manifest
/// path. All instances must share one node count and carry unique,
/// filename-safe ids.
std::string save_dataset(const std::vector<graph::NetworkInstance>& instances,
                         const std::string& dir,
                         const std::map<std::string, std::string>& metadata = {});

}  // namespace scpgcn::dataio
