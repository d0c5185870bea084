#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace wordorder {

// fnv1a64 over the file bytes, rendered "fnv1a64:<16 hex digits>".
// Throws DataError if the file cannot be read.
std::string file_checksum(const std::filesystem::path& path);

// Hash of a resolved option set: fnv1a64 over sorted "key=value\n" lines,
// as 16 hex digits. Stable across runs and platforms.
std::string config_hash(const std::map<std::string, std::string>& settings);

struct ArtifactInfo {
  std::string checksum;
  std::string config_hash;
  std::string stage;                 // command that produced the file
  std::vector<std::string> inputs;   // manifest keys of upstream files

  friend bool operator==(const ArtifactInfo&, const ArtifactInfo&) = default;
};

// Per-run-directory record of produced files. Keys are the path strings used
// on the command line, so reruns with the same flags hit the same entries.
class Manifest {
 public:
  // Reads <path> if it exists; otherwise starts empty.
  static Manifest load(const std::filesystem::path& path);
  void save(const std::filesystem::path& path) const;

  void record(const std::string& key, ArtifactInfo info);
  const ArtifactInfo* find(const std::string& key) const;

  // Verifies the file at `key` still matches its recorded checksum. Unknown
  // keys are tolerated (the file may come from outside a tracked run); a
  // missing file or checksum drift raises DataError naming the stage to
  // re-run.
  void require_fresh(const std::string& key) const;

  // For input files: checksums the file, verifies against any existing entry,
  // and returns the checksum.
  std::string checksum_input(const std::string& key) const;

  const std::map<std::string, ArtifactInfo>& artifacts() const {
    return artifacts_;
  }

 private:
  std::map<std::string, ArtifactInfo> artifacts_;
};

}  // namespace wordorder
