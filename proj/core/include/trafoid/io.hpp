#pragma once

#include <filesystem>
#include <map>
#include <string>
#include <utility>
#include <vector>

namespace trafoid {

//! Ordered key = value sidecar records (same syntax as the run config).
using Metadata = std::vector<std::pair<std::string, std::string>>;

std::string format_metadata(const Metadata& meta);

//! Writes `content` to a temporary sibling of `path` and renames it into
//! place. Throws IoError.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

std::string read_file(const std::filesystem::path& path);

/*
 * Files produced by a run, held in memory until `commit` writes them all.
 * Nothing reaches the output directory if the run fails before commit.
 */
class ArtifactSet
{
public:
  void add(std::string name, std::string content);
  const std::string* find(const std::string& name) const;
  const std::map<std::string, std::string>& files() const { return files_; }
  void commit(const std::filesystem::path& dir) const;

private:
  std::map<std::string, std::string> files_;
};

} // namespace trafoid
