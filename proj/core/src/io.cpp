#include "trafoid/io.hpp"

#include <fstream>
#include <sstream>
#include <system_error>

#include "trafoid/error.hpp"

namespace trafoid {

std::string format_metadata(const Metadata& meta)
{
  std::string out;
  for (const auto& [key, value] : meta)
    out += key + " = " + value + "\n";
  return out;
}

void write_file_atomic(const std::filesystem::path& path, const std::string& content)
{
  std::filesystem::path tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out)
      throw IoError("cannot open " + tmp.string() + " for writing");
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out)
      throw IoError("write to " + tmp.string() + " failed");
  }
  std::error_code ec;
  std::filesystem::rename(tmp, path, ec);
  if (ec)
    throw IoError("cannot move " + tmp.string() + " into place: " + ec.message());
}

std::string read_file(const std::filesystem::path& path)
{
  std::ifstream in(path, std::ios::binary);
  if (!in)
    throw IoError("cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void ArtifactSet::add(std::string name, std::string content)
{
  files_[std::move(name)] = std::move(content);
}

const std::string* ArtifactSet::find(const std::string& name) const
{
  auto it = files_.find(name);
  return it == files_.end() ? nullptr : &it->second;
}

void ArtifactSet::commit(const std::filesystem::path& dir) const
{
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec)
    throw IoError("cannot create output directory " + dir.string() + ": " + ec.message());
  for (const auto& [name, content] : files_)
    write_file_atomic(dir / name, content);
}

} // namespace trafoid
