#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace stopspacing::zip {

// True when `bytes` starts with a local file header or an empty-archive
// end-of-central-directory record.
bool has_zip_magic(std::string_view bytes);
bool is_zip_file(const std::filesystem::path& path);

// Read-only view of a zip archive held in memory. Supports stored and
// deflated members; ZIP64 archives are rejected.
class Archive {
 public:
  explicit Archive(std::string bytes);
  static Archive open(const std::filesystem::path& path);

  const std::vector<std::string>& names() const { return names_; }

  // Finds a member whose final path component equals `basename`, so feeds
  // zipped inside a top-level folder are still found. Directory entries and
  // macOS resource forks are ignored.
  std::optional<std::string> find_by_basename(std::string_view basename) const;

  // Decompressed contents of the named member; CRC-32 is verified.
  std::string read(std::string_view name) const;

 private:
  struct Entry {
    std::string name;
    std::uint16_t method;
    std::uint32_t crc32;
    std::uint32_t compressed_size;
    std::uint32_t uncompressed_size;
    std::uint32_t local_header_offset;
  };

  std::string bytes_;
  std::vector<Entry> entries_;
  std::vector<std::string> names_;
};

// Builds a deflated archive with fixed timestamps so identical inputs yield
// identical bytes.
class Writer {
 public:
  void add(std::string name, std::string_view contents);
  std::string finish() const;
  void write(const std::filesystem::path& path) const;

 private:
  std::vector<std::pair<std::string, std::string>> members_;
};

}  // namespace stopspacing::zip
