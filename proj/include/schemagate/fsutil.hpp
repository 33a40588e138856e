#pragma once

#include <filesystem>
#include <string>

namespace schemagate {

std::string read_file(const std::filesystem::path& path);

/// Writes via a sibling temp file and rename, so readers never observe a
/// partial document. Parent directories are created.
void write_file_atomic(const std::filesystem::path& path, const std::string& content);

/// Exclusive advisory lock (flock) held for the object's lifetime.
class FileLock {
 public:
  explicit FileLock(const std::filesystem::path& path);
  ~FileLock();
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace schemagate
