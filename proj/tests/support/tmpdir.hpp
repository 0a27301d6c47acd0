#pragma once

#include <filesystem>
#include <string>

namespace testutil {

// Scratch directory under the build tree, wiped on construction and
// destruction.
class TmpDir {
 public:
  explicit TmpDir(const std::string& name)
      : path_(std::filesystem::temp_directory_path() /
              ("copg_" + name + "_scratch")) {
    std::filesystem::remove_all(path_);
    std::filesystem::create_directories(path_);
  }
  ~TmpDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& sub) const {
    return path_ / sub;
  }

 private:
  std::filesystem::path path_;
};

}  // namespace testutil
