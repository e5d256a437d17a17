#pragma once

#include <filesystem>
#include <string>
#include <vector>

namespace causalbait::cli {

// Output directory that records every file a command produces and writes
// them into manifest.json on finish().
class OutputDir {
 public:
  explicit OutputDir(std::filesystem::path root);

  // Path of a new artifact under the root; the file is listed on finish().
  std::filesystem::path file(const std::string& name);
  void write_text(const std::string& name, const std::string& text);
  void finish() const;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::vector<std::string> files_;
};

}  // namespace causalbait::cli
