#include "output_dir.hpp"

#include <algorithm>
#include <fstream>
#include <json.hpp>

#include "causalbait/errors.hpp"

namespace causalbait::cli {

OutputDir::OutputDir(std::filesystem::path root) : root_(std::move(root)) {
  std::error_code ec;
  std::filesystem::create_directories(root_, ec);
  if (ec) throw FileError("cannot create " + root_.string() + ": " + ec.message());
}

std::filesystem::path OutputDir::file(const std::string& name) {
  if (std::find(files_.begin(), files_.end(), name) == files_.end()) files_.push_back(name);
  return root_ / name;
}

void OutputDir::write_text(const std::string& name, const std::string& text) {
  const auto p = file(name);
  std::ofstream out(p, std::ios::binary | std::ios::trunc);
  if (!out) throw FileError("cannot write " + p.string());
  out << text;
  if (!text.empty() && text.back() != '\n') out << '\n';
  if (!out) throw FileError("write failed for " + p.string());
}

void OutputDir::finish() const {
  auto names = files_;
  std::sort(names.begin(), names.end());
  nlohmann::ordered_json j;
  j["files"] = nlohmann::ordered_json::array();
  for (const auto& n : names) {
    std::error_code ec;
    const auto bytes = std::filesystem::file_size(root_ / n, ec);
    if (ec) throw FileError("expected output " + (root_ / n).string() + " is missing");
    j["files"].push_back({{"name", n}, {"bytes", bytes}});
  }
  std::ofstream out(root_ / "manifest.json", std::ios::trunc);
  if (!out) throw FileError("cannot write manifest in " + root_.string());
  out << j.dump(2) << '\n';
}

}  // namespace causalbait::cli
