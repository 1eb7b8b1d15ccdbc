#pragma once

#include <filesystem>
#include <fstream>
#include <string>

namespace testutil {

// Scratch directory for file-based tests; contents are recreated per file.
inline std::string write_temp(const std::string& name, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "edccf-unit";
  fs::create_directories(dir);
  const fs::path p = dir / name;
  std::ofstream out(p, std::ios::binary);
  out << content;
  out.close();
  return p.string();
}

}  // namespace testutil
