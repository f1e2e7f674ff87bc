#include "test_support.hpp"

#include <histovote/image_io.hpp>
#include <histovote/labels.hpp>

#include <sys/wait.h>

#include <algorithm>
#include <array>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace histovote::testing {

std::filesystem::path write_synthetic_dataset(const std::filesystem::path& dir, int count, int width, int height,
                                              bool labelled) {
  // (blobs, radius) per slide: dense, moderate, sparse and empty tissue.
  static constexpr int kLayouts[][2] = {{60, 40}, {12, 25}, {4, 20}, {0, 0}, {30, 35}, {2, 30}, {8, 12}, {1, 10}};
  std::string manifest = "path,label,split,format\n";
  for (int i = 0; i < count; ++i) {
    const auto& layout = kLayouts[i % 8];
    const RgbRaster slide = synthetic_slide(width, height, 1000 + static_cast<std::uint64_t>(i), layout[0], layout[1]);
    const std::string name = "slides/slide_" + std::to_string(i) + ".png";
    write_png(dir / name, slide);
    const std::string label = labelled ? std::string(label_name(static_cast<ClassLabel>(i % 4))) : "unknown";
    manifest += name + "," + label + "," + (i % 5 == 4 ? "validation" : "train") + ",png\n";
  }
  write_file(dir / "manifest.csv", std::span(reinterpret_cast<const std::uint8_t*>(manifest.data()), manifest.size()));
  return dir / "manifest.csv";
}

std::vector<std::pair<std::string, std::string>> snapshot_tree(const std::filesystem::path& root) {
  std::vector<std::pair<std::string, std::string>> files;
  for (const auto& e : std::filesystem::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::ifstream in(e.path(), std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    files.emplace_back(std::filesystem::relative(e.path(), root).generic_string(), ss.str());
  }
  std::sort(files.begin(), files.end());
  return files;
}

CommandResult run_command(const std::string& command) {
  CommandResult result;
  FILE* pipe = popen((command + " 2>&1").c_str(), "r");
  if (!pipe) return result;
  std::array<char, 4096> buf{};
  std::size_t n;
  while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) result.output.append(buf.data(), n);
  const int status = pclose(pipe);
  result.exit_code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return result;
}

}  // namespace histovote::testing
