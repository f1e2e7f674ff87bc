#include "histovote/manifest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <iterator>
#include <set>
#include <sstream>

#include "histovote/errors.hpp"

namespace histovote {

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

}  // namespace

std::string_view split_name(Split split) { return split == Split::Train ? "train" : "validation"; }

DatasetManifest DatasetManifest::parse(std::string_view text, const std::filesystem::path& base_dir) {
  DatasetManifest m;
  std::set<std::string> seen;
  std::istringstream in{std::string(text)};
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    const auto fields = split_fields(t);
    const auto where = [&] { return "manifest line " + std::to_string(line_no) + ": "; };
    if (m.entries.empty() && lower(fields[0]) == "path") continue;
    if (fields.size() < 3 || fields.size() > 4) throw ManifestError(where() + "expected path,label,split[,format]");

    ManifestEntry e;
    e.id = fields[0];
    if (e.id.empty()) throw ManifestError(where() + "empty path");
    const std::filesystem::path p(e.id);
    e.path = p.is_absolute() || base_dir.empty() ? p : base_dir / p;

    const std::string label = lower(fields[1]);
    if (!label.empty() && label != "unknown") {
      e.label = parse_label(fields[1]);
      if (!e.label) throw ManifestError(where() + "unknown class label '" + fields[1] + "'");
    }

    const std::string split = lower(fields[2]);
    if (split == "train") e.split = Split::Train;
    else if (split == "validation" || split == "val") e.split = Split::Validation;
    else throw ManifestError(where() + "split must be train or validation, got '" + fields[2] + "'");

    if (fields.size() == 4) {
      try {
        e.format = parse_format(fields[3]);
      } catch (const DecodeError& err) {
        throw ManifestError(where() + err.what());
      }
    }
    if (!seen.insert(e.id).second) throw ManifestError(where() + "duplicate path '" + e.id + "'");
    m.entries.push_back(std::move(e));
  }
  return m;
}

DatasetManifest DatasetManifest::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ManifestError("cannot open manifest '" + path.string() + "'");
  const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
  return parse(text, path.parent_path());
}

bool DatasetManifest::all_labelled() const {
  return !entries.empty() && std::all_of(entries.begin(), entries.end(), [](const auto& e) { return e.label.has_value(); });
}

std::map<std::string, ClassLabel> DatasetManifest::ground_truth() const {
  std::map<std::string, ClassLabel> out;
  for (const auto& e : entries) {
    if (e.label) out.emplace(e.id, *e.label);
  }
  return out;
}

std::string DatasetManifest::serialize() const {
  std::ostringstream os;
  os << "path,label,split,format\n";
  for (const auto& e : entries) {
    os << e.id << "," << (e.label ? label_name(*e.label) : "unknown") << "," << split_name(e.split) << ","
       << format_name(e.format) << "\n";
  }
  return os.str();
}

}  // namespace histovote
