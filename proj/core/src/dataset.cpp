#include "cgm/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <map>
#include <set>

#include "cgm/error.hpp"
#include "cgm/projection.hpp"
#include "cgm/rng.hpp"

namespace cgm {

std::string_view to_string(VideoType t) noexcept {
  switch (t) {
    case VideoType::front: return "front";
    case VideoType::back: return "back";
    case VideoType::deg360: return "deg360";
  }
  return "front";
}

std::string_view to_string(AgeBucket a) noexcept {
  switch (a) {
    case AgeBucket::age_2_3: return "2-3";
    case AgeBucket::age_3_4: return "3-4";
    case AgeBucket::age_4_5: return "4-5";
  }
  return "2-3";
}

std::string_view to_string(Quality q) noexcept { return q == Quality::good ? "good" : "bad"; }
std::string_view to_string(Split s) noexcept { return s == Split::train ? "train" : "test"; }

std::optional<VideoType> parse_video_type(std::string_view s) noexcept {
  for (const VideoType t : kVideoTypes) {
    if (s == to_string(t)) {
      return t;
    }
  }
  return std::nullopt;
}

std::optional<AgeBucket> parse_age_bucket(std::string_view s) noexcept {
  for (const AgeBucket a : kAgeBuckets) {
    if (s == to_string(a)) {
      return a;
    }
  }
  return std::nullopt;
}

std::optional<Quality> parse_quality(std::string_view s) noexcept {
  if (s == "good") return Quality::good;
  if (s == "bad") return Quality::bad;
  return std::nullopt;
}

std::optional<Split> parse_split(std::string_view s) noexcept {
  if (s == "train") return Split::train;
  if (s == "test") return Split::test;
  return std::nullopt;
}

void validate_manifest(const Manifest& manifest) {
  std::map<std::string_view, Split> first_split;
  for (const SampleRecord& r : manifest.records) {
    if (r.quality == Quality::bad && r.split == Split::test) {
      throw Error(Errc::bad_test_quality, "bad-quality frame '" + r.frame_path + "' in test split");
    }
    const auto [it, inserted] = first_split.emplace(r.child_id, r.split);
    if (!inserted && it->second != r.split) {
      throw Error(Errc::split_leak, "child '" + r.child_id + "' appears in both splits");
    }
  }
}

namespace {

std::vector<std::string_view> split_commas(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string_view::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

std::string shortest(double v) {
  char buf[64];
  const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, ptr);
}

}  // namespace

Manifest load_manifest(std::string_view bytes) {
  Manifest manifest;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  bool header_seen = false;
  while (pos < bytes.size()) {
    std::size_t end = bytes.find('\n', pos);
    if (end == std::string_view::npos) {
      end = bytes.size();
    }
    std::string_view line = bytes.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    if (!header_seen) {
      if (line != kManifestHeader) {
        throw Error(Errc::malformed_row, "line 1: expected header '" + std::string(kManifestHeader) + "'");
      }
      header_seen = true;
      continue;
    }
    if (line.empty()) {
      continue;
    }
    const auto cols = split_commas(line);
    const auto where = "line " + std::to_string(line_no) + ": ";
    if (cols.size() != 7) {
      throw Error(Errc::malformed_row, where + "expected 7 columns");
    }
    SampleRecord r;
    r.child_id = std::string(cols[0]);
    r.frame_path = std::string(cols[1]);
    const auto video = parse_video_type(cols[2]);
    const auto age = parse_age_bucket(cols[3]);
    const auto quality = parse_quality(cols[4]);
    const auto split = parse_split(cols[6]);
    double label = 0.0;
    const auto [ptr, ec] = std::from_chars(cols[5].data(), cols[5].data() + cols[5].size(), label);
    if (r.child_id.empty() || r.frame_path.empty() || !video || !age || !quality || !split ||
        ec != std::errc{} || ptr != cols[5].data() + cols[5].size() || !std::isfinite(label) || label <= 0.0) {
      throw Error(Errc::malformed_row, where + "invalid field value");
    }
    r.video_type = *video;
    r.age_bucket = *age;
    r.quality = *quality;
    r.label_height_cm = label;
    r.split = *split;
    manifest.records.push_back(std::move(r));
  }
  if (!header_seen) {
    throw Error(Errc::malformed_row, "missing header");
  }
  validate_manifest(manifest);
  return manifest;
}

std::string save_manifest(const Manifest& manifest) {
  std::string out(kManifestHeader);
  out += '\n';
  for (const SampleRecord& r : manifest.records) {
    out += r.child_id + ',' + r.frame_path + ',';
    out += to_string(r.video_type);
    out += ',';
    out += to_string(r.age_bucket);
    out += ',';
    out += to_string(r.quality);
    out += ',' + shortest(r.label_height_cm) + ',';
    out += to_string(r.split);
    out += '\n';
  }
  return out;
}

Manifest split_by_child(std::vector<SampleRecord> records, double test_fraction, std::uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw Error(Errc::invalid_params, "test_fraction must be in (0, 1)");
  }
  std::set<std::string> children;
  std::set<std::string> tainted;
  for (const SampleRecord& r : records) {
    children.insert(r.child_id);
    if (r.quality == Quality::bad) {
      tainted.insert(r.child_id);
    }
  }
  std::vector<std::string> eligible;
  for (const std::string& c : children) {
    if (!tainted.contains(c)) {
      eligible.push_back(c);
    }
  }
  Rng rng(seed);
  rng.shuffle(std::span<std::string>(eligible));
  const auto wanted = static_cast<std::size_t>(std::llround(test_fraction * static_cast<double>(children.size())));
  const std::set<std::string> test_children(eligible.begin(),
                                            eligible.begin() + static_cast<std::ptrdiff_t>(std::min(wanted, eligible.size())));

  Manifest manifest;
  manifest.records = std::move(records);
  for (SampleRecord& r : manifest.records) {
    r.split = test_children.contains(r.child_id) ? Split::test : Split::train;
  }
  return manifest;
}

std::size_t DatasetSummary::children_total(Split s) const {
  std::size_t n = 0;
  for (const auto& row : children_by_age) {
    n += row[static_cast<std::size_t>(s)];
  }
  return n;
}

std::size_t DatasetSummary::frames_total(Split s) const {
  std::size_t n = 0;
  for (const auto& row : frames_by_video) {
    n += row[static_cast<std::size_t>(s)];
  }
  return n;
}

DatasetSummary summarize(const Manifest& manifest) {
  DatasetSummary summary;
  std::set<std::pair<std::string_view, Split>> seen;
  for (const SampleRecord& r : manifest.records) {
    const auto split = static_cast<std::size_t>(r.split);
    ++summary.frames_by_video[static_cast<std::size_t>(r.video_type)][split];
    if (seen.emplace(r.child_id, r.split).second) {
      ++summary.children_by_age[static_cast<std::size_t>(r.age_bucket)][split];
    }
  }
  return summary;
}

std::string format_summary(const DatasetSummary& s) {
  std::string out;
  char line[128];
  const auto row = [&](const char* label, std::size_t train, std::size_t test) {
    std::snprintf(line, sizeof line, "%-18s %8zu %9zu %8zu\n", label, train + test, train, test);
    out += line;
  };
  std::snprintf(line, sizeof line, "%-18s %8s %9s %8s\n", "Age", "Total", "Training", "Test");
  out += line;
  for (const AgeBucket a : kAgeBuckets) {
    const auto& c = s.children_by_age[static_cast<std::size_t>(a)];
    row(std::string(to_string(a)).c_str(), c[0], c[1]);
  }
  row("Total", s.children_total(Split::train), s.children_total(Split::test));
  out += '\n';
  std::snprintf(line, sizeof line, "%-18s %8s %9s %8s\n", "Video Type", "Total", "Training", "Test");
  out += line;
  constexpr std::array<const char*, 3> kLabels{"Front video", "Back video", "360-degree video"};
  for (std::size_t t = 0; t < 3; ++t) {
    row(kLabels[t], s.frames_by_video[t][0], s.frames_by_video[t][1]);
  }
  row("Total", s.frames_total(Split::train), s.frames_total(Split::test));
  return out;
}

double QualityGrader::figure_fraction(const DepthImage& img) const {
  if (img.depths.empty()) {
    return 0.0;
  }
  std::size_t foreground = 0;
  for (int v = 0; v < img.height; ++v) {
    std::uint16_t background = 0;
    for (int u = 0; u < img.width; ++u) {
      background = std::max(background, img.at(u, v));
    }
    for (int u = 0; u < img.width; ++u) {
      const std::uint16_t d = img.at(u, v);
      if (d != 0 && static_cast<int>(d) + foreground_margin_mm < background) {
        ++foreground;
      }
    }
  }
  return static_cast<double>(foreground) / static_cast<double>(img.depths.size());
}

Quality QualityGrader::grade(const DepthImage& img) const {
  const double f = figure_fraction(img);
  return f >= min_fraction && f <= max_fraction ? Quality::good : Quality::bad;
}

}  // namespace cgm
