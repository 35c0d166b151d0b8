#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

namespace cgm {

/// Camera-frame point in meters: x right, y down, z forward (depth axis).
struct Point3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  [[nodiscard]] bool finite() const noexcept {
    return std::isfinite(x) && std::isfinite(y) && std::isfinite(z);
  }

  friend bool operator==(const Point3&, const Point3&) = default;
};

/// One captured frame. Clouds are unorganized; point order is preserved
/// through parsing and writing.
struct PointCloud {
  std::vector<Point3> points;
  std::uint32_t frame_id = 0;
  // e.g. video_type, child_id. Keys and values must not contain whitespace.
  std::map<std::string, std::string> meta;

  [[nodiscard]] std::size_t size() const noexcept { return points.size(); }
  [[nodiscard]] bool empty() const noexcept { return points.empty(); }

  friend bool operator==(const PointCloud&, const PointCloud&) = default;
};

struct PcdParseResult {
  PointCloud cloud;
  std::size_t dropped = 0;  // rows with a non-finite coordinate
};

/// Parses an ASCII PCD v0.7 file. Throws Error with MalformedHeader,
/// UnsupportedLayout, CountMismatch or MalformedData; never crashes on
/// arbitrary input.
PcdParseResult parse_pcd(std::string_view bytes);

/// Writes ASCII PCD v0.7 (FIELDS x y z, 6 decimals). frame_id and meta are
/// carried in comment lines that other readers ignore.
std::string write_pcd(const PointCloud& cloud);

}  // namespace cgm
