#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cgm/point_cloud.hpp"

namespace cgm {

/// Pinhole intrinsics without distortion. Image coordinates: u to the right,
/// v downwards, pixel centers at integer positions.
struct CameraIntrinsics {
  double fx = 220.0;
  double fy = 220.0;
  double cx = 120.0;
  double cy = 90.0;
  int width = 240;
  int height = 180;

  /// Throws Error(InvalidIntrinsics) unless fx, fy, width, height > 0 and the
  /// principal point lies inside the image.
  void validate() const;

  /// Same field of view at a different resolution.
  [[nodiscard]] CameraIntrinsics scaled_to(int new_width, int new_height) const;

  friend bool operator==(const CameraIntrinsics&, const CameraIntrinsics&) = default;
};

/// Default camera for 240x180 frames. Covers a standing child head to toe at ~2 m.
inline constexpr CameraIntrinsics kDefaultIntrinsics{};

/// JSON sidecar {fx, fy, cx, cy, width, height}.
CameraIntrinsics intrinsics_from_json(std::string_view text);
std::string intrinsics_to_json(const CameraIntrinsics& intr);

/// Dense depth grid in millimeters, row-major; 0 marks "no return".
struct DepthImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint16_t> depths;
  CameraIntrinsics intrinsics;

  DepthImage() = default;
  explicit DepthImage(const CameraIntrinsics& intr)
      : width(intr.width),
        height(intr.height),
        depths(static_cast<std::size_t>(intr.width) * static_cast<std::size_t>(intr.height), 0),
        intrinsics(intr) {}

  [[nodiscard]] std::uint16_t at(int u, int v) const {
    return depths[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
  }
  std::uint16_t& at(int u, int v) {
    return depths[static_cast<std::size_t>(v) * static_cast<std::size_t>(width) + static_cast<std::size_t>(u)];
  }
  [[nodiscard]] std::size_t valid_count() const;

  friend bool operator==(const DepthImage&, const DepthImage&) = default;
};

/// Per-call accounting. projected + skipped + occluded == input point count.
struct ProjectionStats {
  std::size_t projected = 0;  // points that own a cell in the result
  std::size_t skipped = 0;    // z <= 0, outside the image, or depth not representable
  std::size_t occluded = 0;   // lost a cell to a nearer point
};

struct ProjectionResult {
  DepthImage image;
  ProjectionStats stats;
};

/// Pinhole projection with nearest-surface occlusion. Pixel coordinates are
/// rounded half away from zero; depth is stored in rounded millimeters.
ProjectionResult project(const PointCloud& cloud, const CameraIntrinsics& intr);

/// Inverse of project: one point per nonzero cell, in row-major cell order.
PointCloud backproject(const DepthImage& img);

/// Fits `img` into a width x height frame preserving aspect ratio, padding
/// the remainder with zeros. Each destination pixel takes the nearest valid
/// depth inside its source footprint. Intrinsics are adjusted to match.
DepthImage letterbox(const DepthImage& img, int width, int height);

/// Binary 16-bit PGM ("P5", maxval 65535, big-endian) with an intrinsics
/// comment line "# fx fy cx cy". Bit-exact inverse pair.
std::string write_depth_pgm(const DepthImage& img);
DepthImage read_depth_pgm(std::string_view bytes);

}  // namespace cgm
