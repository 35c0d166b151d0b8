#include "cgm/projection.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <nlohmann/json.hpp>

#include "cgm/error.hpp"

namespace cgm {

void CameraIntrinsics::validate() const {
  if (!(fx > 0.0) || !(fy > 0.0) || !std::isfinite(fx) || !std::isfinite(fy)) {
    throw Error(Errc::invalid_intrinsics, "focal lengths must be positive");
  }
  if (width <= 0 || height <= 0) {
    throw Error(Errc::invalid_intrinsics, "image size must be positive");
  }
  if (!(cx >= 0.0 && cx < width) || !(cy >= 0.0 && cy < height)) {
    throw Error(Errc::invalid_intrinsics, "principal point outside the image");
  }
}

CameraIntrinsics CameraIntrinsics::scaled_to(int new_width, int new_height) const {
  const double sx = static_cast<double>(new_width) / width;
  const double sy = static_cast<double>(new_height) / height;
  CameraIntrinsics out;
  out.fx = fx * sx;
  out.fy = fy * sy;
  out.cx = (cx + 0.5) * sx - 0.5;
  out.cy = (cy + 0.5) * sy - 0.5;
  out.width = new_width;
  out.height = new_height;
  return out;
}

CameraIntrinsics intrinsics_from_json(std::string_view text) {
  CameraIntrinsics intr;
  try {
    const auto j = nlohmann::json::parse(text);
    intr.fx = j.at("fx").get<double>();
    intr.fy = j.at("fy").get<double>();
    intr.cx = j.at("cx").get<double>();
    intr.cy = j.at("cy").get<double>();
    intr.width = j.at("width").get<int>();
    intr.height = j.at("height").get<int>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(Errc::invalid_intrinsics, std::string("intrinsics JSON: ") + e.what());
  }
  intr.validate();
  return intr;
}

std::string intrinsics_to_json(const CameraIntrinsics& intr) {
  const nlohmann::ordered_json j = {{"fx", intr.fx},       {"fy", intr.fy},
                                    {"cx", intr.cx},       {"cy", intr.cy},
                                    {"width", intr.width}, {"height", intr.height}};
  return j.dump(2) + "\n";
}

std::size_t DepthImage::valid_count() const {
  return static_cast<std::size_t>(std::count_if(depths.begin(), depths.end(), [](std::uint16_t d) { return d != 0; }));
}

ProjectionResult project(const PointCloud& cloud, const CameraIntrinsics& intr) {
  intr.validate();
  ProjectionResult result{DepthImage(intr), {}};
  std::vector<double> nearest(result.image.depths.size(), std::numeric_limits<double>::infinity());

  for (const Point3& p : cloud.points) {
    if (!p.finite() || p.z <= 0.0) {
      ++result.stats.skipped;
      continue;
    }
    const double u = std::round(intr.fx * p.x / p.z + intr.cx);
    const double v = std::round(intr.fy * p.y / p.z + intr.cy);
    const double mm = std::round(p.z * 1000.0);
    if (!(u >= 0.0 && u < intr.width && v >= 0.0 && v < intr.height) || mm < 1.0 || mm > 65535.0) {
      ++result.stats.skipped;
      continue;
    }
    const std::size_t cell = static_cast<std::size_t>(v) * static_cast<std::size_t>(intr.width) +
                             static_cast<std::size_t>(u);
    if (std::isinf(nearest[cell])) {
      ++result.stats.projected;
    } else {
      ++result.stats.occluded;
      if (p.z >= nearest[cell]) {
        continue;
      }
    }
    nearest[cell] = p.z;
    result.image.depths[cell] = static_cast<std::uint16_t>(mm);
  }
  return result;
}

PointCloud backproject(const DepthImage& img) {
  const CameraIntrinsics& intr = img.intrinsics;
  PointCloud cloud;
  cloud.points.reserve(img.valid_count());
  for (int v = 0; v < img.height; ++v) {
    for (int u = 0; u < img.width; ++u) {
      const std::uint16_t d = img.at(u, v);
      if (d == 0) {
        continue;
      }
      const double z = d / 1000.0;
      cloud.points.push_back({(u - intr.cx) * z / intr.fx, (v - intr.cy) * z / intr.fy, z});
    }
  }
  return cloud;
}

DepthImage letterbox(const DepthImage& img, int width, int height) {
  if (width <= 0 || height <= 0) {
    throw Error(Errc::shape_mismatch, "letterbox target must be positive");
  }
  if (img.width == width && img.height == height) {
    return img;
  }
  const double scale = std::min(static_cast<double>(width) / img.width, static_cast<double>(height) / img.height);
  const int content_w = std::clamp(static_cast<int>(std::lround(img.width * scale)), 1, width);
  const int content_h = std::clamp(static_cast<int>(std::lround(img.height * scale)), 1, height);
  const int off_x = (width - content_w) / 2;
  const int off_y = (height - content_h) / 2;

  CameraIntrinsics intr = img.intrinsics.scaled_to(content_w, content_h);
  intr.cx += off_x;
  intr.cy += off_y;
  intr.width = width;
  intr.height = height;

  DepthImage out(intr);
  const auto span_of = [](int i, int src, int dst) {
    const long long lo = static_cast<long long>(i) * src / dst;
    long long hi = (static_cast<long long>(i + 1) * src + dst - 1) / dst;
    hi = std::clamp<long long>(hi, lo + 1, src);
    return std::pair<int, int>{static_cast<int>(lo), static_cast<int>(hi)};
  };
  for (int j = 0; j < content_h; ++j) {
    const auto [y0, y1] = span_of(j, img.height, content_h);
    for (int i = 0; i < content_w; ++i) {
      const auto [x0, x1] = span_of(i, img.width, content_w);
      std::uint16_t best = 0;
      for (int y = y0; y < y1; ++y) {
        for (int x = x0; x < x1; ++x) {
          const std::uint16_t d = img.at(x, y);
          if (d != 0 && (best == 0 || d < best)) {
            best = d;
          }
        }
      }
      out.at(i + off_x, j + off_y) = best;
    }
  }
  return out;
}

}  // namespace cgm
