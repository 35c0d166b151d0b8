#include "cgm/synthetic_scene.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include "cgm/error.hpp"
#include "cgm/rng.hpp"

namespace cgm {
namespace {

using std::numbers::pi;

// Body proportions as fractions of total height.
constexpr double kHeadDiameter = 0.22;
constexpr double kLegLength = 0.47;
constexpr double kShoulderHeight = 0.74;
constexpr double kNeckRadius = 0.035;
constexpr double kLegRadius = 0.045;
constexpr double kArmRadius = 0.03;
constexpr double kHandHeight = 0.40;
constexpr double kFootRadius = 0.025;
constexpr double kFootLength = 0.10;

// Figure-local frame: origin on the ground below the figure axis, y up,
// z pointing away from the camera when the figure faces it.
struct Vec3 {
  double x, y, z;
};

Vec3 operator+(Vec3 a, Vec3 b) { return {a.x + b.x, a.y + b.y, a.z + b.z}; }
Vec3 operator-(Vec3 a, Vec3 b) { return {a.x - b.x, a.y - b.y, a.z - b.z}; }
Vec3 operator*(double s, Vec3 a) { return {s * a.x, s * a.y, s * a.z}; }
double dot(Vec3 a, Vec3 b) { return a.x * b.x + a.y * b.y + a.z * b.z; }
Vec3 cross(Vec3 a, Vec3 b) { return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x}; }
double norm(Vec3 a) { return std::sqrt(dot(a, a)); }

Vec3 unit_sphere(Rng& rng) {
  const double z = rng.uniform(-1.0, 1.0);
  const double phi = rng.uniform(0.0, 2.0 * pi);
  const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
  return {r * std::cos(phi), r * std::sin(phi), z};
}

struct Sphere {
  Vec3 center;
  double radius;
  [[nodiscard]] double area() const { return 4.0 * pi * radius * radius; }
  [[nodiscard]] Vec3 sample(Rng& rng) const { return center + radius * unit_sphere(rng); }
};

struct Capsule {
  Vec3 a, b;
  double radius;
  [[nodiscard]] double area() const { return 2.0 * pi * radius * norm(b - a) + 4.0 * pi * radius * radius; }
  [[nodiscard]] Vec3 sample(Rng& rng) const {
    const Vec3 axis = b - a;
    const double length = norm(axis);
    const double side = 2.0 * pi * radius * length;
    if (rng.uniform() * area() >= side) {
      Vec3 d = unit_sphere(rng);
      const bool at_b = dot(d, axis) > 0.0;
      return (at_b ? b : a) + radius * d;
    }
    const Vec3 w = (1.0 / length) * axis;
    const Vec3 helper = std::abs(w.y) < 0.9 ? Vec3{0, 1, 0} : Vec3{1, 0, 0};
    Vec3 u = cross(w, helper);
    u = (1.0 / norm(u)) * u;
    const Vec3 v = cross(w, u);
    const double t = rng.uniform();
    const double phi = rng.uniform(0.0, 2.0 * pi);
    return a + (t * length) * w + radius * (std::cos(phi) * u + std::sin(phi) * v);
  }
};

// Vertical elliptic cylinder with flat caps.
struct EllipticCylinder {
  double semi_x, semi_z, y0, y1;
  [[nodiscard]] double perimeter() const {
    const double a = semi_x, b = semi_z;
    return pi * (3.0 * (a + b) - std::sqrt((3.0 * a + b) * (a + 3.0 * b)));
  }
  [[nodiscard]] double area() const { return perimeter() * (y1 - y0) + 2.0 * pi * semi_x * semi_z; }
  [[nodiscard]] Vec3 sample(Rng& rng) const {
    const double side = perimeter() * (y1 - y0);
    if (rng.uniform() * area() < side) {
      const double phi = rng.uniform(0.0, 2.0 * pi);
      return {semi_x * std::cos(phi), rng.uniform(y0, y1), semi_z * std::sin(phi)};
    }
    const double r = std::sqrt(rng.uniform());
    const double phi = rng.uniform(0.0, 2.0 * pi);
    const double y = rng.uniform() < 0.5 ? y0 : y1;
    return {semi_x * r * std::cos(phi), y, semi_z * r * std::sin(phi)};
  }
};

struct Body {
  Sphere head;
  Capsule neck, left_leg, right_leg, left_arm, right_arm, left_foot, right_foot;
  EllipticCylinder torso;
};

Body build_body(const FigureParams& p) {
  const double h = p.height;
  const double head_r = 0.5 * kHeadDiameter * h;
  const double leg_r = kLegRadius * h;
  const double arm_r = kArmRadius * h;
  const double foot_r = kFootRadius * h;
  const double half_w = 0.5 * p.shoulder_width;
  const double leg_x = 0.5 * half_w;
  const double hip = kLegLength * h;
  const double shoulder = kShoulderHeight * h;
  const double arm_x = half_w + arm_r;

  Body body;
  body.head = {{0.0, h - head_r, 0.0}, head_r};
  body.neck = {{0.0, shoulder, 0.0}, {0.0, h - head_r, 0.0}, kNeckRadius * h};
  body.torso = {half_w, 0.5 * p.torso_depth, hip, shoulder};
  body.left_leg = {{-leg_x, leg_r, 0.0}, {-leg_x, hip, 0.0}, leg_r};
  body.right_leg = {{leg_x, leg_r, 0.0}, {leg_x, hip, 0.0}, leg_r};
  body.left_arm = {{-arm_x, shoulder - arm_r, 0.0}, {-(arm_x + 0.02 * h), kHandHeight * h, 0.0}, arm_r};
  body.right_arm = {{arm_x, shoulder - arm_r, 0.0}, {arm_x + 0.02 * h, kHandHeight * h, 0.0}, arm_r};
  // Feet point towards the viewer in the front stance (negative local z).
  body.left_foot = {{-leg_x, foot_r, 0.0}, {-leg_x, foot_r, -kFootLength * h}, foot_r};
  body.right_foot = {{leg_x, foot_r, 0.0}, {leg_x, foot_r, -kFootLength * h}, foot_r};
  return body;
}

// Local points, allocated to primitives in proportion to surface area.
std::vector<Vec3> sample_body(const Body& body, std::size_t count, Rng& rng) {
  const std::array<double, 9> areas{body.head.area(),      body.neck.area(),      body.torso.area(),
                                    body.left_leg.area(),  body.right_leg.area(), body.left_arm.area(),
                                    body.right_arm.area(), body.left_foot.area(), body.right_foot.area()};
  double total = 0.0;
  for (const double a : areas) {
    total += a;
  }
  std::array<std::size_t, 9> counts{};
  std::size_t assigned = 0;
  for (std::size_t i = 0; i < areas.size(); ++i) {
    counts[i] = static_cast<std::size_t>(std::floor(count * areas[i] / total));
    assigned += counts[i];
  }
  counts[2] += count - assigned;  // remainder to the torso

  std::vector<Vec3> out;
  out.reserve(count);
  const auto emit = [&](std::size_t n, const auto& primitive) {
    for (std::size_t i = 0; i < n; ++i) {
      out.push_back(primitive.sample(rng));
    }
  };
  emit(counts[0], body.head);
  emit(counts[1], body.neck);
  emit(counts[2], body.torso);
  emit(counts[3], body.left_leg);
  emit(counts[4], body.right_leg);
  emit(counts[5], body.left_arm);
  emit(counts[6], body.right_arm);
  emit(counts[7], body.left_foot);
  emit(counts[8], body.right_foot);
  return out;
}

Point3 to_camera(Vec3 local, double yaw_rad, double distance, double lateral, double camera_height) {
  const double c = std::cos(yaw_rad);
  const double s = std::sin(yaw_rad);
  const double x = c * local.x + s * local.z;
  const double z = -s * local.x + c * local.z;
  return {lateral + x, camera_height - local.y, distance + z};
}

void add_ray_noise(Point3& p, double sigma, Rng& rng) {
  if (sigma <= 0.0) {
    return;
  }
  const double r = std::sqrt(p.x * p.x + p.y * p.y + p.z * p.z);
  const double scale = 1.0 + rng.normal(0.0, sigma) / r;
  p.x *= scale;
  p.y *= scale;
  p.z *= scale;
}

void append_figure(PointCloud& cloud, const FigureParams& p, std::size_t count, const SceneOptions& options,
                   Rng& rng) {
  const Body body = build_body(p);
  const double yaw = p.yaw_deg() * pi / 180.0;
  for (const Vec3& local : sample_body(body, count, rng)) {
    cloud.points.push_back(to_camera(local, yaw, p.camera_distance, p.lateral_offset, options.camera_height));
  }
}

// One jittered ray per pixel, intersected with the wall and the ground.
void append_background(PointCloud& cloud, double wall_z, const SceneOptions& options, Rng& rng) {
  const CameraIntrinsics& cam = options.background_camera;
  for (int v = 0; v < cam.height; ++v) {
    for (int u = 0; u < cam.width; ++u) {
      const double du = (u + rng.uniform(-0.5, 0.5) - cam.cx) / cam.fx;
      const double dv = (v + rng.uniform(-0.5, 0.5) - cam.cy) / cam.fy;
      double t = wall_z;
      if (dv > 0.0) {
        t = std::min(t, options.camera_height / dv);
      }
      cloud.points.push_back({t * du, t * dv, t});
    }
  }
}

void check_fit(const PointCloud& cloud, std::size_t figure_points, const CameraIntrinsics& cam) {
  for (std::size_t i = 0; i < figure_points; ++i) {
    const Point3& p = cloud.points[i];
    const double u = cam.fx * p.x / p.z + cam.cx;
    const double v = cam.fy * p.y / p.z + cam.cy;
    if (p.z <= 0.0 || u < -0.5 || u >= cam.width - 0.5 || v < -0.5 || v >= cam.height - 0.5) {
      throw Error(Errc::invalid_params, "figure does not fit inside the camera frame");
    }
  }
}

}  // namespace

void FigureParams::validate() const {
  if (!(height >= 0.70 && height <= 1.30)) {
    throw Error(Errc::invalid_params, "height must be within [0.70, 1.30] m");
  }
  if (!(shoulder_width > 0.0 && shoulder_width < height) || !(torso_depth > 0.0 && torso_depth < height)) {
    throw Error(Errc::invalid_params, "body widths must be positive and smaller than the height");
  }
  if (!(camera_distance > 0.0) || !std::isfinite(camera_distance)) {
    throw Error(Errc::invalid_params, "camera_distance must be positive");
  }
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma) || !std::isfinite(lateral_offset) ||
      !std::isfinite(rotation_deg)) {
    throw Error(Errc::invalid_params, "noise_sigma must be non-negative and all values finite");
  }
}

double FigureParams::yaw_deg() const {
  switch (stance) {
    case Stance::front: return 0.0;
    case Stance::back: return 180.0;
    case Stance::rotated: return rotation_deg;
  }
  return 0.0;
}

SceneSample generate_figure(const FigureParams& params, std::uint64_t seed, const SceneOptions& options) {
  params.validate();
  options.background_camera.validate();
  options.fit_camera.validate();
  if (options.figure_points == 0) {
    throw Error(Errc::invalid_params, "figure_points must be positive");
  }

  Rng rng(seed);
  SceneSample sample;
  sample.params = params;
  sample.rng_seed = seed;
  sample.label_height_cm = params.height * 100.0;
  sample.figure_point_count = options.figure_points;

  PointCloud& cloud = sample.cloud;
  const std::size_t bg = static_cast<std::size_t>(options.background_camera.width) *
                         static_cast<std::size_t>(options.background_camera.height);
  cloud.points.reserve(options.figure_points + bg);
  append_figure(cloud, params, options.figure_points, options, rng);
  check_fit(cloud, options.figure_points, options.fit_camera);
  append_background(cloud, params.camera_distance + options.wall_gap, options, rng);
  for (Point3& p : cloud.points) {
    add_ray_noise(p, params.noise_sigma, rng);
  }
  return sample;
}

void ParamRanges::validate() const {
  const auto check = [](const Range& r, const char* name) {
    if (!(r.lo <= r.hi) || !std::isfinite(r.lo) || !std::isfinite(r.hi)) {
      throw Error(Errc::invalid_params, std::string("bad range for ") + name);
    }
  };
  check(height, "height");
  check(shoulder_width, "shoulder_width");
  check(torso_depth, "torso_depth");
  check(camera_distance, "camera_distance");
  check(lateral_offset, "lateral_offset");
  check(noise_sigma, "noise_sigma");
  if (height.lo < 0.70 || height.hi > 1.30) {
    throw Error(Errc::invalid_params, "height range must lie within [0.70, 1.30] m");
  }
  if (camera_distance.lo <= 0.0 || noise_sigma.lo < 0.0 || shoulder_width.lo <= 0.0 || torso_depth.lo <= 0.0) {
    throw Error(Errc::invalid_params, "distances and widths must be positive, noise non-negative");
  }
}

AgeBucket age_bucket_for_height(double height_m) {
  if (height_m < 0.92) {
    return AgeBucket::age_2_3;
  }
  if (height_m < 1.00) {
    return AgeBucket::age_3_4;
  }
  return AgeBucket::age_4_5;
}

std::vector<ScenePlan> generate_dataset(std::size_t count, const ParamRanges& ranges, std::uint64_t seed) {
  if (count == 0) {
    throw Error(Errc::invalid_params, "count must be positive");
  }
  ranges.validate();

  // Frame counts per video type in the field dataset.
  constexpr double kFront = 38602.0;
  constexpr double kBack = 37333.0;
  constexpr double kTotal = 144195.0;

  std::vector<ScenePlan> plans;
  plans.reserve(count);
  const int width = static_cast<int>(std::to_string(count - 1).size());
  for (std::size_t i = 0; i < count; ++i) {
    Rng rng(derive_seed(seed, 2 * i));
    ScenePlan plan;
    std::string index = std::to_string(i);
    plan.child_id = "c" + std::string(static_cast<std::size_t>(std::max(0, width - static_cast<int>(index.size()))), '0') + index;
    plan.seed = derive_seed(seed, 2 * i + 1);

    FigureParams& p = plan.params;
    p.height = rng.uniform(ranges.height.lo, ranges.height.hi);
    p.shoulder_width = rng.uniform(ranges.shoulder_width.lo, ranges.shoulder_width.hi);
    p.torso_depth = rng.uniform(ranges.torso_depth.lo, ranges.torso_depth.hi);
    p.camera_distance = rng.uniform(ranges.camera_distance.lo, ranges.camera_distance.hi);
    p.lateral_offset = rng.uniform(ranges.lateral_offset.lo, ranges.lateral_offset.hi);
    p.noise_sigma = rng.uniform(ranges.noise_sigma.lo, ranges.noise_sigma.hi);

    const double tag = rng.uniform() * kTotal;
    plan.video_type = tag < kFront ? VideoType::front : tag < kFront + kBack ? VideoType::back : VideoType::deg360;
    p.stance = plan.video_type == VideoType::front  ? Stance::front
               : plan.video_type == VideoType::back ? Stance::back
                                                    : Stance::rotated;
    p.rotation_deg = p.stance == Stance::rotated ? rng.uniform(0.0, 360.0) : 0.0;
    plan.age_bucket = age_bucket_for_height(p.height);
    p.validate();
    plans.push_back(std::move(plan));
  }
  return plans;
}

SceneSample realize(const ScenePlan& plan, std::uint32_t frame, const SceneOptions& options) {
  FigureParams params = plan.params;
  if (params.stance == Stance::rotated) {
    params.rotation_deg = std::fmod(params.rotation_deg + kTurnPerFrameDeg * frame, 360.0);
  }
  SceneSample sample = generate_figure(params, derive_seed(plan.seed, frame), options);
  sample.cloud.frame_id = frame;
  sample.cloud.meta["child_id"] = plan.child_id;
  sample.cloud.meta["video_type"] = std::string(to_string(plan.video_type));
  return sample;
}

SceneSample corrupt(const SceneSample& sample, Corruption kind, std::uint64_t seed, const SceneOptions& options) {
  Rng rng(seed);
  SceneSample out = sample;
  auto& points = out.cloud.points;
  switch (kind) {
    case Corruption::drop_figure:
      points.erase(points.begin(), points.begin() + static_cast<std::ptrdiff_t>(out.figure_point_count));
      out.figure_point_count = 0;
      break;
    case Corruption::depth_blur:
      for (Point3& p : points) {
        add_ray_noise(p, 0.15, rng);
      }
      break;
    case Corruption::clutter: {
      FigureParams other = sample.params;
      other.height = rng.uniform(0.9, 1.3);
      other.stance = Stance::rotated;
      other.rotation_deg = rng.uniform(0.0, 360.0);
      other.lateral_offset = sample.params.lateral_offset + (rng.uniform() < 0.5 ? -1.0 : 1.0) * rng.uniform(0.45, 0.6);
      other.camera_distance = sample.params.camera_distance - rng.uniform(0.0, 0.2);
      PointCloud extra;
      append_figure(extra, other, options.figure_points, options, rng);
      for (Point3& p : extra.points) {
        add_ray_noise(p, other.noise_sigma, rng);
      }
      points.insert(points.end(), extra.points.begin(), extra.points.end());
      break;
    }
  }
  return out;
}

}  // namespace cgm
