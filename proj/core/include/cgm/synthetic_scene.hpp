#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cgm/dataset.hpp"
#include "cgm/point_cloud.hpp"
#include "cgm/projection.hpp"

namespace cgm {

enum class Stance { front, back, rotated };

/// A standing figure in front of a wall. Lengths in meters.
struct FigureParams {
  double height = 1.0;  // head to toe; the regression label
  double shoulder_width = 0.25;
  double torso_depth = 0.15;
  Stance stance = Stance::front;
  double rotation_deg = 0.0;  // used when stance == rotated
  double camera_distance = 2.0;  // camera to the figure's vertical axis
  double lateral_offset = 0.0;
  double noise_sigma = 0.005;  // Gaussian, along the view ray

  /// Throws Error(InvalidParams).
  void validate() const;
  /// Rotation about the vertical axis implied by the stance.
  [[nodiscard]] double yaw_deg() const;
};

/// Scene constants shared by every figure.
struct SceneOptions {
  std::size_t figure_points = 20000;
  double camera_height = 0.65;  // above the ground plane
  double wall_gap = 0.3;        // wall distance behind the figure axis
  CameraIntrinsics background_camera = kDefaultIntrinsics;  // one ray per pixel hits wall or ground
  CameraIntrinsics fit_camera = kDefaultIntrinsics;         // figure must fit inside this frame
};

struct SceneSample {
  PointCloud cloud;  // figure points first, then background
  double label_height_cm = 0.0;
  FigureParams params;
  std::uint64_t rng_seed = 0;
  std::size_t figure_point_count = 0;
};

/// Deterministic in (params, seed, options). Throws Error(InvalidParams),
/// including when the figure would not fit inside options.fit_camera.
SceneSample generate_figure(const FigureParams& params, std::uint64_t seed, const SceneOptions& options = {});

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

struct ParamRanges {
  Range height{0.75, 1.25};
  Range shoulder_width{0.20, 0.30};
  Range torso_depth{0.12, 0.18};
  Range camera_distance{1.8, 2.2};
  Range lateral_offset{-0.1, 0.1};
  Range noise_sigma{0.005, 0.005};

  void validate() const;
};

/// One synthetic child video. Frames are realized on demand.
struct ScenePlan {
  std::string child_id;
  VideoType video_type = VideoType::front;
  AgeBucket age_bucket = AgeBucket::age_2_3;
  FigureParams params;
  std::uint64_t seed = 0;
};

/// `count` plans with parameters drawn uniformly from `ranges`. Video types
/// follow the front/back/360 frame proportions 38602:37333:68260; the stance
/// follows the video type. Per-scene seeds are derived from `seed`.
std::vector<ScenePlan> generate_dataset(std::size_t count, const ParamRanges& ranges, std::uint64_t seed);

inline constexpr double kTurnPerFrameDeg = 30.0;

/// Frame `frame` of a planned video (fresh surface samples and noise). In a
/// 360-degree video the figure turns kTurnPerFrameDeg per frame.
SceneSample realize(const ScenePlan& plan, std::uint32_t frame, const SceneOptions& options = {});

/// Synthetic age bucket for a height, from rough growth-chart medians.
AgeBucket age_bucket_for_height(double height_m);

/// Frame corruptions used to produce "bad" videos.
enum class Corruption { drop_figure, depth_blur, clutter };

SceneSample corrupt(const SceneSample& sample, Corruption kind, std::uint64_t seed, const SceneOptions& options = {});

}  // namespace cgm
