#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace cgm {

struct DepthImage;

enum class VideoType { front, back, deg360 };
enum class AgeBucket { age_2_3, age_3_4, age_4_5 };
enum class Quality { good, bad };
enum class Split { train, test };

inline constexpr std::array kVideoTypes{VideoType::front, VideoType::back, VideoType::deg360};
inline constexpr std::array kAgeBuckets{AgeBucket::age_2_3, AgeBucket::age_3_4, AgeBucket::age_4_5};

std::string_view to_string(VideoType t) noexcept;
std::string_view to_string(AgeBucket a) noexcept;
std::string_view to_string(Quality q) noexcept;
std::string_view to_string(Split s) noexcept;

std::optional<VideoType> parse_video_type(std::string_view s) noexcept;
std::optional<AgeBucket> parse_age_bucket(std::string_view s) noexcept;
std::optional<Quality> parse_quality(std::string_view s) noexcept;
std::optional<Split> parse_split(std::string_view s) noexcept;

/// One depth frame. A "bad" video marks all of its frames bad.
struct SampleRecord {
  std::string child_id;
  std::string frame_path;  // relative to the manifest's directory
  VideoType video_type = VideoType::front;
  AgeBucket age_bucket = AgeBucket::age_2_3;
  Quality quality = Quality::good;
  double label_height_cm = 0.0;
  Split split = Split::train;

  friend bool operator==(const SampleRecord&, const SampleRecord&) = default;
};

struct Manifest {
  static constexpr int kSchemaVersion = 1;

  std::vector<SampleRecord> records;
  int schema_version = kSchemaVersion;

  friend bool operator==(const Manifest&, const Manifest&) = default;
};

inline constexpr std::string_view kManifestHeader =
    "child_id,frame_path,video_type,age_bucket,quality,label_height_cm,split";

/// Throws Error(SplitLeak) if a child appears in both splits and
/// Error(BadTestQuality) if a bad record sits in the test split.
void validate_manifest(const Manifest& manifest);

/// CSV with the exact kManifestHeader. Throws MalformedRow, SplitLeak, BadTestQuality.
Manifest load_manifest(std::string_view bytes);
std::string save_manifest(const Manifest& manifest);

/// Assigns whole children to train or test. round(test_fraction * children)
/// children go to test, drawn only from children without bad records; the
/// rest (and every child with a bad record) go to train.
Manifest split_by_child(std::vector<SampleRecord> records, double test_fraction, std::uint64_t seed);

/// Counts shaped like the age and video-type tables: children per age bucket
/// and frames per video type, each split into train and test.
struct DatasetSummary {
  // [row][0] = train, [row][1] = test
  std::array<std::array<std::size_t, 2>, 3> children_by_age{};
  std::array<std::array<std::size_t, 2>, 3> frames_by_video{};

  [[nodiscard]] std::size_t children_total(Split s) const;
  [[nodiscard]] std::size_t frames_total(Split s) const;
};

DatasetSummary summarize(const Manifest& manifest);
std::string format_summary(const DatasetSummary& summary);

/// Test utility for synthetic corruption experiments: a frame is graded bad
/// when the fraction of pixels that stand out from the per-row background is
/// outside [min_fraction, max_fraction].
struct QualityGrader {
  double min_fraction = 0.01;
  double max_fraction = 0.15;
  std::uint16_t foreground_margin_mm = 150;

  [[nodiscard]] double figure_fraction(const DepthImage& img) const;
  [[nodiscard]] Quality grade(const DepthImage& img) const;
};

}  // namespace cgm
