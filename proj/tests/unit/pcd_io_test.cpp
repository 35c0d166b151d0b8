#include <gtest/gtest.h>

#include <random>
#include <string>

#include "cgm/error.hpp"
#include "cgm/point_cloud.hpp"

namespace cgm {
namespace {

std::string header(std::size_t points, const std::string& extra = "") {
  return "# .PCD v0.7\nVERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\nWIDTH " +
         std::to_string(points) + "\nHEIGHT 1\n" + extra + "VIEWPOINT 0 0 0 1 0 0 0\nPOINTS " +
         std::to_string(points) + "\nDATA ascii\n";
}

Errc code_of(const std::string& text) {
  try {
    (void)parse_pcd(text);
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error for:\n" << text;
  return Errc::io;
}

TEST(PcdParse, EmptyBody) {
  const auto r = parse_pcd(header(0));
  EXPECT_TRUE(r.cloud.points.empty());
  EXPECT_EQ(r.dropped, 0u);
}

TEST(PcdParse, DropsNonFiniteRows) {
  const auto r = parse_pcd(header(3) + "0 0 1\nnan 0 1\n0.5 -0.25 2\n");
  ASSERT_EQ(r.cloud.points.size(), 2u);
  EXPECT_EQ(r.dropped, 1u);
  EXPECT_DOUBLE_EQ(r.cloud.points[1].x, 0.5);
  EXPECT_DOUBLE_EQ(r.cloud.points[1].y, -0.25);
}

TEST(PcdParse, ExtraFieldsAreIgnored) {
  const std::string text =
      "VERSION 0.7\nFIELDS x y z intensity\nSIZE 4 4 4 4\nTYPE F F F F\nCOUNT 1 1 1 1\nWIDTH 1\nHEIGHT 1\n"
      "VIEWPOINT 0 0 0 1 0 0 0\nPOINTS 1\nDATA ascii\n1 2 3 99\n";
  const auto r = parse_pcd(text);
  ASSERT_EQ(r.cloud.points.size(), 1u);
  EXPECT_DOUBLE_EQ(r.cloud.points[0].z, 3.0);
}

TEST(PcdParse, Errors) {
  EXPECT_EQ(code_of("garbage\n"), Errc::malformed_header);
  EXPECT_EQ(code_of(header(1) + "1 2\n"), Errc::malformed_data);
  EXPECT_EQ(code_of(header(1) + "1 2 abc\n"), Errc::malformed_data);
  EXPECT_EQ(code_of(header(2) + "1 2 3\n"), Errc::count_mismatch);
  EXPECT_EQ(code_of(header(1) + "1 2 3\n4 5 6\n"), Errc::count_mismatch);

  std::string binary = header(1);
  binary.replace(binary.find("DATA ascii"), 10, "DATA binary");
  EXPECT_EQ(code_of(binary), Errc::unsupported_layout);

  std::string no_z = header(0);
  no_z.replace(no_z.find("FIELDS x y z"), 12, "FIELDS x y w");
  EXPECT_EQ(code_of(no_z), Errc::unsupported_layout);
}

TEST(PcdParse, SurvivesArbitraryBytes) {
  std::mt19937_64 rng(3);
  const std::string valid = header(2) + "0 0 1\n1 1 1\n";
  for (int trial = 0; trial < 2000; ++trial) {
    std::string text = valid;
    const int edits = 1 + static_cast<int>(rng() % 4);
    for (int e = 0; e < edits; ++e) {
      text[rng() % text.size()] = static_cast<char>(rng() % 256);
    }
    try {
      (void)parse_pcd(text);
    } catch (const Error&) {
    }
  }
  SUCCEED();
}

TEST(PcdWrite, EmptyCloud) {
  const std::string text = write_pcd(PointCloud{});
  EXPECT_NE(text.find("POINTS 0\n"), std::string::npos);
  EXPECT_EQ(text.substr(text.size() - 11), "DATA ascii\n");
}

TEST(PcdWrite, RowFormat) {
  PointCloud c;
  c.points.push_back({0.0, 0.0, 1.0});
  const std::string text = write_pcd(c);
  EXPECT_EQ(text.substr(text.size() - 27), "0.000000 0.000000 1.000000\n");
}

TEST(PcdWrite, RoundTripRandom) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-5.0, 5.0);
  PointCloud c;
  c.frame_id = 42;
  c.meta["child_id"] = "c017";
  for (int i = 0; i < 1000; ++i) {
    c.points.push_back({u(rng), u(rng), u(rng)});
  }
  const auto r = parse_pcd(write_pcd(c));
  ASSERT_EQ(r.cloud.points.size(), c.points.size());
  for (std::size_t i = 0; i < c.points.size(); ++i) {
    EXPECT_NEAR(r.cloud.points[i].x, c.points[i].x, 1e-6);
    EXPECT_NEAR(r.cloud.points[i].y, c.points[i].y, 1e-6);
    EXPECT_NEAR(r.cloud.points[i].z, c.points[i].z, 1e-6);
  }
  EXPECT_EQ(r.cloud.frame_id, 42u);
  EXPECT_EQ(r.cloud.meta.at("child_id"), "c017");
  // A second pass is exact: the text is already at 6 decimals.
  EXPECT_EQ(write_pcd(r.cloud), write_pcd(parse_pcd(write_pcd(r.cloud)).cloud));
}

}  // namespace
}  // namespace cgm
