#include <algorithm>
#include <array>
#include <charconv>
#include <limits>
#include <optional>
#include <span>

#include "cgm/error.hpp"
#include "cgm/point_cloud.hpp"

namespace cgm {
namespace {

std::vector<std::string_view> split_lines(std::string_view bytes) {
  std::vector<std::string_view> lines;
  std::size_t start = 0;
  while (start < bytes.size()) {
    std::size_t end = bytes.find('\n', start);
    if (end == std::string_view::npos) {
      end = bytes.size();
    }
    std::string_view line = bytes.substr(start, end - start);
    if (!line.empty() && line.back() == '\r') {
      line.remove_suffix(1);
    }
    lines.push_back(line);
    start = end + 1;
  }
  return lines;
}

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && (line[i] == ' ' || line[i] == '\t')) {
      ++i;
    }
    const std::size_t begin = i;
    while (i < line.size() && line[i] != ' ' && line[i] != '\t') {
      ++i;
    }
    if (i > begin) {
      tokens.push_back(line.substr(begin, i - begin));
    }
  }
  return tokens;
}

std::optional<double> to_double(std::string_view token) {
  if (!token.empty() && token.front() == '+') {
    token.remove_prefix(1);
  }
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

std::optional<std::uint64_t> to_count(std::string_view token) {
  std::uint64_t value = 0;
  const auto [ptr, ec] = std::from_chars(token.data(), token.data() + token.size(), value);
  if (ec != std::errc{} || ptr != token.data() + token.size()) {
    return std::nullopt;
  }
  return value;
}

bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(), [](char c) { return c == ' ' || c == '\t'; });
}

void append_fixed6(std::string& out, double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, 6);
  out.append(buf.data(), ptr);
}

}  // namespace

PcdParseResult parse_pcd(std::string_view bytes) {
  const auto lines = split_lines(bytes);

  std::vector<std::string_view> fields;
  std::vector<std::string_view> sizes;
  std::vector<std::string_view> types;
  std::vector<std::uint64_t> counts;
  std::optional<std::uint64_t> declared_points;
  bool saw_data = false;
  PointCloud cloud;

  std::size_t line_no = 0;
  for (; line_no < lines.size(); ++line_no) {
    const std::string_view line = lines[line_no];
    if (is_blank(line)) {
      continue;
    }
    const auto tokens = split_tokens(line);
    if (tokens.front().front() == '#') {
      // "# frame_id N" and "# meta key value" are our own annotations.
      if (tokens.size() == 3 && tokens[1] == "frame_id") {
        if (const auto id = to_count(tokens[2]); id && *id <= std::numeric_limits<std::uint32_t>::max()) {
          cloud.frame_id = static_cast<std::uint32_t>(*id);
        }
      } else if (tokens.size() == 4 && tokens[1] == "meta") {
        cloud.meta[std::string(tokens[2])] = std::string(tokens[3]);
      }
      continue;
    }
    const std::string_view key = tokens.front();
    const std::span<const std::string_view> args(tokens.data() + 1, tokens.size() - 1);
    if (key == "FIELDS") {
      fields.assign(args.begin(), args.end());
    } else if (key == "SIZE") {
      sizes.assign(args.begin(), args.end());
    } else if (key == "TYPE") {
      types.assign(args.begin(), args.end());
    } else if (key == "COUNT") {
      counts.clear();
      for (const auto a : args) {
        const auto c = to_count(a);
        if (!c || *c == 0 || *c > 1024) {
          throw Error(Errc::malformed_header, "bad COUNT entry");
        }
        counts.push_back(*c);
      }
    } else if (key == "POINTS") {
      if (args.size() != 1 || !(declared_points = to_count(args[0]))) {
        throw Error(Errc::malformed_header, "bad POINTS line");
      }
    } else if (key == "DATA") {
      if (args.size() != 1) {
        throw Error(Errc::malformed_header, "bad DATA line");
      }
      if (args[0] != "ascii") {
        throw Error(Errc::unsupported_layout, "only DATA ascii is supported");
      }
      saw_data = true;
      ++line_no;
      break;
    } else if (key == "VERSION" || key == "WIDTH" || key == "HEIGHT" || key == "VIEWPOINT") {
      // Informational for unorganized clouds.
    } else {
      throw Error(Errc::malformed_header, "unknown header keyword '" + std::string(key) + "'");
    }
  }

  if (fields.empty()) {
    throw Error(Errc::malformed_header, "missing FIELDS line");
  }
  if (!declared_points) {
    throw Error(Errc::malformed_header, "missing POINTS line");
  }
  if (!saw_data) {
    throw Error(Errc::malformed_header, "missing DATA line");
  }
  if (counts.empty()) {
    counts.assign(fields.size(), 1);
  }
  if (counts.size() != fields.size() || (!sizes.empty() && sizes.size() != fields.size()) ||
      (!types.empty() && types.size() != fields.size())) {
    throw Error(Errc::malformed_header, "FIELDS/SIZE/TYPE/COUNT lengths disagree");
  }

  // Column offsets of x, y, z.
  std::array<std::optional<std::size_t>, 3> column;
  std::size_t total_columns = 0;
  for (std::size_t f = 0; f < fields.size(); ++f) {
    const std::string_view name = fields[f];
    const int axis = name == "x" ? 0 : name == "y" ? 1 : name == "z" ? 2 : -1;
    if (axis >= 0) {
      if (counts[f] != 1 || column[axis]) {
        throw Error(Errc::unsupported_layout, "coordinate field must appear once with COUNT 1");
      }
      if (!types.empty() && types[f] != "F") {
        throw Error(Errc::unsupported_layout, "coordinate fields must be TYPE F");
      }
      if (!sizes.empty() && sizes[f] != "4" && sizes[f] != "8") {
        throw Error(Errc::unsupported_layout, "coordinate fields must be SIZE 4 or 8");
      }
      column[axis] = total_columns;
    }
    total_columns += counts[f];
  }
  if (!column[0] || !column[1] || !column[2]) {
    throw Error(Errc::unsupported_layout, "FIELDS must include x y z");
  }

  PcdParseResult result;
  result.cloud = std::move(cloud);
  std::size_t rows = 0;
  for (; line_no < lines.size(); ++line_no) {
    const std::string_view line = lines[line_no];
    if (is_blank(line)) {
      continue;
    }
    ++rows;
    if (rows > *declared_points) {
      continue;  // counted, reported below
    }
    const auto tokens = split_tokens(line);
    if (tokens.size() != total_columns) {
      throw Error(Errc::malformed_data, "row " + std::to_string(rows) + " has " +
                                            std::to_string(tokens.size()) + " columns, expected " +
                                            std::to_string(total_columns));
    }
    const auto x = to_double(tokens[*column[0]]);
    const auto y = to_double(tokens[*column[1]]);
    const auto z = to_double(tokens[*column[2]]);
    if (!x || !y || !z) {
      throw Error(Errc::malformed_data, "row " + std::to_string(rows) + " is not numeric");
    }
    const Point3 p{*x, *y, *z};
    if (p.finite()) {
      result.cloud.points.push_back(p);
    } else {
      ++result.dropped;
    }
  }
  if (rows != *declared_points) {
    throw Error(Errc::count_mismatch, "POINTS " + std::to_string(*declared_points) + " but " +
                                          std::to_string(rows) + " data rows");
  }
  return result;
}

std::string write_pcd(const PointCloud& cloud) {
  const std::string n = std::to_string(cloud.points.size());
  std::string out;
  out.reserve(256 + cloud.points.size() * 32);
  out += "# .PCD v0.7 - Point Cloud Data file format\n";
  out += "# frame_id " + std::to_string(cloud.frame_id) + "\n";
  for (const auto& [key, value] : cloud.meta) {
    out += "# meta " + key + " " + value + "\n";
  }
  out += "VERSION 0.7\nFIELDS x y z\nSIZE 4 4 4\nTYPE F F F\nCOUNT 1 1 1\n";
  out += "WIDTH " + n + "\nHEIGHT 1\nVIEWPOINT 0 0 0 1 0 0 0\n";
  out += "POINTS " + n + "\nDATA ascii\n";
  for (const Point3& p : cloud.points) {
    append_fixed6(out, p.x);
    out += ' ';
    append_fixed6(out, p.y);
    out += ' ';
    append_fixed6(out, p.z);
    out += '\n';
  }
  return out;
}

}  // namespace cgm
