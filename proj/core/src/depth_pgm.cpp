#include <array>
#include <cctype>
#include <charconv>
#include <optional>

#include "cgm/error.hpp"
#include "cgm/projection.hpp"

namespace cgm {
namespace {

constexpr int kMaxDimension = 1 << 15;

void append_fixed6(std::string& out, double value) {
  std::array<char, 64> buf{};
  const auto [ptr, ec] =
      std::to_chars(buf.data(), buf.data() + buf.size(), value, std::chars_format::fixed, 6);
  out.append(buf.data(), ptr);
}

// Netpbm header scanner: whitespace-separated integers with '#' comments.
class HeaderReader {
 public:
  explicit HeaderReader(std::string_view bytes) : bytes_(bytes) {}

  std::optional<long long> next_int() {
    skip_space_and_comments();
    const std::size_t begin = pos_;
    while (pos_ < bytes_.size() && std::isdigit(static_cast<unsigned char>(bytes_[pos_]))) {
      ++pos_;
    }
    if (pos_ == begin || pos_ - begin > 12) {
      return std::nullopt;
    }
    long long value = 0;
    std::from_chars(bytes_.data() + begin, bytes_.data() + pos_, value);
    return value;
  }

  [[nodiscard]] std::size_t pos() const { return pos_; }
  void advance(std::size_t n) { pos_ += n; }
  [[nodiscard]] bool has_intrinsics() const { return has_intrinsics_; }
  [[nodiscard]] const std::array<double, 4>& intrinsics() const { return intrinsics_; }

 private:
  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const char c = bytes_[pos_];
      if (c == '#') {
        const std::size_t end = bytes_.find('\n', pos_);
        const std::size_t stop = end == std::string_view::npos ? bytes_.size() : end;
        parse_comment(bytes_.substr(pos_ + 1, stop - pos_ - 1));
        pos_ = stop;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++pos_;
      } else {
        return;
      }
    }
  }

  void parse_comment(std::string_view text) {
    if (has_intrinsics_) {
      return;
    }
    std::array<double, 4> values{};
    std::size_t i = 0;
    for (double& value : values) {
      while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) {
        ++i;
      }
      const auto [ptr, ec] = std::from_chars(text.data() + i, text.data() + text.size(), value);
      if (ec != std::errc{}) {
        return;
      }
      i = static_cast<std::size_t>(ptr - text.data());
    }
    while (i < text.size() && (text[i] == ' ' || text[i] == '\t' || text[i] == '\r')) {
      ++i;
    }
    if (i == text.size()) {
      intrinsics_ = values;
      has_intrinsics_ = true;
    }
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
  std::array<double, 4> intrinsics_{};
  bool has_intrinsics_ = false;
};

}  // namespace

std::string write_depth_pgm(const DepthImage& img) {
  const CameraIntrinsics& intr = img.intrinsics;
  std::string out = "P5\n# ";
  append_fixed6(out, intr.fx);
  out += ' ';
  append_fixed6(out, intr.fy);
  out += ' ';
  append_fixed6(out, intr.cx);
  out += ' ';
  append_fixed6(out, intr.cy);
  out += '\n' + std::to_string(img.width) + ' ' + std::to_string(img.height) + "\n65535\n";
  out.reserve(out.size() + img.depths.size() * 2);
  for (const std::uint16_t d : img.depths) {
    out += static_cast<char>(d >> 8);
    out += static_cast<char>(d & 0xff);
  }
  return out;
}

DepthImage read_depth_pgm(std::string_view bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P' || bytes[1] != '5') {
    throw Error(Errc::malformed_header, "not a binary PGM (P5)");
  }
  HeaderReader reader(bytes);
  reader.advance(2);
  const auto width = reader.next_int();
  const auto height = reader.next_int();
  const auto maxval = reader.next_int();
  if (!width || !height || !maxval || *width <= 0 || *height <= 0 || *width > kMaxDimension ||
      *height > kMaxDimension) {
    throw Error(Errc::malformed_header, "bad PGM dimensions or maxval");
  }
  if (*maxval != 65535) {
    throw Error(Errc::wrong_maxval, "maxval " + std::to_string(*maxval) + ", expected 65535");
  }
  if (reader.pos() >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[reader.pos()]))) {
    throw Error(Errc::truncated_payload, "missing separator before payload");
  }
  if (!reader.has_intrinsics()) {
    throw Error(Errc::missing_intrinsics, "no '# fx fy cx cy' comment");
  }
  const std::size_t payload_start = reader.pos() + 1;
  const std::size_t cells = static_cast<std::size_t>(*width) * static_cast<std::size_t>(*height);
  if (bytes.size() - payload_start < cells * 2) {
    throw Error(Errc::truncated_payload, "expected " + std::to_string(cells * 2) + " payload bytes, got " +
                                             std::to_string(bytes.size() - payload_start));
  }

  const std::array<double, 4>& k = reader.intrinsics();
  CameraIntrinsics intr{k[0], k[1], k[2], k[3], static_cast<int>(*width), static_cast<int>(*height)};
  intr.validate();
  DepthImage img(intr);
  const auto* payload = reinterpret_cast<const unsigned char*>(bytes.data() + payload_start);
  for (std::size_t i = 0; i < cells; ++i) {
    img.depths[i] = static_cast<std::uint16_t>((payload[2 * i] << 8) | payload[2 * i + 1]);
  }
  return img;
}

}  // namespace cgm
