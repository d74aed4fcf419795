// Copyright 2026 The dxr Authors. All Rights Reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#include "dxr/pgm.hpp"

#include <cctype>
#include <fstream>
#include <iterator>
#include <limits>
#include <string>

#include "dxr/error.hpp"

namespace dxr {

namespace {

using Kind = FormatError::Kind;

class HeaderReader {
 public:
  explicit HeaderReader(std::span<const std::uint8_t> bytes) : bytes_(bytes) {}

  void skip_space_and_comments() {
    while (pos_ < bytes_.size()) {
      const auto ch = bytes_[pos_];
      if (ch == '#') {
        while (pos_ < bytes_.size() && bytes_[pos_] != '\n' && bytes_[pos_] != '\r') ++pos_;
      } else if (std::isspace(ch)) {
        ++pos_;
      } else {
        break;
      }
    }
  }

  /// Reads a decimal field. `truncated_kind` is raised when input ends first.
  std::size_t read_uint(const char* field, Kind truncated_kind) {
    skip_space_and_comments();
    if (pos_ >= bytes_.size()) throw FormatError(truncated_kind, std::string("pgm: missing ") + field);
    if (!std::isdigit(bytes_[pos_]))
      throw FormatError(Kind::kMalformedHeader, std::string("pgm: non-numeric ") + field);
    std::size_t value = 0;
    while (pos_ < bytes_.size() && std::isdigit(bytes_[pos_])) {
      value = value * 10 + static_cast<std::size_t>(bytes_[pos_] - '0');
      if (value > (std::size_t{1} << 31)) throw FormatError(Kind::kMalformedHeader, std::string("pgm: oversized ") + field);
      ++pos_;
    }
    if (pos_ < bytes_.size() && !std::isspace(bytes_[pos_]) && bytes_[pos_] != '#')
      throw FormatError(Kind::kMalformedHeader, std::string("pgm: garbage after ") + field);
    return value;
  }

  std::size_t pos() const noexcept { return pos_; }
  void advance() noexcept { ++pos_; }

 private:
  std::span<const std::uint8_t> bytes_;
  std::size_t pos_ = 0;
};

}  // namespace

Image read_pgm(std::span<const std::uint8_t> bytes) {
  if (bytes.size() < 2 || bytes[0] != 'P')
    throw FormatError(Kind::kMalformedHeader, "pgm: bad magic number");
  const bool binary = bytes[1] == '5';
  if (!binary && bytes[1] != '2') {
    throw FormatError(Kind::kUnsupported,
                      std::string("pgm: unsupported format P") + static_cast<char>(bytes[1]) +
                          " (only grayscale P5/P2)");
  }
  HeaderReader in(bytes.subspan(0));
  in.advance();
  in.advance();
  if (in.pos() < bytes.size() && !std::isspace(bytes[in.pos()]) && bytes[in.pos()] != '#')
    throw FormatError(Kind::kMalformedHeader, "pgm: bad magic number");

  const std::size_t width = in.read_uint("width", Kind::kMalformedHeader);
  const std::size_t height = in.read_uint("height", Kind::kMalformedHeader);
  const std::size_t maxval = in.read_uint("maxval", Kind::kMalformedHeader);
  if (width == 0 || height == 0) throw FormatError(Kind::kMalformedHeader, "pgm: zero extent");
  if (maxval == 0) throw FormatError(Kind::kMalformedHeader, "pgm: zero maxval");
  if (maxval > 255) throw FormatError(Kind::kUnsupported, "pgm: maxval > 255 is not supported");

  const std::size_t count = width * height;
  std::vector<std::uint8_t> pixels(count);
  if (binary) {
    // exactly one whitespace byte separates the header from the raster
    if (in.pos() >= bytes.size()) throw FormatError(Kind::kTruncated, "pgm: truncated payload");
    const std::size_t start = in.pos() + 1;
    if (bytes.size() < start || bytes.size() - start < count)
      throw FormatError(Kind::kTruncated, "pgm: truncated payload");
    for (std::size_t i = 0; i < count; ++i) {
      pixels[i] = bytes[start + i];
      if (pixels[i] > maxval) throw FormatError(Kind::kMalformedHeader, "pgm: sample exceeds maxval");
    }
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      const std::size_t v = in.read_uint("sample", Kind::kTruncated);
      if (v > maxval) throw FormatError(Kind::kMalformedHeader, "pgm: sample exceeds maxval");
      pixels[i] = static_cast<std::uint8_t>(v);
    }
  }
  return Image(width, height, std::move(pixels));
}

std::vector<std::uint8_t> write_pgm(const Image& img) {
  const std::string header =
      "P5\n" + std::to_string(img.width()) + " " + std::to_string(img.height()) + "\n255\n";
  std::vector<std::uint8_t> out(header.begin(), header.end());
  out.insert(out.end(), img.pixels().begin(), img.pixels().end());
  return out;
}

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw IoError("cannot open " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (f.bad()) throw IoError("read failed: " + path.string());
  return bytes;
}

void write_file_bytes(const std::filesystem::path& path, std::span<const std::uint8_t> bytes) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open for writing " + path.string());
  f.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!f) throw IoError("write failed: " + path.string());
}

Image load_pgm(const std::filesystem::path& path) {
  const auto bytes = read_file_bytes(path);
  try {
    return read_pgm(bytes);
  } catch (const FormatError& e) {
    throw FormatError(e.kind(), path.string() + ": " + e.what());
  }
}

void save_pgm(const Image& img, const std::filesystem::path& path) { write_file_bytes(path, write_pgm(img)); }

}  // namespace dxr
