#include "texloss/io.hpp"

#include <bit>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>

#include <unistd.h>

#include <json.hpp>

#include "texloss/error.hpp"

namespace texloss {

namespace fs = std::filesystem;

namespace {

// --- low-level file helpers -------------------------------------------------

std::string read_binary(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw IoError("cannot open " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) {
    throw IoError("read failure on " + path.string());
  }
  return std::move(buf).str();
}

// --- PGM --------------------------------------------------------------------

// Reads the next header token, skipping whitespace and '#' comments.
std::string next_pgm_token(const std::string& bytes, size_t& pos) {
  while (pos < bytes.size()) {
    char c = bytes[pos];
    if (c == '#') {
      while (pos < bytes.size() && bytes[pos] != '\n') ++pos;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      ++pos;
    } else {
      break;
    }
  }
  size_t start = pos;
  while (pos < bytes.size() &&
         !std::isspace(static_cast<unsigned char>(bytes[pos])) && bytes[pos] != '#') {
    ++pos;
  }
  if (start == pos) {
    throw ParseError(ParseError::Kind::MalformedHeader, "unexpected end of PGM header");
  }
  return bytes.substr(start, pos - start);
}

long parse_pgm_int(const std::string& bytes, size_t& pos, const char* what) {
  std::string tok = next_pgm_token(bytes, pos);
  char* end = nullptr;
  long v = std::strtol(tok.c_str(), &end, 10);
  if (end != tok.c_str() + tok.size() || v < 0) {
    throw ParseError(ParseError::Kind::MalformedHeader,
                     std::string("bad PGM ") + what + ": '" + tok + "'");
  }
  return v;
}

struct PgmHeader {
  int width;
  int height;
  long maxval;
  size_t data_pos;  // first payload byte
};

PgmHeader parse_pgm_header(const std::string& bytes, const fs::path& path) {
  size_t pos = 0;
  std::string magic = next_pgm_token(bytes, pos);
  if (magic != "P5") {
    throw ParseError(ParseError::Kind::MalformedHeader,
                     path.string() + ": not a binary PGM (magic '" + magic + "')");
  }
  long w = parse_pgm_int(bytes, pos, "width");
  long h = parse_pgm_int(bytes, pos, "height");
  long maxval = parse_pgm_int(bytes, pos, "maxval");
  if (w <= 0 || h <= 0 || maxval <= 0 || maxval > 65535) {
    throw ParseError(ParseError::Kind::MalformedHeader,
                     path.string() + ": invalid PGM dimensions or maxval");
  }
  // Exactly one whitespace byte separates the maxval from the payload.
  if (pos >= bytes.size() || !std::isspace(static_cast<unsigned char>(bytes[pos]))) {
    throw ParseError(ParseError::Kind::MalformedHeader,
                     path.string() + ": missing separator before PGM payload");
  }
  ++pos;
  return {static_cast<int>(w), static_cast<int>(h), maxval, pos};
}

Image load_pgm(const fs::path& path, ImageFormat format) {
  std::string bytes = read_binary(path);
  PgmHeader hdr = parse_pgm_header(bytes, path);

  bool wide = hdr.maxval > 255;
  if (format == ImageFormat::Pgm8 && wide) {
    throw ParseError(ParseError::Kind::MalformedHeader,
                     path.string() + ": maxval " + std::to_string(hdr.maxval) +
                         " does not fit pgm8");
  }
  if (format == ImageFormat::Pgm16 && !wide) {
    throw ParseError(ParseError::Kind::MalformedHeader,
                     path.string() + ": maxval " + std::to_string(hdr.maxval) +
                         " is 8-bit, expected pgm16");
  }

  size_t count = static_cast<size_t>(hdr.width) * hdr.height;
  size_t need = count * (wide ? 2 : 1);
  if (bytes.size() - hdr.data_pos < need) {
    throw ParseError(ParseError::Kind::TruncatedData,
                     path.string() + ": payload has " +
                         std::to_string(bytes.size() - hdr.data_pos) + " bytes, needs " +
                         std::to_string(need));
  }

  std::vector<double> data(count);
  const unsigned char* p =
      reinterpret_cast<const unsigned char*>(bytes.data()) + hdr.data_pos;
  if (wide) {
    for (size_t i = 0; i < count; ++i) {
      data[i] = static_cast<double>((static_cast<unsigned>(p[2 * i]) << 8) | p[2 * i + 1]);
    }
  } else {
    for (size_t i = 0; i < count; ++i) {
      data[i] = static_cast<double>(p[i]);
    }
  }
  double hi = wide ? 65535.0 : 255.0;
  return Image(hdr.width, hdr.height, std::move(data), Interval(0.0, hi));
}

// --- raw_f32 ----------------------------------------------------------------

struct Sidecar {
  int width;
  int height;
  double lo;
  double hi;
};

Sidecar load_sidecar(const fs::path& image_path) {
  fs::path sc = sidecar_path(image_path);
  std::error_code ec;
  if (!fs::exists(sc, ec)) {
    throw ParseError(ParseError::Kind::MissingSidecar,
                     "missing sidecar " + sc.string() + " for " + image_path.string());
  }
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(read_binary(sc));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(ParseError::Kind::BadSidecar, sc.string() + ": " + e.what());
  }
  if (!j.is_object() || !j.contains("width") || !j.contains("height") ||
      !j.contains("lo") || !j.contains("hi") || !j["width"].is_number_integer() ||
      !j["height"].is_number_integer() || !j["lo"].is_number() || !j["hi"].is_number()) {
    throw ParseError(ParseError::Kind::BadSidecar,
                     sc.string() + ": sidecar must be {width:int, height:int, lo, hi}");
  }
  return {j["width"].get<int>(), j["height"].get<int>(), j["lo"].get<double>(),
          j["hi"].get<double>()};
}

float f32_from_le(const unsigned char* p) {
  uint32_t u = static_cast<uint32_t>(p[0]) | (static_cast<uint32_t>(p[1]) << 8) |
               (static_cast<uint32_t>(p[2]) << 16) | (static_cast<uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(u);
}

void f32_to_le(float f, unsigned char* p) {
  uint32_t u = std::bit_cast<uint32_t>(f);
  p[0] = static_cast<unsigned char>(u & 0xff);
  p[1] = static_cast<unsigned char>((u >> 8) & 0xff);
  p[2] = static_cast<unsigned char>((u >> 16) & 0xff);
  p[3] = static_cast<unsigned char>((u >> 24) & 0xff);
}

Image load_raw_f32(const fs::path& path) {
  Sidecar sc = load_sidecar(path);
  if (sc.width <= 0 || sc.height <= 0 || !(sc.lo < sc.hi)) {
    throw ParseError(ParseError::Kind::BadSidecar,
                     sidecar_path(path).string() + ": non-positive dims or lo >= hi");
  }
  std::string bytes = read_binary(path);
  size_t count = static_cast<size_t>(sc.width) * sc.height;
  if (bytes.size() != count * 4) {
    throw ParseError(ParseError::Kind::TruncatedData,
                     path.string() + ": payload is " + std::to_string(bytes.size()) +
                         " bytes, sidecar implies " + std::to_string(count * 4));
  }
  const unsigned char* p = reinterpret_cast<const unsigned char*>(bytes.data());
  std::vector<double> data(count);
  for (size_t i = 0; i < count; ++i) {
    double v = static_cast<double>(f32_from_le(p + 4 * i));
    if (!std::isfinite(v)) {
      throw ParseError(ParseError::Kind::TruncatedData,
                       path.string() + ": non-finite sample at index " + std::to_string(i));
    }
    // float32 quantization can nudge a value stored at a range endpoint
    // just past it; clamp restores the image invariant without touching
    // interior samples beyond the format's own precision.
    data[i] = std::min(sc.hi, std::max(sc.lo, v));
  }
  return Image(sc.width, sc.height, std::move(data), Interval(sc.lo, sc.hi));
}

// --- saving -----------------------------------------------------------------

void save_pgm(const Image& img, const fs::path& path, long maxval) {
  for (double v : img.data()) {
    if (!(v >= 0.0 && v <= static_cast<double>(maxval))) {
      throw RangeOverflowError("pixel value " + std::to_string(v) +
                               " outside [0, " + std::to_string(maxval) +
                               "], refusing lossy save");
    }
  }
  std::string out = "P5\n" + std::to_string(img.width()) + " " +
                    std::to_string(img.height()) + "\n" + std::to_string(maxval) + "\n";
  out.reserve(out.size() + img.pixel_count() * (maxval > 255 ? 2 : 1));
  if (maxval > 255) {
    for (double v : img.data()) {
      long q = std::lround(v);
      out.push_back(static_cast<char>((q >> 8) & 0xff));
      out.push_back(static_cast<char>(q & 0xff));
    }
  } else {
    for (double v : img.data()) {
      out.push_back(static_cast<char>(std::lround(v) & 0xff));
    }
  }
  write_file_atomic(path, out);
}

void save_raw_f32(const Image& img, const fs::path& path) {
  nlohmann::json j;
  j["width"] = img.width();
  j["height"] = img.height();
  j["lo"] = img.value_range().lo;
  j["hi"] = img.value_range().hi;
  write_file_atomic(sidecar_path(path), j.dump());

  std::string out(img.pixel_count() * 4, '\0');
  unsigned char* p = reinterpret_cast<unsigned char*>(out.data());
  size_t i = 0;
  for (double v : img.data()) {
    f32_to_le(static_cast<float>(v), p + 4 * i);
    ++i;
  }
  write_file_atomic(path, out);
}

}  // namespace

fs::path sidecar_path(const fs::path& image_path) {
  fs::path sc = image_path;
  sc.replace_extension(".json");
  return sc;
}

Image load_image(const fs::path& path, ImageFormat format) {
  switch (format) {
    case ImageFormat::Pgm8:
    case ImageFormat::Pgm16:
      return load_pgm(path, format);
    case ImageFormat::RawF32:
      return load_raw_f32(path);
  }
  throw InvalidArgumentError("unknown image format");
}

void save_image(const Image& img, const fs::path& path, ImageFormat format) {
  switch (format) {
    case ImageFormat::Pgm8:
      save_pgm(img, path, 255);
      return;
    case ImageFormat::Pgm16:
      save_pgm(img, path, 65535);
      return;
    case ImageFormat::RawF32:
      save_raw_f32(img, path);
      return;
  }
  throw InvalidArgumentError("unknown image format");
}

ImageFormat detect_format(const fs::path& path) {
  if (path.extension() == ".f32") {
    return ImageFormat::RawF32;
  }
  std::string bytes = read_binary(path);
  PgmHeader hdr = parse_pgm_header(bytes, path);
  return hdr.maxval > 255 ? ImageFormat::Pgm16 : ImageFormat::Pgm8;
}

ImageFormat parse_format(const std::string& name) {
  if (name == "pgm8") return ImageFormat::Pgm8;
  if (name == "pgm16") return ImageFormat::Pgm16;
  if (name == "raw_f32") return ImageFormat::RawF32;
  throw InvalidArgumentError("unknown format '" + name + "' (pgm8|pgm16|raw_f32)");
}

void write_file_atomic(const fs::path& path, const std::string& contents) {
  fs::path dir = path.parent_path();
  fs::path tmp = (dir.empty() ? fs::path(".") : dir) /
                 (path.filename().string() + ".tmp" + std::to_string(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) {
      throw IoError("cannot open " + tmp.string() + " for writing");
    }
    out.write(contents.data(), static_cast<std::streamsize>(contents.size()));
    out.flush();
    if (!out) {
      throw IoError("write failure on " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw IoError("cannot rename " + tmp.string() + " to " + path.string() + ": " +
                  ec.message());
  }
}

std::string read_file(const fs::path& path) { return read_binary(path); }

}  // namespace texloss
