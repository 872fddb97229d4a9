#pragma once

#include <filesystem>
#include <string>

#include "texloss/image.hpp"

namespace texloss {

enum class ImageFormat {
  Pgm8,    // binary P5, maxval <= 255, 1 byte per sample
  Pgm16,   // binary P5, maxval in [256, 65535], 2 bytes per sample, big-endian
  RawF32,  // little-endian float32 row-major + JSON sidecar {width,height,lo,hi}
};

// Path of the JSON sidecar describing a raw_f32 file: extension replaced
// by ".json" (img.f32 -> img.json).
std::filesystem::path sidecar_path(const std::filesystem::path& image_path);

// Decodes a file under the declared format.  PGM loads carry value range
// [0,255] (pgm8) or [0,65535] (pgm16); raw_f32 takes its range from the
// sidecar.  Malformed headers, truncated payloads, and sidecar problems
// raise ParseError with a distinguishing kind.
Image load_image(const std::filesystem::path& path, ImageFormat format);

// Encodes an image.  Integer formats are strict: every pixel must already
// lie in [0, maxval] before rounding, otherwise RangeOverflowError (so a
// value of 255.4 refuses to save as pgm8 rather than clip).  raw_f32
// stores float32 samples plus the sidecar.  All writes are atomic
// (temp file + rename).
void save_image(const Image& img, const std::filesystem::path& path, ImageFormat format);

// Guesses the format from the file itself: .f32 extension -> RawF32,
// P5 magic -> Pgm8/Pgm16 by maxval.  Convenience for the CLI.
ImageFormat detect_format(const std::filesystem::path& path);

// Parses a format name used on command lines: pgm8 | pgm16 | raw_f32.
ImageFormat parse_format(const std::string& name);

// Writes contents to path atomically: a sibling temp file is written,
// flushed, and renamed over the destination.
void write_file_atomic(const std::filesystem::path& path, const std::string& contents);

// Reads a whole file into a string; IoError when unreadable.
std::string read_file(const std::filesystem::path& path);

}  // namespace texloss
