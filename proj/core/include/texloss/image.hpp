#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "texloss/error.hpp"

namespace texloss {

// Closed value interval [lo, hi] with lo < hi.
struct Interval {
  double lo;
  double hi;

  Interval(double lo_, double hi_) : lo(lo_), hi(hi_) {
    if (!(std::isfinite(lo) && std::isfinite(hi)) || !(lo < hi)) {
      throw InvalidArgumentError("interval requires finite lo < hi");
    }
  }

  double width() const { return hi - lo; }
  bool contains(double v) const { return v >= lo && v <= hi; }
  bool operator==(const Interval& o) const { return lo == o.lo && hi == o.hi; }
};

// Radiodensity window given as center/width, e.g. center -500, width 1400.
struct HuWindow {
  double center;
  double width;

  HuWindow(double center_, double width_) : center(center_), width(width_) {
    if (!(std::isfinite(center) && std::isfinite(width)) || !(width > 0)) {
      throw InvalidArgumentError("window width must be positive and finite");
    }
  }

  double lo() const { return center - width / 2.0; }
  double hi() const { return center + width / 2.0; }
};

// 2-D grayscale image: row-major doubles plus the value range they live in.
// Immutable after construction; transforms build new images.  Pixel (u, v)
// addresses column u, row v, stored at index v * width + u.
class Image {
 public:
  Image(int width, int height, std::vector<double> data, Interval range)
      : width_(width), height_(height), range_(range), data_(std::move(data)) {
    if (width_ <= 0 || height_ <= 0) {
      throw InvalidArgumentError("image dimensions must be positive");
    }
    if (data_.size() != static_cast<size_t>(width_) * height_) {
      throw InvalidArgumentError("pixel buffer size does not match width*height");
    }
    for (double v : data_) {
      if (!std::isfinite(v)) {
        throw InvalidArgumentError("image contains a non-finite pixel");
      }
      if (!range_.contains(v)) {
        throw InvalidArgumentError("pixel value " + std::to_string(v) +
                                   " outside declared range [" + std::to_string(range_.lo) +
                                   ", " + std::to_string(range_.hi) + "]");
      }
    }
  }

  static Image constant(int width, int height, double value, Interval range) {
    return Image(width, height,
                 std::vector<double>(static_cast<size_t>(width) * height, value), range);
  }

  int width() const { return width_; }
  int height() const { return height_; }
  size_t pixel_count() const { return data_.size(); }
  Interval value_range() const { return range_; }

  double at(int u, int v) const { return data_[static_cast<size_t>(v) * width_ + u]; }
  const std::vector<double>& data() const { return data_; }

  bool same_shape(const Image& o) const {
    return width_ == o.width_ && height_ == o.height_;
  }

 private:
  int width_;
  int height_;
  Interval range_;
  std::vector<double> data_;
};

}  // namespace texloss
