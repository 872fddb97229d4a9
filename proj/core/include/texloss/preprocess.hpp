#pragma once

#include "texloss/image.hpp"

namespace texloss {

// Clamps intensities to [center - width/2, center + width/2] and then maps
// that window affinely onto target.  The result's value range is exactly
// target; values at or beyond a window edge land exactly on the matching
// target endpoint.
Image hu_window_normalize(const Image& img, const HuWindow& win, const Interval& target);

// Bilinear resampling with corner alignment: source corners map onto
// output corners, interior samples interpolate the four neighbours.
// A same-size resize returns a bit-identical copy.
Image resize_bilinear(const Image& img, int out_w, int out_h);

}  // namespace texloss
