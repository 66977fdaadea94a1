#ifndef SPECGRID_CANNY_HPP
#define SPECGRID_CANNY_HPP

#include "specgrid/image.hpp"

namespace specgrid {

struct CannyResult {
  BinaryMask edges;  // thin edges after hysteresis
  GrayImage gx;      // Sobel response of the smoothed image
  GrayImage gy;
};

/// Gaussian 5x5 (sigma 1.4) smoothing, Sobel gradients, non-maximum
/// suppression and hysteresis with thresholds on the Sobel magnitude.
/// Borders are handled by edge replication; the outermost pixel ring never
/// carries an edge.
CannyResult canny(const GrayImage& gray, double low, double high);

}  // namespace specgrid

#endif  // SPECGRID_CANNY_HPP
