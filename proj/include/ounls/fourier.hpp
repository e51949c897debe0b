#pragma once

#include <cstddef>
#include <memory>
#include <span>
#include <vector>

#include "ounls/types.hpp"

namespace ounls {

/// Periodic box [−L, L)^d with n points per axis standing in for ℝ^d.
/// Points are flattened row-major (last axis fastest).
class BoxGrid {
 public:
  BoxGrid(int d, double half_length, int points_per_axis);

  int dim() const { return d_; }
  double half_length() const { return half_length_; }
  int points_per_axis() const { return n_; }
  std::size_t size() const;
  double spacing() const { return 2.0 * half_length_ / n_; }
  double cell_volume() const;

  /// Coordinate of index i on one axis: −L + i·h.
  double coordinate(int i) const { return -half_length_ + i * spacing(); }
  /// Wavenumber π·j/L for FFT-ordered index i (j = i for i < n/2, else i − n).
  /// The Nyquist index n/2 maps to −π·(n/2)/L.
  double wavenumber(int i) const;
  std::span<const double> wavenumbers() const { return wavenumbers_; }

  /// |x|² of flattened point index.
  double radius_squared(std::size_t flat) const;
  /// |k|² of flattened mode index.
  double wavenumber_squared(std::size_t flat) const;
  /// Axis indices of a flattened index.
  std::vector<int> unflatten(std::size_t flat) const;

 private:
  int d_;
  double half_length_;
  int n_;
  std::vector<double> wavenumbers_;
};

/// −|k|² per mode in FFT order; 0 at the zero mode.
std::vector<double> laplacian_symbol(const BoxGrid& grid);

/// 1 where every axis index satisfies |j| ≤ n/3 (the 2/3 rule), else 0.
std::vector<double> two_thirds_mask(const BoxGrid& grid);

/// Discrete L^q_x norm with measure h^d; q = +∞ gives the max modulus.
double x_norm(std::span<const cplx> slice, const BoxGrid& grid, double q);

/// Unitary multi-dimensional DFT over the x-axes of an array laid out as
/// [x-point][column], i.e. `columns` interleaved transforms with stride
/// `columns`. Plans are created once; execution is reentrant.
class XTransform {
 public:
  XTransform(const BoxGrid& grid, std::size_t columns);
  ~XTransform();
  XTransform(XTransform&&) noexcept;
  XTransform& operator=(XTransform&&) noexcept;
  XTransform(const XTransform&) = delete;
  XTransform& operator=(const XTransform&) = delete;

  std::size_t columns() const { return columns_; }
  void forward(std::span<cplx> data) const;
  void inverse(std::span<cplx> data) const;

 private:
  struct Plans;
  std::unique_ptr<Plans> plans_;
  std::size_t columns_ = 0;
  std::size_t points_ = 0;
  double scale_ = 1.0;
};

}  // namespace ounls
