#include "ounls/fourier.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <mutex>
#include <string>

#include <fftw3.h>

namespace ounls {

namespace {

// Planner calls are not thread-safe in FFTW.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

fftw_complex* as_fftw(cplx* p) { return reinterpret_cast<fftw_complex*>(p); }

}  // namespace

BoxGrid::BoxGrid(int d, double half_length, int points_per_axis)
    : d_(d), half_length_(half_length), n_(points_per_axis) {
  if (d < 1 || d > 2) {
    throw std::invalid_argument("BoxGrid: dimension must be 1 or 2, got " + std::to_string(d));
  }
  if (!(half_length > 0.0) || !std::isfinite(half_length)) {
    throw std::invalid_argument("BoxGrid: half length must be positive and finite");
  }
  if (points_per_axis < 2 || (points_per_axis & (points_per_axis - 1)) != 0) {
    throw std::invalid_argument("BoxGrid: points per axis must be a power of two, got " +
                                std::to_string(points_per_axis));
  }
  wavenumbers_.resize(n_);
  for (int i = 0; i < n_; ++i) wavenumbers_[i] = wavenumber(i);
}

std::size_t BoxGrid::size() const {
  std::size_t s = 1;
  for (int a = 0; a < d_; ++a) s *= static_cast<std::size_t>(n_);
  return s;
}

double BoxGrid::cell_volume() const { return std::pow(spacing(), d_); }

double BoxGrid::wavenumber(int i) const {
  const int j = i < n_ / 2 ? i : i - n_;
  return kPi * j / half_length_;
}

std::vector<int> BoxGrid::unflatten(std::size_t flat) const {
  std::vector<int> idx(d_);
  for (int a = d_ - 1; a >= 0; --a) {
    idx[a] = static_cast<int>(flat % n_);
    flat /= n_;
  }
  return idx;
}

double BoxGrid::radius_squared(std::size_t flat) const {
  double r2 = 0.0;
  for (int a = d_ - 1; a >= 0; --a) {
    const double x = coordinate(static_cast<int>(flat % n_));
    r2 += x * x;
    flat /= n_;
  }
  return r2;
}

double BoxGrid::wavenumber_squared(std::size_t flat) const {
  double k2 = 0.0;
  for (int a = d_ - 1; a >= 0; --a) {
    const double k = wavenumbers_[flat % n_];
    k2 += k * k;
    flat /= n_;
  }
  return k2;
}

std::vector<double> laplacian_symbol(const BoxGrid& grid) {
  std::vector<double> sym(grid.size());
  for (std::size_t i = 0; i < sym.size(); ++i) sym[i] = -grid.wavenumber_squared(i);
  return sym;
}

std::vector<double> two_thirds_mask(const BoxGrid& grid) {
  const int n = grid.points_per_axis();
  const int cutoff = n / 3;
  std::vector<double> mask(grid.size(), 1.0);
  for (std::size_t i = 0; i < mask.size(); ++i) {
    for (int idx : grid.unflatten(i)) {
      const int j = idx < n / 2 ? idx : idx - n;
      if (std::abs(j) > cutoff) {
        mask[i] = 0.0;
        break;
      }
    }
  }
  return mask;
}

double x_norm(std::span<const cplx> slice, const BoxGrid& grid, double q) {
  if (slice.size() != grid.size()) {
    throw std::invalid_argument("x_norm: slice size does not match grid");
  }
  if (std::isinf(q) && q > 0) {
    double m = 0.0;
    for (const auto& v : slice) m = std::max(m, std::abs(v));
    return m;
  }
  if (!(q >= 1.0)) {
    throw std::invalid_argument("x_norm: exponent must be >= 1, got " + std::to_string(q));
  }
  double s = 0.0;
  for (const auto& v : slice) s += std::pow(std::abs(v), q);
  return std::pow(s * grid.cell_volume(), 1.0 / q);
}

struct XTransform::Plans {
  fftw_plan forward = nullptr;
  fftw_plan inverse = nullptr;
};

XTransform::XTransform(const BoxGrid& grid, std::size_t columns)
    : plans_(std::make_unique<Plans>()), columns_(columns), points_(grid.size()) {
  std::vector<int> dims(grid.dim(), grid.points_per_axis());
  std::vector<cplx> scratch(points_ * columns_);
  const int howmany = static_cast<int>(columns_);
  const int stride = static_cast<int>(columns_);
  {
    std::lock_guard lock(planner_mutex());
    // ESTIMATE keeps plan choice, and therefore roundoff, reproducible.
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    plans_->forward = fftw_plan_many_dft(grid.dim(), dims.data(), howmany,
                                         as_fftw(scratch.data()), nullptr, stride, 1,
                                         as_fftw(scratch.data()), nullptr, stride, 1,
                                         FFTW_FORWARD, flags);
    plans_->inverse = fftw_plan_many_dft(grid.dim(), dims.data(), howmany,
                                         as_fftw(scratch.data()), nullptr, stride, 1,
                                         as_fftw(scratch.data()), nullptr, stride, 1,
                                         FFTW_BACKWARD, flags);
  }
  if (!plans_->forward || !plans_->inverse) {
    throw std::runtime_error("XTransform: FFTW planning failed");
  }
  scale_ = 1.0 / std::sqrt(static_cast<double>(points_));
}

XTransform::~XTransform() {
  if (!plans_) return;
  std::lock_guard lock(planner_mutex());
  if (plans_->forward) fftw_destroy_plan(plans_->forward);
  if (plans_->inverse) fftw_destroy_plan(plans_->inverse);
}

XTransform::XTransform(XTransform&&) noexcept = default;
XTransform& XTransform::operator=(XTransform&&) noexcept = default;

void XTransform::forward(std::span<cplx> data) const {
  if (data.size() != points_ * columns_) {
    throw std::invalid_argument("XTransform: buffer size mismatch");
  }
  fftw_execute_dft(plans_->forward, as_fftw(data.data()), as_fftw(data.data()));
  for (auto& v : data) v *= scale_;
}

void XTransform::inverse(std::span<cplx> data) const {
  if (data.size() != points_ * columns_) {
    throw std::invalid_argument("XTransform: buffer size mismatch");
  }
  fftw_execute_dft(plans_->inverse, as_fftw(data.data()), as_fftw(data.data()));
  for (auto& v : data) v *= scale_;
}

}  // namespace ounls
