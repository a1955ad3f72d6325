#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bernstein/errors.hpp"
#include "bernstein/hermite.hpp"

namespace bernstein {

/// Query region on R^d for probability computations.
///
///  - annulus:    R1 <= |x| < R2, centered at the origin (R2 may be +inf)
///  - ball:       |x - a| < sigma
///  - hypercube:  |x_j - a_j| < sigma for every j
///  - box:        lo_j <= x_j < hi_j
///  - full_space: R^d
///  - singleton:  {a}, a Lebesgue-null set that only carries point masses
///
/// Any region may be complemented; complements are integrated as
/// "full space minus region".
class Region {
 public:
  enum class Kind { annulus, ball, hypercube, box, full_space, singleton };

  static Region annulus(std::size_t d, double r1, double r2) {
    detail::require(d >= 1, "annulus: dimension must be >= 1");
    detail::require(r1 >= 0.0 && r1 < r2, "annulus: need 0 <= R1 < R2");
    Region r(Kind::annulus, d);
    r.r1_ = r1;
    r.r2_ = r2;
    r.center_.assign(d, 0.0);
    return r;
  }
  static Region ball(Point center, double radius) {
    detail::require(!center.empty(), "ball: dimension must be >= 1");
    detail::require(radius > 0.0, "ball: radius must be positive");
    Region r(Kind::ball, center.size());
    r.center_ = std::move(center);
    r.r2_ = radius;
    return r;
  }
  static Region hypercube(Point center, double half_width) {
    detail::require(!center.empty(), "hypercube: dimension must be >= 1");
    detail::require(half_width > 0.0, "hypercube: half-width must be positive");
    Region r(Kind::hypercube, center.size());
    r.center_ = std::move(center);
    r.r2_ = half_width;
    return r;
  }
  static Region box(Point lo, Point hi) {
    detail::require(!lo.empty() && lo.size() == hi.size(), "box: bounds dimension mismatch");
    for (std::size_t j = 0; j < lo.size(); ++j)
      detail::require(lo[j] < hi[j] && std::isfinite(lo[j]) && std::isfinite(hi[j]),
                      "box: need finite lo < hi on every axis");
    Region r(Kind::box, lo.size());
    r.lo_ = std::move(lo);
    r.hi_ = std::move(hi);
    return r;
  }
  static Region full_space(std::size_t d) {
    detail::require(d >= 1, "full_space: dimension must be >= 1");
    return Region(Kind::full_space, d);
  }
  static Region singleton(Point p) {
    detail::require(!p.empty(), "singleton: dimension must be >= 1");
    Region r(Kind::singleton, p.size());
    r.center_ = std::move(p);
    return r;
  }

  Region complement() const {
    Region r = *this;
    r.complement_ = !complement_;
    return r;
  }

  Kind kind() const { return kind_; }
  std::size_t dimension() const { return dim_; }
  bool is_complement() const { return complement_; }
  double inner_radius() const { return r1_; }
  /// Outer radius (annulus), radius (ball) or half-width (hypercube).
  double outer_radius() const { return r2_; }
  const Point& center() const { return center_; }
  const Point& lower() const { return lo_; }
  const Point& upper() const { return hi_; }

  /// Same region with the complement flag cleared.
  Region base() const {
    Region r = *this;
    r.complement_ = false;
    return r;
  }

  bool contains(std::span<const double> x) const {
    detail::require(x.size() == dim_, "Region::contains: dimension mismatch");
    return complement_ != contains_base(x);
  }

  /// Axis-aligned bounding box of a bounded base region.
  std::pair<Point, Point> bounding_box() const {
    Point lo(dim_), hi(dim_);
    for (std::size_t j = 0; j < dim_; ++j) {
      switch (kind_) {
        case Kind::box:
          lo[j] = lo_[j];
          hi[j] = hi_[j];
          break;
        case Kind::annulus:
        case Kind::ball:
        case Kind::hypercube:
        case Kind::singleton:
          lo[j] = center_[j] - r2_;
          hi[j] = center_[j] + r2_;
          break;
        case Kind::full_space:
          throw UnsupportedError("full space has no bounding box");
      }
    }
    return {lo, hi};
  }

  std::string describe() const {
    std::string s;
    switch (kind_) {
      case Kind::annulus: s = "annulus(" + std::to_string(r1_) + "," + std::to_string(r2_) + ")"; break;
      case Kind::ball: s = "ball(r=" + std::to_string(r2_) + ")"; break;
      case Kind::hypercube: s = "hypercube(h=" + std::to_string(r2_) + ")"; break;
      case Kind::box: s = "box"; break;
      case Kind::full_space: s = "full_space"; break;
      case Kind::singleton: s = "singleton"; break;
    }
    return complement_ ? "complement(" + s + ")" : s;
  }

 private:
  Region(Kind k, std::size_t d) : kind_(k), dim_(d) {}

  bool contains_base(std::span<const double> x) const {
    switch (kind_) {
      case Kind::annulus: {
        double r2 = 0.0;
        for (double v : x) r2 += v * v;
        const double r = std::sqrt(r2);
        return r >= r1_ && r < r2_;
      }
      case Kind::ball: {
        double r2 = 0.0;
        for (std::size_t j = 0; j < dim_; ++j) r2 += (x[j] - center_[j]) * (x[j] - center_[j]);
        return std::sqrt(r2) < r2_;
      }
      case Kind::hypercube:
        for (std::size_t j = 0; j < dim_; ++j)
          if (!(std::abs(x[j] - center_[j]) < r2_)) return false;
        return true;
      case Kind::box:
        for (std::size_t j = 0; j < dim_; ++j)
          if (!(x[j] >= lo_[j] && x[j] < hi_[j])) return false;
        return true;
      case Kind::full_space:
        return true;
      case Kind::singleton:
        for (std::size_t j = 0; j < dim_; ++j)
          if (x[j] != center_[j]) return false;
        return true;
    }
    return false;
  }

  Kind kind_;
  std::size_t dim_;
  bool complement_ = false;
  double r1_ = 0.0;
  double r2_ = 0.0;
  Point center_;
  Point lo_, hi_;
};

}  // namespace bernstein
