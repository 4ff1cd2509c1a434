#include "osl/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace osl {

double Box::diameter() const {
  double s = 0;
  for (int i = 0; i < dim(); ++i) s += width(i) * width(i);
  return std::sqrt(s);
}

bool Box::contains(const std::vector<double>& x) const {
  if (static_cast<int>(x.size()) != dim())
    throw std::invalid_argument("Box::contains: dimension mismatch");
  for (int i = 0; i < dim(); ++i)
    if (x[i] < lo[i] || x[i] > hi[i]) return false;
  return true;
}

std::vector<double> Box::center() const {
  std::vector<double> c(lo.size());
  for (int i = 0; i < dim(); ++i) c[i] = 0.5 * (lo[i] + hi[i]);
  return c;
}

BallInBox ball_in_box(const Ball& b, const Box& box) {
  if (b.dim() != box.dim())
    throw std::invalid_argument("ball_in_box: dimension mismatch");
  BallInBox r;
  r.margin = std::numeric_limits<double>::infinity();
  for (int i = 0; i < box.dim(); ++i) {
    double lo_margin = b.center[i] - b.radius - box.lo[i];
    double hi_margin = box.hi[i] - b.center[i] - b.radius;
    r.margin = std::min(r.margin, std::min(lo_margin, hi_margin));
  }
  r.inside = r.margin >= 0.0;
  return r;
}

Box inflate_box(const Box& box, double amount) {
  if (amount < 0) throw std::invalid_argument("inflate_box: negative amount");
  Box out = box;
  for (int i = 0; i < box.dim(); ++i) {
    out.lo[i] -= amount;
    out.hi[i] += amount;
  }
  return out;
}

bool box_in_box(const Box& inner, const Box& outer) {
  if (inner.dim() != outer.dim())
    throw std::invalid_argument("box_in_box: dimension mismatch");
  for (int i = 0; i < inner.dim(); ++i)
    if (inner.lo[i] < outer.lo[i] || inner.hi[i] > outer.hi[i]) return false;
  return true;
}

double distance(const std::vector<double>& a, const std::vector<double>& b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    double d = a[i] - b[i];
    s += d * d;
  }
  return std::sqrt(s);
}

double norm(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x * x;
  return std::sqrt(s);
}

}  // namespace osl
