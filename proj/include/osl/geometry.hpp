#pragma once

#include <cstddef>
#include <vector>

namespace osl {

// Axis-aligned box, lo[i] <= hi[i] for every axis.
struct Box {
  std::vector<double> lo;
  std::vector<double> hi;

  int dim() const { return static_cast<int>(lo.size()); }
  double width(int i) const { return hi[i] - lo[i]; }
  double diameter() const;  // Euclidean diagonal length
  bool contains(const std::vector<double>& x) const;
  std::vector<double> center() const;
};

// Euclidean ball.
struct Ball {
  std::vector<double> center;
  double radius = 0.0;

  int dim() const { return static_cast<int>(center.size()); }
};

struct BallInBox {
  bool inside = false;
  // min over axes of min(center_i - r - lo_i, hi_i - center_i - r);
  // negative when the ball pokes out of the box.
  double margin = 0.0;
};

// Throws std::invalid_argument on dimension mismatch.
BallInBox ball_in_box(const Ball& b, const Box& box);

// Box grown by amount on every side (amount >= 0).
Box inflate_box(const Box& box, double amount);

// True if inner is contained in outer.
bool box_in_box(const Box& inner, const Box& outer);

double distance(const std::vector<double>& a, const std::vector<double>& b);
double norm(const std::vector<double>& v);

}  // namespace osl
