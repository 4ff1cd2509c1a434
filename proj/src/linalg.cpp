#include "osl/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace osl {

std::vector<double> symmetric_part(const std::vector<double>& A, int n) {
  std::vector<double> S(static_cast<std::size_t>(n) * n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      S[i * n + j] = 0.5 * (A[i * n + j] + A[j * n + i]);
  return S;
}

std::vector<double> gram(const std::vector<double>& A, int n) {
  std::vector<double> G(static_cast<std::size_t>(n) * n, 0.0);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      double s = 0;
      for (int k = 0; k < n; ++k) s += A[k * n + i] * A[k * n + j];
      G[i * n + j] = s;
    }
  return G;
}

namespace {

std::vector<double> eig_2x2(const std::vector<double>& S) {
  double a = S[0], b = S[1], d = S[3];
  double mean = 0.5 * (a + d);
  double disc = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return {mean - disc, mean + disc};
}

// Closed form via the characteristic polynomial (trigonometric method).
std::vector<double> eig_3x3(const std::vector<double>& S) {
  double a11 = S[0], a12 = S[1], a13 = S[2];
  double a22 = S[4], a23 = S[5], a33 = S[8];
  double p1 = a12 * a12 + a13 * a13 + a23 * a23;
  if (p1 == 0.0) {
    std::vector<double> e = {a11, a22, a33};
    std::sort(e.begin(), e.end());
    return e;
  }
  double q = (a11 + a22 + a33) / 3.0;
  double p2 = (a11 - q) * (a11 - q) + (a22 - q) * (a22 - q) +
              (a33 - q) * (a33 - q) + 2.0 * p1;
  double p = std::sqrt(p2 / 6.0);
  // B = (S - q I) / p
  double b11 = (a11 - q) / p, b22 = (a22 - q) / p, b33 = (a33 - q) / p;
  double b12 = a12 / p, b13 = a13 / p, b23 = a23 / p;
  double detB = b11 * (b22 * b33 - b23 * b23) - b12 * (b12 * b33 - b23 * b13) +
                b13 * (b12 * b23 - b22 * b13);
  double r = std::clamp(0.5 * detB, -1.0, 1.0);
  double phi = std::acos(r) / 3.0;
  double e1 = q + 2.0 * p * std::cos(phi);
  double e3 = q + 2.0 * p * std::cos(phi + 2.0 * M_PI / 3.0);
  double e2 = 3.0 * q - e1 - e3;
  std::vector<double> e = {e1, e2, e3};
  std::sort(e.begin(), e.end());
  return e;
}

// Cyclic Jacobi; S is destroyed.
std::vector<double> eig_jacobi(std::vector<double>& S, int n) {
  auto off2 = [&]() {
    double s = 0;
    for (int i = 0; i < n; ++i)
      for (int j = i + 1; j < n; ++j) s += S[i * n + j] * S[i * n + j];
    return s;
  };
  double scale = 0;
  for (double v : S) scale = std::max(scale, std::fabs(v));
  if (scale == 0) return std::vector<double>(n, 0.0);
  const double tol = 1e-30 * scale * scale;
  for (int sweep = 0; sweep < 100 && off2() > tol; ++sweep) {
    for (int p = 0; p < n - 1; ++p)
      for (int q = p + 1; q < n; ++q) {
        double apq = S[p * n + q];
        if (std::fabs(apq) < 1e-300) continue;
        double app = S[p * n + p], aqq = S[q * n + q];
        double theta = 0.5 * (aqq - app) / apq;
        double t = (theta >= 0 ? 1.0 : -1.0) /
                   (std::fabs(theta) + std::sqrt(theta * theta + 1.0));
        double c = 1.0 / std::sqrt(t * t + 1.0);
        double s = t * c;
        for (int k = 0; k < n; ++k) {
          double skp = S[k * n + p], skq = S[k * n + q];
          S[k * n + p] = c * skp - s * skq;
          S[k * n + q] = s * skp + c * skq;
        }
        for (int k = 0; k < n; ++k) {
          double spk = S[p * n + k], sqk = S[q * n + k];
          S[p * n + k] = c * spk - s * sqk;
          S[q * n + k] = s * spk + c * sqk;
        }
      }
  }
  std::vector<double> e(n);
  for (int i = 0; i < n; ++i) e[i] = S[i * n + i];
  std::sort(e.begin(), e.end());
  return e;
}

}  // namespace

std::vector<double> sym_eigenvalues(std::vector<double> S, int n) {
  if (n < 1 || static_cast<int>(S.size()) != n * n)
    throw std::invalid_argument("sym_eigenvalues: bad dimensions");
  if (n == 1) return {S[0]};
  if (n == 2) return eig_2x2(S);
  if (n == 3) return eig_3x3(S);
  return eig_jacobi(S, n);
}

double max_sym_eigenvalue(const std::vector<double>& S, int n) {
  return sym_eigenvalues(S, n).back();
}

double spectral_norm(const std::vector<double>& A, int n) {
  if (n < 1 || static_cast<int>(A.size()) != n * n)
    throw std::invalid_argument("spectral_norm: bad dimensions");
  std::vector<double> G = gram(A, n);
  // deterministic start with components in every direction
  std::vector<double> v(n);
  for (int i = 0; i < n; ++i) v[i] = 1.0 + 0.1 * i;
  double lambda = 0.0;
  for (int iter = 0; iter < 500; ++iter) {
    std::vector<double> w(n, 0.0);
    for (int i = 0; i < n; ++i)
      for (int j = 0; j < n; ++j) w[i] += G[i * n + j] * v[j];
    double nw = 0;
    for (double x : w) nw += x * x;
    nw = std::sqrt(nw);
    if (nw == 0.0) return 0.0;  // A^T A v = 0 with generic v: A is zero on it
    for (int i = 0; i < n; ++i) w[i] /= nw;
    double next = 0.0;
    for (int i = 0; i < n; ++i) {
      double gi = 0;
      for (int j = 0; j < n; ++j) gi += G[i * n + j] * w[j];
      next += w[i] * gi;
    }
    v = std::move(w);
    if (iter > 4 && std::fabs(next - lambda) <= 1e-15 * std::max(1.0, next)) {
      lambda = next;
      break;
    }
    lambda = next;
  }
  return std::sqrt(std::max(0.0, lambda));
}

}  // namespace osl
