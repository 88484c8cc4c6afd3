#include "bsafe/kernels.hpp"

namespace bsafe::kernels::scalar {

DrawStats draw_stats(std::span<const double> draws) {
  DrawStats st;
  for (double v : draws) {
    st.sum += v;
    st.negatives += v < 0.0 ? 1 : 0;
  }
  return st;
}

std::size_t count_negative(std::span<const double> values) {
  std::size_t n = 0;
  for (double v : values) n += v < 0.0 ? 1 : 0;
  return n;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

HalfplaneSums halfplane_sums(std::span<const double> x1, std::span<const double> x2, double a, double b, double c,
                             double tol, std::span<const double> col0, std::span<const double> col1,
                             std::span<const double> col2) {
  HalfplaneSums out;
  for (std::size_t i = 0; i < x1.size(); ++i) {
    const double s = (a * x1[i] + b * x2[i]) + c;
    if (s > tol) {
      out.s0 += col0[i];
      out.s1 += col1[i];
      out.s2 += col2[i];
    } else if (s >= -tol) {
      ++out.on_line;
    }
  }
  return out;
}

}  // namespace bsafe::kernels::scalar
