#include <immintrin.h>

#include "bsafe/kernels.hpp"

namespace bsafe::kernels::avx2 {

namespace {

constexpr std::size_t kLanes = 4;

double hsum(__m256d v) {
  alignas(32) double lanes[kLanes];
  _mm256_store_pd(lanes, v);
  return (lanes[0] + lanes[1]) + (lanes[2] + lanes[3]);
}

}  // namespace

DrawStats draw_stats(std::span<const double> draws) {
  const std::size_t n = draws.size();
  const std::size_t rounds = n / kLanes;
  const double* p = draws.data();
  const __m256d zero = _mm256_setzero_pd();
  __m256d acc = _mm256_setzero_pd();
  std::size_t neg = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    const __m256d v = _mm256_loadu_pd(p + r * kLanes);
    acc = _mm256_add_pd(acc, v);
    neg += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(_mm256_cmp_pd(v, zero, _CMP_LT_OQ))));
  }
  DrawStats st{hsum(acc), neg};
  for (std::size_t i = rounds * kLanes; i < n; ++i) {
    st.sum += p[i];
    st.negatives += p[i] < 0.0 ? 1 : 0;
  }
  return st;
}

std::size_t count_negative(std::span<const double> values) {
  const std::size_t n = values.size();
  const std::size_t rounds = n / kLanes;
  const double* p = values.data();
  const __m256d zero = _mm256_setzero_pd();
  std::size_t neg = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    const __m256d v = _mm256_loadu_pd(p + r * kLanes);
    neg += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(_mm256_cmp_pd(v, zero, _CMP_LT_OQ))));
  }
  for (std::size_t i = rounds * kLanes; i < n; ++i) neg += p[i] < 0.0 ? 1 : 0;
  return neg;
}

double dot(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  const std::size_t rounds = n / kLanes;
  __m256d acc = _mm256_setzero_pd();
  for (std::size_t r = 0; r < rounds; ++r)
    acc = _mm256_fmadd_pd(_mm256_loadu_pd(a.data() + r * kLanes), _mm256_loadu_pd(b.data() + r * kLanes), acc);
  double s = hsum(acc);
  for (std::size_t i = rounds * kLanes; i < n; ++i) s += a[i] * b[i];
  return s;
}

HalfplaneSums halfplane_sums(std::span<const double> x1, std::span<const double> x2, double a, double b, double c,
                             double tol, std::span<const double> col0, std::span<const double> col1,
                             std::span<const double> col2) {
  const std::size_t n = x1.size();
  const std::size_t rounds = n / kLanes;
  const __m256d va = _mm256_set1_pd(a);
  const __m256d vb = _mm256_set1_pd(b);
  const __m256d vc = _mm256_set1_pd(c);
  const __m256d vtol = _mm256_set1_pd(tol);
  const __m256d vntol = _mm256_set1_pd(-tol);
  __m256d acc0 = _mm256_setzero_pd();
  __m256d acc1 = _mm256_setzero_pd();
  __m256d acc2 = _mm256_setzero_pd();
  std::size_t on_line = 0;
  for (std::size_t r = 0; r < rounds; ++r) {
    const std::size_t off = r * kLanes;
    // same operation order as the scalar kernel: (a*x1 + b*x2) + c, no fusion
    const __m256d s = _mm256_add_pd(
        _mm256_add_pd(_mm256_mul_pd(va, _mm256_loadu_pd(x1.data() + off)), _mm256_mul_pd(vb, _mm256_loadu_pd(x2.data() + off))),
        vc);
    const __m256d pos = _mm256_cmp_pd(s, vtol, _CMP_GT_OQ);
    const __m256d ge = _mm256_cmp_pd(s, vntol, _CMP_GE_OQ);
    const __m256d on = _mm256_andnot_pd(pos, ge);
    on_line += static_cast<std::size_t>(__builtin_popcount(_mm256_movemask_pd(on)));
    acc0 = _mm256_add_pd(acc0, _mm256_and_pd(pos, _mm256_loadu_pd(col0.data() + off)));
    acc1 = _mm256_add_pd(acc1, _mm256_and_pd(pos, _mm256_loadu_pd(col1.data() + off)));
    acc2 = _mm256_add_pd(acc2, _mm256_and_pd(pos, _mm256_loadu_pd(col2.data() + off)));
  }
  HalfplaneSums out{hsum(acc0), hsum(acc1), hsum(acc2), on_line};
  for (std::size_t i = rounds * kLanes; i < n; ++i) {
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

}  // namespace bsafe::kernels::avx2
