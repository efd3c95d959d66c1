// AVX2 variants of the inner-loop kernels. Compiled with -mavx2 in its own
// translation unit; only reached through the runtime dispatch table.
#if defined(__x86_64__) || defined(_M_X64)

#include <immintrin.h>

#include <cmath>
#include <cstdint>

#include "seqinv/kernels.hpp"

namespace seqinv::kernels {
namespace {

inline __m256d abs_pd(__m256d x) {
  const __m256d sign = _mm256_set1_pd(-0.0);
  return _mm256_andnot_pd(sign, x);
}

// Four independent Neumaier accumulators, reduced in fixed lane order.
struct Accum4 {
  __m256d sum = _mm256_setzero_pd();
  __m256d comp = _mm256_setzero_pd();

  void add(__m256d x) {
    const __m256d t = _mm256_add_pd(sum, x);
    const __m256d ge = _mm256_cmp_pd(abs_pd(sum), abs_pd(x), _CMP_GE_OQ);
    const __m256d big = _mm256_add_pd(_mm256_sub_pd(sum, t), x);
    const __m256d small = _mm256_add_pd(_mm256_sub_pd(x, t), sum);
    comp = _mm256_add_pd(comp, _mm256_blendv_pd(small, big, ge));
    sum = t;
  }

  // Scalar continuation so vector body and tail share one accumulator.
  double scalar_sum[2] = {0.0, 0.0};  // (sum, comp)
  void add_scalar(double x) {
    const double t = scalar_sum[0] + x;
    if (std::abs(scalar_sum[0]) >= std::abs(x)) {
      scalar_sum[1] += (scalar_sum[0] - t) + x;
    } else {
      scalar_sum[1] += (x - t) + scalar_sum[0];
    }
    scalar_sum[0] = t;
  }

  double value() const {
    alignas(32) double s[4];
    alignas(32) double c[4];
    _mm256_store_pd(s, sum);
    _mm256_store_pd(c, comp);
    double total = scalar_sum[0] + scalar_sum[1];
    for (int lane = 0; lane < 4; ++lane) total += s[lane] + c[lane];
    return total;
  }
};

void posterior_moments_avx2(std::span<const double> y,
                            std::span<const double> k,
                            std::span<const double> lambda,
                            std::span<const double> sigma2, double eps2,
                            std::span<double> mean, std::span<double> var) {
  const std::size_t n = y.size();
  const __m256d e2 = _mm256_set1_pd(eps2);
  const __m256d one = _mm256_set1_pd(1.0);
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d yv = _mm256_loadu_pd(&y[i]);
    const __m256d kv = _mm256_loadu_pd(&k[i]);
    const __m256d lv = _mm256_loadu_pd(&lambda[i]);
    const __m256d s2v = _mm256_loadu_pd(&sigma2[i]);
    const __m256d lk2 = _mm256_mul_pd(lv, _mm256_mul_pd(kv, kv));
    const __m256d e2s2 = _mm256_mul_pd(e2, s2v);
    const __m256d r = _mm256_div_pd(e2s2, lk2);
    const __m256d m =
        _mm256_div_pd(_mm256_div_pd(yv, kv), _mm256_add_pd(one, r));
    const __m256d v =
        _mm256_div_pd(lv, _mm256_add_pd(one, _mm256_div_pd(one, r)));
    _mm256_storeu_pd(&mean[i], m);
    _mm256_storeu_pd(&var[i], v);
  }
  for (; i < n; ++i) {
    const double lk2 = lambda[i] * k[i] * k[i];
    const double r = eps2 * sigma2[i] / lk2;
    mean[i] = (y[i] / k[i]) / (1.0 + r);
    var[i] = lambda[i] / (1.0 + 1.0 / r);
  }
}

RiskTerms risk_terms_avx2(std::span<const double> mu0,
                          std::span<const double> k,
                          std::span<const double> lambda,
                          std::span<const double> sigma2, double eps2) {
  const std::size_t n = mu0.size();
  const __m256d e2 = _mm256_set1_pd(eps2);
  const __m256d one = _mm256_set1_pd(1.0);
  const __m256d inf = _mm256_set1_pd(HUGE_VAL);
  Accum4 s1, s2, s3;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d mv = _mm256_loadu_pd(&mu0[i]);
    const __m256d kv = _mm256_loadu_pd(&k[i]);
    const __m256d lv = _mm256_loadu_pd(&lambda[i]);
    const __m256d s2v = _mm256_loadu_pd(&sigma2[i]);
    const __m256d k2 = _mm256_mul_pd(kv, kv);
    const __m256d lk2 = _mm256_mul_pd(lv, k2);
    const __m256d e2s2 = _mm256_mul_pd(e2, s2v);
    const __m256d r = _mm256_div_pd(e2s2, lk2);
    const __m256d onepr = _mm256_add_pd(one, r);
    const __m256d shrink = _mm256_div_pd(one, onepr);
    const __m256d c_raw = _mm256_div_pd(r, onepr);
    const __m256d is_inf = _mm256_cmp_pd(r, inf, _CMP_EQ_OQ);
    const __m256d c = _mm256_blendv_pd(c_raw, one, is_inf);
    s1.add(_mm256_mul_pd(_mm256_mul_pd(shrink, shrink),
                         _mm256_div_pd(e2s2, k2)));
    s2.add(_mm256_mul_pd(_mm256_mul_pd(mv, mv), _mm256_mul_pd(c, c)));
    s3.add(_mm256_mul_pd(lv, c));
  }
  for (; i < n; ++i) {
    const double lk2 = lambda[i] * k[i] * k[i];
    const double e2s2 = eps2 * sigma2[i];
    const double r = e2s2 / lk2;
    const double shrink = 1.0 / (1.0 + r);
    const double c = std::isinf(r) ? 1.0 : r / (1.0 + r);
    s1.add_scalar(shrink * shrink * (e2s2 / (k[i] * k[i])));
    s2.add_scalar(mu0[i] * mu0[i] * c * c);
    s3.add_scalar(lambda[i] * c);
  }
  return {s1.value(), s2.value(), s3.value()};
}

double l2_risk_avx2(std::span<const double> mean, std::span<const double> var,
                    std::span<const double> mu0) {
  const std::size_t n = mean.size();
  Accum4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d d =
        _mm256_sub_pd(_mm256_loadu_pd(&mean[i]), _mm256_loadu_pd(&mu0[i]));
    acc.add(_mm256_fmadd_pd(d, d, _mm256_loadu_pd(&var[i])));
  }
  for (; i < n; ++i) {
    const double d = mean[i] - mu0[i];
    acc.add_scalar(var[i] + d * d);
  }
  return acc.value();
}

// The log part accumulates the product of the d_i per lane, pulling the
// exponent out into an integer accumulator each step so the running
// mantissa product stays in [0.5, 2); a single scalar log per lane at the
// end recovers sum(log d_i) without a vectorised log.
MarginalTerms marginal_terms_avx2(std::span<const double> y2,
                                  std::span<const double> g,
                                  std::span<const double> sigma2, double eps2,
                                  double tau) {
  const std::size_t n = y2.size();
  const __m256d e2 = _mm256_set1_pd(eps2);
  const __m256d tv = _mm256_set1_pd(tau);
  const __m256i exp_mask = _mm256_set1_epi64x(0x7FF0000000000000ll);
  const __m256i exp_one = _mm256_set1_epi64x(0x3FF0000000000000ll);
  const __m256i bias = _mm256_set1_epi64x(1023);
  Accum4 ratio;
  __m256d prod = _mm256_set1_pd(1.0);
  __m256i expacc = _mm256_setzero_si256();
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(&g[i]);
    const __m256d s2v = _mm256_loadu_pd(&sigma2[i]);
    const __m256d d = _mm256_fmadd_pd(gv, tv, _mm256_mul_pd(e2, s2v));
    ratio.add(_mm256_div_pd(_mm256_loadu_pd(&y2[i]), d));
    prod = _mm256_mul_pd(prod, d);
    const __m256i bits = _mm256_castpd_si256(prod);
    const __m256i e =
        _mm256_srli_epi64(_mm256_and_si256(bits, exp_mask), 52);
    expacc = _mm256_add_epi64(expacc, _mm256_sub_epi64(e, bias));
    prod = _mm256_castsi256_pd(
        _mm256_or_si256(_mm256_andnot_si256(exp_mask, bits), exp_one));
  }
  alignas(32) double mant[4];
  alignas(32) std::int64_t exps[4];
  _mm256_store_pd(mant, prod);
  _mm256_store_si256(reinterpret_cast<__m256i*>(exps), expacc);
  double log_sum = 0.0;
  std::int64_t exp_total = 0;
  for (int lane = 0; lane < 4; ++lane) {
    log_sum += std::log(mant[lane]);
    exp_total += exps[lane];
  }
  log_sum += static_cast<double>(exp_total) * 0.69314718055994530942;
  for (; i < n; ++i) {
    const double d = g[i] * tau + eps2 * sigma2[i];
    ratio.add_scalar(y2[i] / d);
    log_sum += std::log(d);
  }
  return {ratio.value(), log_sum};
}

GradientTerms gradient_terms_avx2(std::span<const double> y2,
                                  std::span<const double> g,
                                  std::span<const double> sigma2, double eps2,
                                  double tau) {
  const std::size_t n = y2.size();
  const __m256d e2 = _mm256_set1_pd(eps2);
  const __m256d tv = _mm256_set1_pd(tau);
  Accum4 data, trace;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d gv = _mm256_loadu_pd(&g[i]);
    const __m256d s2v = _mm256_loadu_pd(&sigma2[i]);
    const __m256d d = _mm256_fmadd_pd(gv, tv, _mm256_mul_pd(e2, s2v));
    data.add(_mm256_div_pd(_mm256_mul_pd(_mm256_loadu_pd(&y2[i]), gv),
                           _mm256_mul_pd(d, d)));
    trace.add(_mm256_div_pd(gv, d));
  }
  for (; i < n; ++i) {
    const double d = g[i] * tau + eps2 * sigma2[i];
    data.add_scalar(y2[i] * g[i] / (d * d));
    trace.add_scalar(g[i] / d);
  }
  return {data.value(), trace.value()};
}

double dot_avx2(std::span<const double> a, std::span<const double> b) {
  const std::size_t n = a.size();
  Accum4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(&a[i]), _mm256_loadu_pd(&b[i])));
  }
  for (; i < n; ++i) acc.add_scalar(a[i] * b[i]);
  return acc.value();
}

double weighted_dot_sq_avx2(std::span<const double> w,
                            std::span<const double> b) {
  const std::size_t n = w.size();
  Accum4 acc;
  std::size_t i = 0;
  for (; i + 4 <= n; i += 4) {
    const __m256d bv = _mm256_loadu_pd(&b[i]);
    acc.add(_mm256_mul_pd(_mm256_loadu_pd(&w[i]), _mm256_mul_pd(bv, bv)));
  }
  for (; i < n; ++i) acc.add_scalar(w[i] * b[i] * b[i]);
  return acc.value();
}

}  // namespace

const Ops avx2_ops = {
    posterior_moments_avx2, risk_terms_avx2,    l2_risk_avx2,
    marginal_terms_avx2,    gradient_terms_avx2, dot_avx2,
    weighted_dot_sq_avx2,   "avx2",
};

}  // namespace seqinv::kernels

#endif  // x86_64
