#include "cpd/kernels.hpp"

#include <immintrin.h>

// AVX2 variants of the ellipse evaluation kernels. Operation order
// matches the scalar reference exactly (mul/add, no FMA), so results
// are bit-identical lane for lane.

namespace cpd::kernels {

void inside_row_avx2(const EllipseCoeffs& e, double py, double x0, int n, std::uint8_t* accum) {
    const double dy_s = py - e.cy;
    const __m256d dy = _mm256_set1_pd(dy_s);
    const __m256d cx = _mm256_set1_pd(e.cx);
    const __m256d x0v = _mm256_set1_pd(x0);
    const __m256d cp = _mm256_set1_pd(e.cos_phi);
    const __m256d sp = _mm256_set1_pd(e.sin_phi);
    const __m256d ia2 = _mm256_set1_pd(e.inv_a2);
    const __m256d ib2 = _mm256_set1_pd(e.inv_b2);
    const __m256d one = _mm256_set1_pd(1.0);

    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d idx = _mm256_set_pd(static_cast<double>(i + 3), static_cast<double>(i + 2),
                                    static_cast<double>(i + 1), static_cast<double>(i));
        __m256d dx = _mm256_sub_pd(_mm256_add_pd(x0v, idx), cx);
        __m256d u = _mm256_add_pd(_mm256_mul_pd(dx, cp), _mm256_mul_pd(dy, sp));
        __m256d v = _mm256_sub_pd(_mm256_mul_pd(dx, sp), _mm256_mul_pd(dy, cp));
        __m256d val = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(u, u), ia2),
                                    _mm256_mul_pd(_mm256_mul_pd(v, v), ib2));
        int mask = _mm256_movemask_pd(_mm256_cmp_pd(val, one, _CMP_LE_OQ));
        if (mask & 1) accum[i] = 1;
        if (mask & 2) accum[i + 1] = 1;
        if (mask & 4) accum[i + 2] = 1;
        if (mask & 8) accum[i + 3] = 1;
    }
    for (; i < n; ++i) {
        double dx = (x0 + static_cast<double>(i)) - e.cx;
        double u = (dx * e.cos_phi) + (dy_s * e.sin_phi);
        double v = (dx * e.sin_phi) - (dy_s * e.cos_phi);
        double val = ((u * u) * e.inv_a2) + ((v * v) * e.inv_b2);
        if (val <= 1.0) accum[i] = 1;
    }
}

void eval_batch_avx2(const EllipseCoeffs& e, const double* xs, const double* ys, int n,
                     double* out) {
    const __m256d cx = _mm256_set1_pd(e.cx);
    const __m256d cy = _mm256_set1_pd(e.cy);
    const __m256d cp = _mm256_set1_pd(e.cos_phi);
    const __m256d sp = _mm256_set1_pd(e.sin_phi);
    const __m256d ia2 = _mm256_set1_pd(e.inv_a2);
    const __m256d ib2 = _mm256_set1_pd(e.inv_b2);

    int i = 0;
    for (; i + 4 <= n; i += 4) {
        __m256d dx = _mm256_sub_pd(_mm256_loadu_pd(xs + i), cx);
        __m256d dy = _mm256_sub_pd(_mm256_loadu_pd(ys + i), cy);
        __m256d u = _mm256_add_pd(_mm256_mul_pd(dx, cp), _mm256_mul_pd(dy, sp));
        __m256d v = _mm256_sub_pd(_mm256_mul_pd(dx, sp), _mm256_mul_pd(dy, cp));
        __m256d val = _mm256_add_pd(_mm256_mul_pd(_mm256_mul_pd(u, u), ia2),
                                    _mm256_mul_pd(_mm256_mul_pd(v, v), ib2));
        _mm256_storeu_pd(out + i, val);
    }
    for (; i < n; ++i) {
        double dx = xs[i] - e.cx;
        double dy = ys[i] - e.cy;
        double u = (dx * e.cos_phi) + (dy * e.sin_phi);
        double v = (dx * e.sin_phi) - (dy * e.cos_phi);
        out[i] = ((u * u) * e.inv_a2) + ((v * v) * e.inv_b2);
    }
}

} // namespace cpd::kernels
