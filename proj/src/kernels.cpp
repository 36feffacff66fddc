#include "cpd/kernels.hpp"

#include <cmath>
#include <cstdlib>

namespace cpd::kernels {

EllipseCoeffs make_coeffs(const Ellipse& e) {
    return {e.center.x,        e.center.y,         std::cos(e.phi),
            std::sin(e.phi),   1.0 / (e.a * e.a),  1.0 / (e.b * e.b)};
}

void inside_row_scalar(const EllipseCoeffs& e, double py, double x0, int n, std::uint8_t* accum) {
    const double dy = py - e.cy;
    for (int i = 0; i < n; ++i) {
        double dx = (x0 + static_cast<double>(i)) - e.cx;
        double u = (dx * e.cos_phi) + (dy * e.sin_phi);
        double v = (dx * e.sin_phi) - (dy * e.cos_phi);
        double val = ((u * u) * e.inv_a2) + ((v * v) * e.inv_b2);
        if (val <= 1.0) accum[i] = 1;
    }
}

void eval_batch_scalar(const EllipseCoeffs& e, const double* xs, const double* ys, int n,
                       double* out) {
    for (int i = 0; i < n; ++i) {
        double dx = xs[i] - e.cx;
        double dy = ys[i] - e.cy;
        double u = (dx * e.cos_phi) + (dy * e.sin_phi);
        double v = (dx * e.sin_phi) - (dy * e.cos_phi);
        out[i] = ((u * u) * e.inv_a2) + ((v * v) * e.inv_b2);
    }
}

namespace {

bool avx2_selected() {
#if defined(CPD_HAVE_AVX2)
    static const bool selected = [] {
        if (std::getenv("CPD_FORCE_SCALAR") != nullptr) return false;
        return __builtin_cpu_supports("avx2") != 0;
    }();
    return selected;
#else
    return false;
#endif
}

} // namespace

InsideRowFn inside_row() {
#if defined(CPD_HAVE_AVX2)
    if (avx2_selected()) return &inside_row_avx2;
#endif
    return &inside_row_scalar;
}

EvalBatchFn eval_batch() {
#if defined(CPD_HAVE_AVX2)
    if (avx2_selected()) return &eval_batch_avx2;
#endif
    return &eval_batch_scalar;
}

const char* active_backend() { return avx2_selected() ? "avx2" : "scalar"; }

} // namespace cpd::kernels
