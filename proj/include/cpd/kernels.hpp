#pragma once

#include <cstdint>

#include "cpd/geometry.hpp"

namespace cpd::kernels {

/// Implicit form of one ellipse, precomputed for batch evaluation.
struct EllipseCoeffs {
    double cx, cy;
    double cos_phi, sin_phi;
    double inv_a2, inv_b2;
};

EllipseCoeffs make_coeffs(const Ellipse& e);

// accum[i] |= (lambda(x0 + i, py) <= 1), i in [0, n)
using InsideRowFn = void (*)(const EllipseCoeffs&, double py, double x0, int n, std::uint8_t* accum);
// out[i] = lambda(xs[i], ys[i])
using EvalBatchFn = void (*)(const EllipseCoeffs&, const double* xs, const double* ys, int n, double* out);

void inside_row_scalar(const EllipseCoeffs&, double py, double x0, int n, std::uint8_t* accum);
void eval_batch_scalar(const EllipseCoeffs&, const double* xs, const double* ys, int n, double* out);

#if defined(CPD_HAVE_AVX2)
void inside_row_avx2(const EllipseCoeffs&, double py, double x0, int n, std::uint8_t* accum);
void eval_batch_avx2(const EllipseCoeffs&, const double* xs, const double* ys, int n, double* out);
#endif

/// Runtime-selected variants. The SIMD paths use the same operation order
/// as the scalar ones and are bit-identical to them (enforced by tests);
/// CPD_FORCE_SCALAR=1 in the environment pins the scalar path.
InsideRowFn inside_row();
EvalBatchFn eval_batch();

/// Name of the selected backend: "avx2" or "scalar".
const char* active_backend();

} // namespace cpd::kernels
