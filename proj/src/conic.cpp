#include <algorithm>
#include <array>
#include <cmath>

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include "cpd/geometry.hpp"

// Ellipse-ellipse intersection. Both ellipses are converted to implicit
// conic form; eliminating y via the resultant of the two quadratics-in-y
// gives a degree-4 polynomial in x whose real roots are the candidate
// abscissae. Roots come from companion-matrix eigenvalues, candidates are
// completed by back-substitution and polished with damped 2D Newton on
// the pair of ellipse residuals, which delivers the tol guarantee.

namespace cpd {
namespace {

// a x^2 + b xy + c y^2 + d x + e y + f = 0
struct Conic {
    double a, b, c, d, e, f;
};

Conic conic_from_ellipse(const Ellipse& el) {
    double cp = std::cos(el.phi), sp = std::sin(el.phi);
    double ia2 = 1.0 / (el.a * el.a), ib2 = 1.0 / (el.b * el.b);
    double A = cp * cp * ia2 + sp * sp * ib2;
    double B = 2.0 * cp * sp * (ia2 - ib2);
    double C = sp * sp * ia2 + cp * cp * ib2;
    double cx = el.center.x, cy = el.center.y;
    return Conic{A,
                 B,
                 C,
                 -2.0 * A * cx - B * cy,
                 -B * cx - 2.0 * C * cy,
                 A * cx * cx + B * cx * cy + C * cy * cy - 1.0};
}

// dense polynomial with fixed capacity, coeffs[i] on x^i
template <int N>
struct Poly {
    std::array<double, N> c{};

    double operator[](int i) const { return c[static_cast<std::size_t>(i)]; }
    double& operator[](int i) { return c[static_cast<std::size_t>(i)]; }
};

template <int N, int M>
Poly<N + M - 1> mul(const Poly<N>& p, const Poly<M>& q) {
    Poly<N + M - 1> r;
    for (int i = 0; i < N; ++i)
        for (int j = 0; j < M; ++j) r[i + j] += p[i] * q[j];
    return r;
}

template <int N>
Poly<N> sub(const Poly<N>& p, const Poly<N>& q) {
    Poly<N> r;
    for (int i = 0; i < N; ++i) r[i] = p[i] - q[i];
    return r;
}

template <int N>
Poly<N> scale(const Poly<N>& p, double s) {
    Poly<N> r;
    for (int i = 0; i < N; ++i) r[i] = p[i] * s;
    return r;
}

// Res_y of two quadratics in y with polynomial-in-x coefficients:
// (p2 q0 - p0 q2)^2 - (p2 q1 - p1 q2)(p1 q0 - p0 q1)
Poly<5> resultant_x(const Conic& c1, const Conic& c2) {
    Poly<2> p1{{c1.e, c1.b}}, q1{{c2.e, c2.b}};
    Poly<3> p0{{c1.f, c1.d, c1.a}}, q0{{c2.f, c2.d, c2.a}};
    double p2 = c1.c, q2 = c2.c;

    Poly<3> u = sub(scale(q0, p2), scale(p0, q2));
    Poly<2> v = sub(scale(q1, p2), scale(p1, q2));
    Poly<4> w = sub(mul(p1, q0), mul(p0, q1));
    return sub(mul(u, u), mul(v, w));
}

std::vector<double> real_candidate_roots(const Poly<5>& p) {
    double max_abs = 0.0;
    for (int i = 0; i < 5; ++i) max_abs = std::max(max_abs, std::abs(p[i]));
    if (max_abs == 0.0) return {};

    int deg = 4;
    while (deg > 0 && std::abs(p[deg]) <= 1e-13 * max_abs) --deg;
    if (deg == 0) return {};

    Eigen::MatrixXd companion = Eigen::MatrixXd::Zero(deg, deg);
    for (int i = 1; i < deg; ++i) companion(i, i - 1) = 1.0;
    for (int i = 0; i < deg; ++i) companion(i, deg - 1) = -p[i] / p[deg];

    Eigen::EigenSolver<Eigen::MatrixXd> solver(companion, /*computeEigenvectors=*/false);
    std::vector<double> roots;
    for (int i = 0; i < deg; ++i) {
        auto ev = solver.eigenvalues()[i];
        // near-real complex pairs are kept as candidates; Newton either
        // pulls them onto a true intersection or they fail the residual
        if (std::abs(ev.imag()) <= 1e-3 * (1.0 + std::abs(ev.real())))
            roots.push_back(ev.real());
    }
    return roots;
}

// y-roots of one conic at fixed x, with a small tolerance for
// slightly negative discriminants near tangency
void append_y_candidates(const Conic& c, double x, std::vector<Point2>& out) {
    double qa = c.c;
    double qb = c.b * x + c.e;
    double qc = (c.a * x + c.d) * x + c.f;
    double disc = qb * qb - 4.0 * qa * qc;
    double tol = 1e-9 * std::max({qb * qb, std::abs(4.0 * qa * qc), 1.0});
    if (disc < -tol) return;
    double root = std::sqrt(std::max(disc, 0.0));
    out.push_back({x, (-qb + root) / (2.0 * qa)});
    out.push_back({x, (-qb - root) / (2.0 * qa)});
}

struct EvalGrad {
    double val;
    Point2 grad;
};

EvalGrad eval_with_gradient(const Ellipse& e, Point2 p) {
    double dx = p.x - e.center.x, dy = p.y - e.center.y;
    double c = std::cos(e.phi), s = std::sin(e.phi);
    double u = dx * c + dy * s;
    double v = dx * s - dy * c;
    double ia2 = 1.0 / (e.a * e.a), ib2 = 1.0 / (e.b * e.b);
    return {u * u * ia2 + v * v * ib2,
            {2.0 * (u * c * ia2 + v * s * ib2), 2.0 * (u * s * ia2 - v * c * ib2)}};
}

// Damped Newton on (lambda1 - 1, lambda2 - 1); returns the final
// max-abs residual.
double newton_polish(const Ellipse& e1, const Ellipse& e2, Point2& p) {
    double resid = std::numeric_limits<double>::infinity();
    for (int iter = 0; iter < 60; ++iter) {
        EvalGrad g1 = eval_with_gradient(e1, p);
        EvalGrad g2 = eval_with_gradient(e2, p);
        double f1 = g1.val - 1.0, f2 = g2.val - 1.0;
        resid = std::max(std::abs(f1), std::abs(f2));
        if (resid < 1e-14) break;

        double det = cross(g1.grad, g2.grad);
        double dx, dy;
        if (std::abs(det) > 1e-14) {
            dx = (-f1 * g2.grad.y + f2 * g1.grad.y) / det;
            dy = (-g1.grad.x * f2 + g2.grad.x * f1) / det;
        } else {
            // near-tangent: Levenberg step on J^T J + mu I
            double a11 = g1.grad.x * g1.grad.x + g2.grad.x * g2.grad.x;
            double a12 = g1.grad.x * g1.grad.y + g2.grad.x * g2.grad.y;
            double a22 = g1.grad.y * g1.grad.y + g2.grad.y * g2.grad.y;
            double mu = 1e-8 * (a11 + a22) + 1e-300;
            double b1 = -(g1.grad.x * f1 + g2.grad.x * f2);
            double b2 = -(g1.grad.y * f1 + g2.grad.y * f2);
            double d2 = (a11 + mu) * (a22 + mu) - a12 * a12;
            dx = (b1 * (a22 + mu) - a12 * b2) / d2;
            dy = ((a11 + mu) * b2 - a12 * b1) / d2;
        }
        double step = std::hypot(dx, dy);
        double cap = 0.5 * std::min(e1.b, e2.b);
        if (step > cap) {
            dx *= cap / step;
            dy *= cap / step;
        }
        p.x += dx;
        p.y += dy;
    }
    return resid;
}

void check_not_identical(const Conic& c1, const Conic& c2, double tol) {
    std::array<double, 6> v1{c1.a, c1.b, c1.c, c1.d, c1.e, c1.f};
    std::array<double, 6> v2{c2.a, c2.b, c2.c, c2.d, c2.e, c2.f};
    auto normalize = [](std::array<double, 6>& v) {
        double n = 0.0;
        for (double x : v) n += x * x;
        n = std::sqrt(n);
        // quadratic part of an ellipse conic is positive definite, so
        // v[0] > 0 fixes the sign
        double sgn = v[0] < 0.0 ? -1.0 : 1.0;
        for (double& x : v) x *= sgn / n;
    };
    normalize(v1);
    normalize(v2);
    double diff = 0.0;
    for (int i = 0; i < 6; ++i) diff = std::max(diff, std::abs(v1[i] - v2[i]));
    if (diff <= std::max(tol, 1e-12)) throw DegenerateConics();
}

} // namespace

std::vector<Point2> ellipse_pair_intersections(const Ellipse& e1, const Ellipse& e2, double tol) {
    if (tol < 0.0) throw std::invalid_argument("tol must be >= 0");
    check_not_identical(conic_from_ellipse(e1), conic_from_ellipse(e2), tol);

    // solve in a translated/scaled frame for conditioning
    Point2 mid = 0.5 * (e1.center + e2.center);
    double scale_len = std::max({e1.a, e2.a, 1.0});
    auto normalized = [&](const Ellipse& e) {
        return Ellipse{{(e.center.x - mid.x) / scale_len, (e.center.y - mid.y) / scale_len},
                       e.a / scale_len,
                       e.b / scale_len,
                       e.phi};
    };
    Ellipse n1 = normalized(e1), n2 = normalized(e2);
    Conic c1 = conic_from_ellipse(n1), c2 = conic_from_ellipse(n2);

    std::vector<Point2> candidates;
    for (double x : real_candidate_roots(resultant_x(c1, c2))) {
        append_y_candidates(c1, x, candidates);
        append_y_candidates(c2, x, candidates);
    }

    std::vector<Point2> accepted;
    for (Point2 cand : candidates) {
        Point2 p{mid.x + cand.x * scale_len, mid.y + cand.y * scale_len};
        double resid = newton_polish(e1, e2, p);
        if (resid > tol) continue;
        bool duplicate = false;
        for (Point2 q : accepted) {
            if (distance(p, q) <= std::max(tol, 1e-12)) {
                duplicate = true;
                break;
            }
        }
        if (!duplicate) accepted.push_back(p);
    }

    std::sort(accepted.begin(), accepted.end(),
              [](Point2 a, Point2 b) { return a.x != b.x ? a.x < b.x : a.y < b.y; });
    return accepted;
}

} // namespace cpd
