#include "cpd/contour.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace cpd {
namespace {

// clockwise screen order (x right, y down): E SE S SW W NW N NE
constexpr int kDx[8] = {1, 1, 0, -1, -1, -1, 0, 1};
constexpr int kDy[8] = {0, 1, 1, 1, 0, -1, -1, -1};

struct Grid {
    int w, h;
    std::vector<int> label; // -1 = background

    int at(int x, int y) const { return label[static_cast<std::size_t>(y) * w + x]; }
};

// 8-connected component labels; returns (grid, sizes per label)
std::pair<Grid, std::vector<std::size_t>> label_components(const BinaryMask& mask) {
    Grid g{mask.width, mask.height,
           std::vector<int>(static_cast<std::size_t>(mask.width) * mask.height, -1)};
    std::vector<std::size_t> sizes;
    std::vector<std::pair<int, int>> stack;

    for (int y = 0; y < mask.height; ++y) {
        for (int x = 0; x < mask.width; ++x) {
            if (!mask.at(x, y) || g.at(x, y) >= 0) continue;
            int id = static_cast<int>(sizes.size());
            sizes.push_back(0);
            stack.push_back({x, y});
            g.label[static_cast<std::size_t>(y) * g.w + x] = id;
            while (!stack.empty()) {
                auto [cx, cy] = stack.back();
                stack.pop_back();
                ++sizes[static_cast<std::size_t>(id)];
                for (int d = 0; d < 8; ++d) {
                    int nx = cx + kDx[d], ny = cy + kDy[d];
                    if (nx < 0 || nx >= g.w || ny < 0 || ny >= g.h) continue;
                    if (!mask.at(nx, ny) || g.at(nx, ny) >= 0) continue;
                    g.label[static_cast<std::size_t>(ny) * g.w + nx] = id;
                    stack.push_back({nx, ny});
                }
            }
        }
    }
    return {std::move(g), std::move(sizes)};
}

int direction_between(int from_x, int from_y, int to_x, int to_y) {
    int dx = to_x - from_x, dy = to_y - from_y;
    for (int d = 0; d < 8; ++d)
        if (kDx[d] == dx && kDy[d] == dy) return d;
    throw std::logic_error("pixels are not 8-adjacent");
}

double signed_area(const std::vector<Point2>& pts) {
    double s = 0.0;
    for (std::size_t i = 0, j = pts.size() - 1; i < pts.size(); j = i++)
        s += cross(pts[j], pts[i]);
    return 0.5 * s;
}

// Moore-neighbour trace of one labelled component; returns integer
// pixel positions in boundary order starting at (sx, sy)
std::vector<std::pair<int, int>> moore_trace(const Grid& g, int id, int sx, int sy) {
    auto in_comp = [&](int x, int y) {
        return x >= 0 && x < g.w && y >= 0 && y < g.h && g.at(x, y) == id;
    };

    std::vector<std::pair<int, int>> pixels{{sx, sy}};
    int px = sx, py = sy;
    int backtrack = 4; // W of the topmost-leftmost pixel is background
    int first_move = -1;
    const std::size_t limit = 4 * static_cast<std::size_t>(g.w) * g.h + 16;

    while (pixels.size() < limit) {
        int found = -1, prev = backtrack;
        for (int step = 1; step <= 8; ++step) {
            int d = (backtrack + step) % 8;
            if (in_comp(px + kDx[d], py + kDy[d])) {
                found = d;
                break;
            }
            prev = d;
        }
        if (found < 0) break; // isolated pixel

        // Jacob's criterion: back at the start, about to repeat the
        // first move
        if (first_move >= 0 && px == sx && py == sy && found == first_move) break;
        if (first_move < 0) first_move = found;

        int bx = px + kDx[prev], by = py + kDy[prev]; // last background examined
        px += kDx[found];
        py += kDy[found];
        backtrack = direction_between(px, py, bx, by);
        pixels.push_back({px, py});
    }
    if (pixels.size() >= limit) throw std::logic_error("moore trace failed to close");
    // the final arrival at the start precedes the termination check
    if (pixels.size() > 1 && pixels.back() == pixels.front()) pixels.pop_back();
    return pixels;
}

Contour contour_from_component(const Grid& g, int id, int sx, int sy) {
    auto pixels = moore_trace(g, id, sx, sy);
    std::vector<Point2> pts;
    pts.reserve(pixels.size());
    for (auto [x, y] : pixels) pts.push_back({x + 0.5, y + 0.5});

    // canonical CCW: positive shoelace area, start point preserved
    if (signed_area(pts) < 0.0) {
        std::reverse(pts.begin() + 1, pts.end());
    }
    return Contour{std::move(pts)};
}

double wrap_angle(double a) {
    double r = std::remainder(a, 2.0 * std::numbers::pi);
    if (r <= -std::numbers::pi) r += 2.0 * std::numbers::pi;
    return r;
}

// open-polyline RDP on [first, last] of pts, appending the kept
// interior indices (endpoints excluded) to out
void rdp_interior(const std::vector<Point2>& pts, std::size_t first, std::size_t last,
                  double epsilon, std::vector<std::size_t>& out) {
    if (last <= first + 1) return;

    double max_d = -1.0;
    std::size_t split = first;
    for (std::size_t i = first + 1; i < last; ++i) {
        double d = dist_point_segment(pts[i], pts[first], pts[last]);
        if (d > max_d) {
            max_d = d;
            split = i;
        }
    }
    if (max_d > epsilon) {
        rdp_interior(pts, first, split, epsilon, out);
        out.push_back(split);
        rdp_interior(pts, split, last, epsilon, out);
    }
}

} // namespace

Contour trace_contour(const BinaryMask& mask) {
    auto [grid, sizes] = label_components(mask);
    if (sizes.empty()) throw EmptyMask();

    int best = 0;
    for (int i = 1; i < static_cast<int>(sizes.size()); ++i)
        if (sizes[static_cast<std::size_t>(i)] > sizes[static_cast<std::size_t>(best)]) best = i;
    if (sizes[static_cast<std::size_t>(best)] < 4) throw TinyObject();

    for (int y = 0; y < grid.h; ++y)
        for (int x = 0; x < grid.w; ++x)
            if (grid.at(x, y) == best) return contour_from_component(grid, best, x, y);
    throw EmptyMask(); // unreachable
}

std::vector<Contour> trace_all_contours(const BinaryMask& mask, int min_pixels) {
    auto [grid, sizes] = label_components(mask);
    std::vector<Contour> result;
    std::vector<bool> done(sizes.size(), false);
    for (int y = 0; y < grid.h; ++y) {
        for (int x = 0; x < grid.w; ++x) {
            int id = grid.at(x, y);
            if (id < 0 || done[static_cast<std::size_t>(id)]) continue;
            done[static_cast<std::size_t>(id)] = true;
            if (sizes[static_cast<std::size_t>(id)] >= static_cast<std::size_t>(min_pixels))
                result.push_back(contour_from_component(grid, id, x, y));
        }
    }
    return result;
}

Contour simplify_rdp(const Contour& c, double epsilon) {
    if (epsilon < 0.0) throw std::invalid_argument("epsilon must be >= 0");
    const auto& pts = c.points;
    const std::size_t n = pts.size();
    if (n < 3) return c;

    // split the ring at the two mutually farthest points
    std::size_t i0 = 0, j0 = 1;
    double best = -1.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            double d = distance_sq(pts[i], pts[j]);
            if (d > best) {
                best = d;
                i0 = i;
                j0 = j;
            }
        }
    }

    // arcs i0..j0 and j0..i0 (wrapped), each simplified as an open line
    std::vector<Point2> rolled;
    rolled.reserve(n + 1);
    for (std::size_t i = 0; i <= n; ++i) rolled.push_back(pts[(i0 + i) % n]);
    std::size_t split = j0 >= i0 ? j0 - i0 : j0 + n - i0;

    std::vector<std::size_t> kept;
    kept.push_back(0);
    rdp_interior(rolled, 0, split, epsilon, kept);
    kept.push_back(split);
    rdp_interior(rolled, split, n, epsilon, kept); // rolled[n] == rolled[0]

    Contour out;
    out.points.reserve(kept.size());
    for (std::size_t idx : kept) out.points.push_back(rolled[idx]);
    return out;
}

Contour denoise_contour(const Contour& c, double epsilon) {
    if (epsilon <= 0.0) return c;
    Contour simplified = simplify_rdp(c, epsilon);
    const auto& ring = simplified.points;
    const std::size_t m = ring.size();
    if (m < 3) return c;

    Contour out;
    out.points.reserve(c.points.size());
    for (Point2 p : c.points) {
        Point2 best_q = ring[0];
        double best_d = std::numeric_limits<double>::infinity();
        for (std::size_t i = 0, j = m - 1; i < m; j = i++) {
            Point2 a = ring[j], b = ring[i];
            Point2 ab = b - a;
            double len2 = dot(ab, ab);
            double t = len2 == 0.0 ? 0.0 : std::clamp(dot(p - a, ab) / len2, 0.0, 1.0);
            Point2 q = a + t * ab;
            double d = distance_sq(p, q);
            if (d < best_d) {
                best_d = d;
                best_q = q;
            }
        }
        out.points.push_back(best_q);
    }
    return out;
}

double k_slope(const Contour& c, int i, int k) {
    const int n = c.size();
    if (k < 1 || 2 * k >= n) throw std::invalid_argument("k must satisfy 1 <= k < n/2");
    Point2 d = c.at_wrapped(i) - c.at_wrapped(i - k);
    double a = std::atan2(d.y, d.x);
    return a == -std::numbers::pi ? std::numbers::pi : a;
}

CurvatureProfile k_curvature(const Contour& c, int k) {
    const int n = c.size();
    if (k < 1 || 2 * k >= n) throw std::invalid_argument("k must satisfy 1 <= k < n/2");

    std::vector<double> forward(static_cast<std::size_t>(n)); // angle of chord i -> i+k
    for (int i = 0; i < n; ++i) {
        Point2 d = c.at_wrapped(i + k) - c.at_wrapped(i);
        forward[static_cast<std::size_t>(i)] = std::atan2(d.y, d.x);
    }

    CurvatureProfile profile;
    profile.k = k;
    profile.values.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
        double behind = forward[static_cast<std::size_t>(((i - k) % n + n) % n)];
        profile.values[static_cast<std::size_t>(i)] =
            wrap_angle(forward[static_cast<std::size_t>(i)] - behind);
    }
    return profile;
}

} // namespace cpd
