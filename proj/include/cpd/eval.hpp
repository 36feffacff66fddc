#pragma once

#include <cstdint>
#include <map>
#include <span>
#include <stdexcept>
#include <vector>

#include "cpd/geometry.hpp"

namespace cpd::eval {

/// Greedy matching under an integer pixel threshold theta.
struct MatchResult {
    struct Pair {
        int gt = 0;
        int pred = 0;
        double dist = 0.0;
    };
    std::vector<Pair> pairs;
    int tp = 0;
    int fp = 0;
    int fn = 0;
    int theta = 0;
};

/// Matches pairs with d <= theta by globally ascending distance (ties:
/// lower gt index, then lower pred index), each point used once.
MatchResult match_points(std::span<const Point2> gt, std::span<const Point2> pred, int theta);

class UndefinedMED : public std::runtime_error {
  public:
    UndefinedMED() : std::runtime_error("MED is undefined for an empty point set") {}
};

/// Mean over gt points of the distance to the nearest pred point.
double med(std::span<const Point2> gt, std::span<const Point2> pred);

struct Prf1 {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

/// precision = tp/(tp+fp), recall = tp/(tp+fn), f1 = 2PR/(P+R);
/// every 0/0 term is 0.
Prf1 prf1(long tp, long fp, long fn);

/// z x z counts, c(i, j) = items of true class i predicted as class j.
struct ConfusionMatrix {
    int z = 0;
    std::vector<long> counts; // row-major

    ConfusionMatrix() = default;
    explicit ConfusionMatrix(int z_) : z(z_), counts(static_cast<std::size_t>(z_) * z_, 0) {}

    long& at(int i, int j) { return counts[static_cast<std::size_t>(i) * z + j]; }
    long at(int i, int j) const { return counts[static_cast<std::size_t>(i) * z + j]; }
    long total() const;
};

/// Multi-class Matthews correlation coefficient; 0 when a denominator
/// factor vanishes.
double mcc(const ConfusionMatrix& cm);

/// Class balance accuracy: mean over classes of c_ii / max(row_i, col_i);
/// classes with empty row and column contribute 0.
double cba(const ConfusionMatrix& cm);

class WrongClassCount : public std::runtime_error {
  public:
    WrongClassCount() : std::runtime_error("SDS-Score requires exactly 3 classes") {}
};

/// Diagnosis-support score for class order (circular, elongated, other):
/// (c11 + c22 + c33 + c23 + c32) / total. Throws WrongClassCount if z != 3.
double sds(const ConfusionMatrix& cm);

using PointSets = std::map<std::uint64_t, std::vector<Point2>>;

struct SweepRow {
    int theta = 0;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

struct SweepResult {
    std::vector<SweepRow> rows;
    double med_mean = 0.0;   // mean of per-image MEDs where defined
    double med_std = 0.0;    // population std of the same
    int med_defined = 0;     // images with nonempty gt and pred
    int images = 0;
};

/// Micro-aggregated precision/recall/F1 for every theta in
/// [theta_lo, theta_hi], plus theta-independent MED statistics.
/// Requires detections for every ground-truth image; throws
/// std::invalid_argument listing missing ids otherwise.
SweepResult theta_sweep(const PointSets& gt, const PointSets& pred, int theta_lo, int theta_hi);

} // namespace cpd::eval
