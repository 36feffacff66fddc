#include "cpd/eval.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace cpd::eval {

MatchResult match_points(std::span<const Point2> gt, std::span<const Point2> pred, int theta) {
    if (theta < 1) throw std::invalid_argument("theta must be >= 1");

    struct Candidate {
        double dist;
        int gt, pred;
    };
    std::vector<Candidate> candidates;
    for (int i = 0; i < static_cast<int>(gt.size()); ++i) {
        for (int j = 0; j < static_cast<int>(pred.size()); ++j) {
            double d = distance(gt[static_cast<std::size_t>(i)], pred[static_cast<std::size_t>(j)]);
            if (d <= static_cast<double>(theta)) candidates.push_back({d, i, j});
        }
    }
    std::sort(candidates.begin(), candidates.end(), [](const Candidate& a, const Candidate& b) {
        if (a.dist != b.dist) return a.dist < b.dist;
        if (a.gt != b.gt) return a.gt < b.gt;
        return a.pred < b.pred;
    });

    MatchResult result;
    result.theta = theta;
    std::vector<bool> gt_used(gt.size(), false), pred_used(pred.size(), false);
    for (const Candidate& c : candidates) {
        if (gt_used[static_cast<std::size_t>(c.gt)] || pred_used[static_cast<std::size_t>(c.pred)])
            continue;
        gt_used[static_cast<std::size_t>(c.gt)] = true;
        pred_used[static_cast<std::size_t>(c.pred)] = true;
        result.pairs.push_back({c.gt, c.pred, c.dist});
    }
    result.tp = static_cast<int>(result.pairs.size());
    result.fp = static_cast<int>(pred.size()) - result.tp;
    result.fn = static_cast<int>(gt.size()) - result.tp;
    return result;
}

double med(std::span<const Point2> gt, std::span<const Point2> pred) {
    if (gt.empty() || pred.empty()) throw UndefinedMED();
    double sum = 0.0;
    for (Point2 g : gt) {
        double best = std::numeric_limits<double>::infinity();
        for (Point2 p : pred) best = std::min(best, distance(g, p));
        sum += best;
    }
    return sum / static_cast<double>(gt.size());
}

Prf1 prf1(long tp, long fp, long fn) {
    if (tp + fp + fn <= 0) throw std::invalid_argument("tp + fp + fn must be > 0");
    auto ratio = [](long num, long den) {
        return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
    };
    Prf1 r;
    r.precision = ratio(tp, tp + fp);
    r.recall = ratio(tp, tp + fn);
    double pr = r.precision + r.recall;
    r.f1 = pr == 0.0 ? 0.0 : 2.0 * r.precision * r.recall / pr;
    return r;
}

long ConfusionMatrix::total() const {
    long t = 0;
    for (long v : counts) t += v;
    return t;
}

double mcc(const ConfusionMatrix& cm) {
    const int z = cm.z;
    double s = static_cast<double>(cm.total());
    if (s == 0.0) throw std::invalid_argument("confusion matrix is empty");

    double correct = 0.0;
    std::vector<double> row(static_cast<std::size_t>(z), 0.0), col(static_cast<std::size_t>(z), 0.0);
    for (int i = 0; i < z; ++i) {
        correct += static_cast<double>(cm.at(i, i));
        for (int j = 0; j < z; ++j) {
            row[static_cast<std::size_t>(i)] += static_cast<double>(cm.at(i, j));
            col[static_cast<std::size_t>(j)] += static_cast<double>(cm.at(i, j));
        }
    }
    double cov = correct * s;
    double row_sq = 0.0, col_sq = 0.0;
    for (int i = 0; i < z; ++i) {
        cov -= row[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i)];
        row_sq += row[static_cast<std::size_t>(i)] * row[static_cast<std::size_t>(i)];
        col_sq += col[static_cast<std::size_t>(i)] * col[static_cast<std::size_t>(i)];
    }
    double den = std::sqrt(s * s - row_sq) * std::sqrt(s * s - col_sq);
    return den == 0.0 ? 0.0 : cov / den;
}

double cba(const ConfusionMatrix& cm) {
    const int z = cm.z;
    if (z == 0) throw std::invalid_argument("confusion matrix is empty");
    double sum = 0.0;
    for (int i = 0; i < z; ++i) {
        long row = 0, col = 0;
        for (int j = 0; j < z; ++j) {
            row += cm.at(i, j);
            col += cm.at(j, i);
        }
        long den = std::max(row, col);
        if (den > 0) sum += static_cast<double>(cm.at(i, i)) / static_cast<double>(den);
    }
    return sum / static_cast<double>(z);
}

double sds(const ConfusionMatrix& cm) {
    if (cm.z != 3) throw WrongClassCount();
    long total = cm.total();
    if (total <= 0) throw std::invalid_argument("confusion matrix is empty");
    // elongated <-> other confusions (classes 2 and 3) are not mistakes
    long good = cm.at(0, 0) + cm.at(1, 1) + cm.at(2, 2) + cm.at(1, 2) + cm.at(2, 1);
    return static_cast<double>(good) / static_cast<double>(total);
}

SweepResult theta_sweep(const PointSets& gt, const PointSets& pred, int theta_lo, int theta_hi) {
    if (theta_lo < 1 || theta_lo > theta_hi)
        throw std::invalid_argument("theta range must satisfy 1 <= lo <= hi");

    std::string missing;
    for (const auto& [id, points] : gt)
        if (pred.find(id) == pred.end()) missing += (missing.empty() ? "" : ", ") + std::to_string(id);
    if (!missing.empty())
        throw std::invalid_argument("detections missing for image ids: " + missing);

    SweepResult result;
    result.images = static_cast<int>(gt.size());

    // per-image MED, independent of theta
    double med_sum = 0.0, med_sq_sum = 0.0;
    for (const auto& [id, g] : gt) {
        const auto& p = pred.at(id);
        if (g.empty() || p.empty()) continue;
        double m = med(g, p);
        med_sum += m;
        med_sq_sum += m * m;
        ++result.med_defined;
    }
    if (result.med_defined > 0) {
        result.med_mean = med_sum / result.med_defined;
        double var = med_sq_sum / result.med_defined - result.med_mean * result.med_mean;
        result.med_std = std::sqrt(std::max(var, 0.0));
    }

    for (int theta = theta_lo; theta <= theta_hi; ++theta) {
        long tp = 0, fp = 0, fn = 0;
        for (const auto& [id, g] : gt) {
            MatchResult m = match_points(g, pred.at(id), theta);
            tp += m.tp;
            fp += m.fp;
            fn += m.fn;
        }
        Prf1 scores = tp + fp + fn > 0 ? prf1(tp, fp, fn) : Prf1{};
        result.rows.push_back({theta, scores.precision, scores.recall, scores.f1});
    }
    return result;
}

} // namespace cpd::eval
