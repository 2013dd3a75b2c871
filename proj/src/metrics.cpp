#include "aad/metrics.hpp"

#include <algorithm>
#include <numeric>

namespace aad {

void ConfusionCounts::add(int predicted, int actual) {
    if (predicted == 1)
        (actual == 1 ? tp : fp)++;
    else
        (actual == 0 ? tn : fn)++;
}

Metrics compute_metrics(const ConfusionCounts& c) {
    if (c.total() == 0) throw ParamError("metrics: empty evaluation");
    Metrics m;
    m.acc = static_cast<double>(c.tp + c.tn) / static_cast<double>(c.total());
    if (c.tp + c.fp > 0)
        m.pre = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fp);
    else
        m.pre_undefined = true;
    if (c.tp + c.fn > 0)
        m.sen = static_cast<double>(c.tp) / static_cast<double>(c.tp + c.fn);
    else
        m.sen_undefined = true;
    if (c.tn + c.fp > 0)
        m.spe = static_cast<double>(c.tn) / static_cast<double>(c.tn + c.fp);
    else
        m.spe_undefined = true;
    if (m.pre + m.sen > 0.0)
        m.f1 = 2.0 * m.pre * m.sen / (m.pre + m.sen);
    else
        m.f1_undefined = true;
    return m;
}

RocCurve roc(const Vector& scores, const std::vector<int>& labels) {
    const Eigen::Index n = scores.size();
    if (static_cast<Eigen::Index>(labels.size()) != n) throw ShapeError("roc: size mismatch");
    long n_pos = 0, n_neg = 0;
    for (int y : labels) {
        if (y != 0 && y != 1) throw ParamError("roc: labels must be 0 or 1");
        (y == 1 ? n_pos : n_neg)++;
    }
    if (n_pos == 0 || n_neg == 0) throw ParamError("roc: both classes required");

    std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
        return scores[a] > scores[b];
    });

    RocCurve curve;
    curve.points.push_back({0.0, 0.0});
    long tp = 0, fp = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        const double threshold = scores[order[i]];
        while (i < order.size() && scores[order[i]] == threshold) {
            (labels[static_cast<std::size_t>(order[i])] == 1 ? tp : fp)++;
            ++i;
        }
        curve.points.push_back({static_cast<double>(fp) / static_cast<double>(n_neg),
                                static_cast<double>(tp) / static_cast<double>(n_pos)});
    }
    double auc = 0.0;
    for (std::size_t j = 1; j < curve.points.size(); ++j)
        auc += (curve.points[j].fpr - curve.points[j - 1].fpr) *
               (curve.points[j].tpr + curve.points[j - 1].tpr) * 0.5;
    curve.auc = auc;
    return curve;
}

}  // namespace aad
