#include "drowsy/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace drowsy {

double binary_auc(const std::vector<double>& scores, const std::vector<bool>& labels) {
    require(scores.size() == labels.size(), "binary_auc: scores/labels length mismatch");
    std::size_t n_pos = 0;
    for (bool l : labels) n_pos += l ? 1 : 0;
    const std::size_t n_neg = labels.size() - n_pos;
    require(n_pos > 0 && n_neg > 0,
            "binary_auc: undefined, labels contain a single class (", n_pos, " positives of ",
            labels.size(), ")");

    // Tie-averaged ranks give the Mann-Whitney statistic exactly.
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return scores[a] < scores[b]; });

    double pos_rank_sum = 0;
    std::size_t i = 0;
    while (i < order.size()) {
        std::size_t j = i;
        while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
        const double avg_rank = (double(i + 1) + double(j)) / 2.0; // 1-based
        for (std::size_t k = i; k < j; ++k)
            if (labels[order[k]]) pos_rank_sum += avg_rank;
        i = j;
    }
    const double p = double(n_pos), n = double(n_neg);
    return (pos_rank_sum - p * (p + 1.0) / 2.0) / (p * n);
}

double macro_auc(const Tensor& scores, const std::vector<int>& labels) {
    require(scores.ndim() == 2 && scores.dim(1) == kNumClasses, "macro_auc: expected [N, 3] scores");
    require(scores.dim(0) == labels.size(), "macro_auc: scores/labels length mismatch");

    std::array<std::size_t, kNumClasses> support{};
    for (int l : labels) {
        require(l >= 0 && l < kNumClasses, "macro_auc: label out of range");
        ++support[std::size_t(l)];
    }
    for (int k = 0; k < kNumClasses; ++k)
        require(support[k] > 0, "macro_auc: class ", merged_label_name(MergedLabel(k)),
                " missing from labels");

    double sum = 0;
    for (int k = 0; k < kNumClasses; ++k) {
        std::vector<double> s(labels.size());
        std::vector<bool> pos(labels.size());
        for (std::size_t r = 0; r < labels.size(); ++r) {
            s[r] = scores.data[r * kNumClasses + k];
            pos[r] = labels[r] == k;
        }
        sum += binary_auc(s, pos);
    }
    return sum / double(kNumClasses);
}

namespace {

struct Rates {
    double tpr, fpr;
};

Rates rates_at(const std::vector<double>& scores, const std::vector<bool>& labels, double t) {
    std::size_t tp = 0, fp = 0, pos = 0, neg = 0;
    for (std::size_t i = 0; i < scores.size(); ++i) {
        if (labels[i]) {
            ++pos;
            if (scores[i] >= t) ++tp;
        } else {
            ++neg;
            if (scores[i] >= t) ++fp;
        }
    }
    return {double(tp) / double(pos), double(fp) / double(neg)};
}

} // namespace

TunedThreshold tune_threshold(const std::vector<double>& scores, const std::vector<bool>& labels,
                              TuneObjective objective) {
    require(scores.size() == labels.size() && !scores.empty(),
            "tune_threshold: bad scores/labels");
    std::size_t n_pos = 0;
    for (bool l : labels) n_pos += l ? 1 : 0;
    require(n_pos > 0 && n_pos < labels.size(),
            "tune_threshold: both classes must be present");

    std::vector<double> distinct = scores;
    std::sort(distinct.begin(), distinct.end());
    distinct.erase(std::unique(distinct.begin(), distinct.end()), distinct.end());

    // Candidates: the lowest score (everything positive), midpoints between
    // consecutive distinct scores, and a point above the highest score
    // (nothing positive) when one exists below 1.
    std::vector<double> candidates;
    candidates.push_back(distinct.front());
    for (std::size_t i = 0; i + 1 < distinct.size(); ++i)
        candidates.push_back(distinct[i] + (distinct[i + 1] - distinct[i]) / 2.0);
    if (distinct.back() < 1.0) candidates.push_back((distinct.back() + 1.0) / 2.0);

    TunedThreshold best;
    bool have = false;
    for (double t : candidates) {
        const Rates r = rates_at(scores, labels, t);
        const double obj =
            objective == TuneObjective::YoudenJ ? r.tpr - r.fpr : r.tpr + r.fpr - 1.0;
        if (!have || obj > best.objective || (obj == best.objective && t > best.threshold)) {
            best = {t, r.tpr, r.fpr, obj};
            have = true;
        }
    }
    return best;
}

MergedLabel decide(const std::array<double, kNumClasses>& scores, const ThresholdPair& thresholds) {
    if (scores[std::size_t(MergedLabel::ModExt)] >= thresholds.t_modext) return MergedLabel::ModExt;
    if (scores[std::size_t(MergedLabel::Slight)] >= thresholds.t_slight) return MergedLabel::Slight;
    return MergedLabel::Alert;
}

std::vector<int> decide_all(const Tensor& scores, const ThresholdPair& thresholds) {
    require(scores.ndim() == 2 && scores.dim(1) == kNumClasses, "decide_all: expected [N, 3]");
    std::vector<int> out(scores.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        std::array<double, kNumClasses> row;
        for (int k = 0; k < kNumClasses; ++k) row[k] = scores.data[i * kNumClasses + k];
        out[i] = int(decide(row, thresholds));
    }
    return out;
}

std::vector<int> argmax_decide_all(const Tensor& scores) {
    require(scores.ndim() == 2 && scores.dim(1) == kNumClasses, "argmax_decide_all: expected [N, 3]");
    std::vector<int> out(scores.dim(0));
    for (std::size_t i = 0; i < out.size(); ++i) {
        const double* row = scores.data.data() + i * kNumClasses;
        int best = 0;
        for (int k = 1; k < kNumClasses; ++k)
            if (row[k] > row[best]) best = k;
        out[i] = best;
    }
    return out;
}

ClassifierMetrics confusion_and_weighted_metrics(const std::vector<int>& truth,
                                                 const std::vector<int>& predicted) {
    require(truth.size() == predicted.size(), "metrics: truth/predicted length mismatch");
    require(!truth.empty(), "metrics: empty input");

    ClassifierMetrics m;
    for (std::size_t i = 0; i < truth.size(); ++i) {
        require(truth[i] >= 0 && truth[i] < kNumClasses && predicted[i] >= 0 &&
                    predicted[i] < kNumClasses,
                "metrics: label out of range at index ", i);
        ++m.confusion[std::size_t(truth[i])][std::size_t(predicted[i])];
    }

    const double total = double(truth.size());
    double trace = 0;
    for (int k = 0; k < kNumClasses; ++k) trace += double(m.confusion[k][k]);
    m.accuracy = trace / total;

    for (int k = 0; k < kNumClasses; ++k) {
        double row = 0, col = 0;
        for (int j = 0; j < kNumClasses; ++j) {
            row += double(m.confusion[k][j]);
            col += double(m.confusion[j][k]);
        }
        const double tp = double(m.confusion[k][k]);
        const double prec = col > 0 ? tp / col : 0.0;
        const double rec = row > 0 ? tp / row : 0.0;
        m.per_class_precision[k] = prec;
        m.per_class_recall[k] = rec;
        m.per_class_f1[k] = (prec + rec) > 0 ? 2.0 * prec * rec / (prec + rec) : 0.0;
        m.weighted_precision += (row / total) * prec;
        m.weighted_recall += (row / total) * rec;
        m.weighted_f1 += (row / total) * m.per_class_f1[k];
    }
    return m;
}

EvalReport evaluate_scores(const std::string& model, const Tensor& scores,
                           const std::vector<int>& labels, const ThresholdPair* thresholds) {
    EvalReport report;
    report.model = model;
    report.macro_auc = macro_auc(scores, labels);
    report.argmax = confusion_and_weighted_metrics(labels, argmax_decide_all(scores));
    if (thresholds) {
        report.has_thresholds = true;
        report.thresholds = *thresholds;
        report.thresholded = confusion_and_weighted_metrics(labels, decide_all(scores, *thresholds));
    }
    return report;
}

std::string render_confusion(const ConfusionMatrix& m) {
    std::ostringstream os;
    os << "            pred:alert  pred:slight  pred:modext\n";
    const char* names[] = {"true:alert ", "true:slight", "true:modext"};
    for (int r = 0; r < kNumClasses; ++r) {
        os << names[r];
        for (int c = 0; c < kNumClasses; ++c) {
            std::string v = std::to_string(m[r][c]);
            os << std::string(13 - v.size(), ' ') << v;
        }
        os << '\n';
    }
    return os.str();
}

} // namespace drowsy
