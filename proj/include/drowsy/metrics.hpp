#pragma once

#include <array>
#include <string>
#include <vector>

#include "drowsy/dataset.hpp"
#include "drowsy/tensor.hpp"

namespace drowsy {

// One-vs-rest decision thresholds on class scores, from the class-specific
// tuning; Alert is the fallback class and needs none.
struct ThresholdPair {
    double t_slight = 0.5;
    double t_modext = 0.5;
    // Validation operating points recorded at tuning time.
    double tpr_slight = 0, fpr_slight = 0;
    double tpr_modext = 0, fpr_modext = 0;
};

enum class TuneObjective {
    YoudenJ,      // TPR - FPR
    LiteralPaper, // TPR - (1 - FPR) = TPR + FPR - 1; kept for comparison
};

// Mann-Whitney AUC with the 0.5 tie convention. Throws when labels are
// single-class.
double binary_auc(const std::vector<double>& scores, const std::vector<bool>& labels);

// Unweighted mean of the 3 one-vs-rest AUCs; scores is [N, 3].
double macro_auc(const Tensor& scores, const std::vector<int>& labels);

struct TunedThreshold {
    double threshold = 0;
    double tpr = 0;
    double fpr = 0;
    double objective = 0;
};

// Exhaustive scan over candidate thresholds (midpoints between consecutive
// distinct sorted scores plus the outer extremes); positives are score >=
// threshold. Objective ties break to the higher threshold.
TunedThreshold tune_threshold(const std::vector<double>& scores, const std::vector<bool>& labels,
                              TuneObjective objective = TuneObjective::YoudenJ);

// Severity-biased decision: ModExt wins when its threshold is met, then
// Slight, else Alert.
MergedLabel decide(const std::array<double, kNumClasses>& scores, const ThresholdPair& thresholds);

std::vector<int> decide_all(const Tensor& scores, const ThresholdPair& thresholds);

std::vector<int> argmax_decide_all(const Tensor& scores);

using ConfusionMatrix = std::array<std::array<std::size_t, kNumClasses>, kNumClasses>;

struct ClassifierMetrics {
    ConfusionMatrix confusion{};       // rows = true, columns = predicted
    double accuracy = 0;
    double weighted_precision = 0;
    double weighted_recall = 0;
    double weighted_f1 = 0;
    std::array<double, kNumClasses> per_class_precision{};
    std::array<double, kNumClasses> per_class_recall{};
    std::array<double, kNumClasses> per_class_f1{};
};

ClassifierMetrics confusion_and_weighted_metrics(const std::vector<int>& truth,
                                                 const std::vector<int>& predicted);

// Full evaluation of score rows: macro AUC (threshold-free) plus argmax
// metrics, and thresholded metrics when thresholds are given.
struct EvalReport {
    std::string model;
    double macro_auc = 0;
    ClassifierMetrics argmax;
    bool has_thresholds = false;
    ThresholdPair thresholds;
    ClassifierMetrics thresholded;

    // The headline row: thresholded metrics when available, else argmax.
    const ClassifierMetrics& headline() const { return has_thresholds ? thresholded : argmax; }
};

EvalReport evaluate_scores(const std::string& model, const Tensor& scores,
                           const std::vector<int>& labels, const ThresholdPair* thresholds);

std::string render_confusion(const ConfusionMatrix& m);

} // namespace drowsy
