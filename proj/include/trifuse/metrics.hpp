#pragma once

#include <array>
#include <string>
#include <vector>

#include "trifuse/tensor.hpp"

namespace trifuse {

struct ClassMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    long support = 0;
};

// Binary confusion matrix plus the three F1 aggregates. Class index 0 is
// non-explicit, 1 is explicit; confusion is indexed [true][pred].
struct EvalReport {
    std::array<std::array<long, 2>, 2> confusion{{{0, 0}, {0, 0}}};
    std::array<ClassMetrics, 2> per_class;
    double f1_micro = 0.0;
    double f1_macro = 0.0;
    double f1_weighted = 0.0;
    long total = 0;
};

// F1 conventions: micro aggregates global counts (equals accuracy for
// single-label binary), macro is the unweighted class mean, weighted is
// support-weighted; any 0/0 ratio is defined as 0.
EvalReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred);

std::string to_json(const EvalReport& r);
std::string to_text(const EvalReport& r);

}  // namespace trifuse
