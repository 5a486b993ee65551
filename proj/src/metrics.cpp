#include "trifuse/metrics.hpp"

#include <cstdio>

#include <json.hpp>

#include "trifuse/errors.hpp"

namespace trifuse {

namespace {

double ratio(double num, double den) { return den == 0.0 ? 0.0 : num / den; }

}  // namespace

EvalReport compute_metrics(const std::vector<int>& y_true, const std::vector<int>& y_pred) {
    if (y_true.empty()) throw UsageError("compute_metrics: empty label set");
    if (y_true.size() != y_pred.size())
        throw UsageError("compute_metrics: " + std::to_string(y_true.size()) + " labels vs " +
                         std::to_string(y_pred.size()) + " predictions");

    EvalReport r;
    for (std::size_t i = 0; i < y_true.size(); ++i) {
        const int t = y_true[i], p = y_pred[i];
        if (t < 0 || t > 1 || p < 0 || p > 1) throw UsageError("compute_metrics: labels must be 0 or 1");
        ++r.confusion[static_cast<std::size_t>(t)][static_cast<std::size_t>(p)];
    }
    r.total = static_cast<long>(y_true.size());

    long tp_sum = 0, fp_sum = 0, fn_sum = 0;
    double weighted = 0.0, macro = 0.0;
    for (int c = 0; c < 2; ++c) {
        const auto cc = static_cast<std::size_t>(c);
        const long tp = r.confusion[cc][cc];
        const long fp = r.confusion[1 - cc][cc];
        const long fn = r.confusion[cc][1 - cc];
        ClassMetrics& m = r.per_class[cc];
        m.support = tp + fn;
        m.precision = ratio(static_cast<double>(tp), static_cast<double>(tp + fp));
        m.recall = ratio(static_cast<double>(tp), static_cast<double>(tp + fn));
        m.f1 = ratio(2.0 * m.precision * m.recall, m.precision + m.recall);
        tp_sum += tp;
        fp_sum += fp;
        fn_sum += fn;
        macro += m.f1 / 2.0;
        weighted += m.f1 * static_cast<double>(m.support);
    }
    r.f1_micro = ratio(static_cast<double>(tp_sum),
                       static_cast<double>(tp_sum) + 0.5 * static_cast<double>(fp_sum + fn_sum));
    r.f1_macro = macro;
    r.f1_weighted = weighted / static_cast<double>(r.total);
    return r;
}

std::string to_json(const EvalReport& r) {
    nlohmann::json j;
    j["classes"] = {"non_explicit", "explicit"};
    j["confusion"] = {{r.confusion[0][0], r.confusion[0][1]}, {r.confusion[1][0], r.confusion[1][1]}};
    j["f1_micro"] = r.f1_micro;
    j["f1_macro"] = r.f1_macro;
    j["f1_weighted"] = r.f1_weighted;
    j["total"] = r.total;
    for (int c = 0; c < 2; ++c) {
        nlohmann::json m;
        m["precision"] = r.per_class[static_cast<std::size_t>(c)].precision;
        m["recall"] = r.per_class[static_cast<std::size_t>(c)].recall;
        m["f1"] = r.per_class[static_cast<std::size_t>(c)].f1;
        m["support"] = r.per_class[static_cast<std::size_t>(c)].support;
        j["per_class"][c == 0 ? "non_explicit" : "explicit"] = m;
    }
    return j.dump(1);
}

std::string to_text(const EvalReport& r) {
    char buf[256];
    std::string out;
    out += "                 predicted\n";
    out += "                 non-explicit  explicit\n";
    std::snprintf(buf, sizeof(buf), "true non-explicit %12ld %9ld\n", r.confusion[0][0], r.confusion[0][1]);
    out += buf;
    std::snprintf(buf, sizeof(buf), "true explicit     %12ld %9ld\n", r.confusion[1][0], r.confusion[1][1]);
    out += buf;
    out += "\nclass         precision  recall      f1  support\n";
    const char* names[2] = {"non-explicit", "explicit"};
    for (int c = 0; c < 2; ++c) {
        const ClassMetrics& m = r.per_class[static_cast<std::size_t>(c)];
        std::snprintf(buf, sizeof(buf), "%-12s %10.4f %7.4f %7.4f %8ld\n", names[c], m.precision, m.recall,
                      m.f1, m.support);
        out += buf;
    }
    std::snprintf(buf, sizeof(buf), "\nF1-micro %.4f | F1-macro %.4f | F1-weighted %.4f | n=%ld\n",
                  r.f1_micro, r.f1_macro, r.f1_weighted, r.total);
    out += buf;
    return out;
}

}  // namespace trifuse
