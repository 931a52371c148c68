#include <cstdio>

#include "empath/metrics.hpp"

namespace empath {

namespace {

std::string fmt4(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.4f", v);
    return buf;
}

}  // namespace

std::string format_eval_table(const EvalReport& report) {
    std::string out;
    char buf[192];
    std::snprintf(buf, sizeof(buf), "%-12s %7s %7s %7s %7s | %8s %7s %7s %8s %6s\n", "method",
                  "prec", "recall", "f1", "acc", "ppl", "d-1", "d-2", "extrema", "rows");
    out += buf;
    out += std::string(92, '-') + "\n";
    for (const MethodReport& m : report.methods) {
        if (m.rows == 0) {
            std::snprintf(buf, sizeof(buf), "%-12s (no rows)\n", method_name(m.method).c_str());
            out += buf;
            continue;
        }
        const std::string prec = m.prediction ? fmt4(m.prediction->weighted_precision) : "-";
        const std::string rec = m.prediction ? fmt4(m.prediction->weighted_recall) : "-";
        const std::string f1 = m.prediction ? fmt4(m.prediction->weighted_f1) : "-";
        const std::string acc = m.prediction ? fmt4(m.prediction->balanced_accuracy) : "-";
        const std::string ppl =
            m.generation.perplexity ? fmt4(*m.generation.perplexity) : "-";
        std::snprintf(buf, sizeof(buf), "%-12s %7s %7s %7s %7s | %8s %7s %7s %8s %6zu\n",
                      method_name(m.method).c_str(), prec.c_str(), rec.c_str(), f1.c_str(),
                      acc.c_str(), ppl.c_str(), fmt4(m.generation.distinct1).c_str(),
                      fmt4(m.generation.distinct2).c_str(), fmt4(m.generation.extrema).c_str(),
                      m.rows);
        out += buf;
    }
    return out;
}

std::string eval_report_csv(const EvalReport& report) {
    std::string out =
        "method,rows,weighted_precision,weighted_recall,weighted_f1,balanced_accuracy,"
        "perplexity,distinct_1,distinct_2,extrema\n";
    char buf[256];
    for (const MethodReport& m : report.methods) {
        const std::string prec = m.prediction ? fmt4(m.prediction->weighted_precision) : "";
        const std::string rec = m.prediction ? fmt4(m.prediction->weighted_recall) : "";
        const std::string f1 = m.prediction ? fmt4(m.prediction->weighted_f1) : "";
        const std::string acc = m.prediction ? fmt4(m.prediction->balanced_accuracy) : "";
        const std::string ppl = m.generation.perplexity ? fmt4(*m.generation.perplexity) : "";
        if (m.rows == 0) {
            std::snprintf(buf, sizeof(buf), "%s,0,,,,,,,,\n", method_name(m.method).c_str());
        } else {
            std::snprintf(buf, sizeof(buf), "%s,%zu,%s,%s,%s,%s,%s,%s,%s,%s\n",
                          method_name(m.method).c_str(), m.rows, prec.c_str(), rec.c_str(),
                          f1.c_str(), acc.c_str(), ppl.c_str(),
                          fmt4(m.generation.distinct1).c_str(),
                          fmt4(m.generation.distinct2).c_str(),
                          fmt4(m.generation.extrema).c_str());
        }
        out += buf;
    }
    return out;
}

}  // namespace empath
