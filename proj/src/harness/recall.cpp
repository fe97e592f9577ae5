#include <chrono>
#include <sstream>

#include "lvann/harness/harness.hpp"

namespace lvann {

std::string RecallReport::describe() const {
    std::ostringstream out;
    out << queries << " queries, " << hits << " hits, " << misses << " misses ("
        << (strict ? "strict" : "subsampled") << "), mean candidates " << mean_candidates << ", "
        << total_seconds << " s";
    if (hard_failure()) {
        out << "; LAS VEGAS CONTRACT VIOLATED";
    } else if (misses > 0) {
        out << "; soft failures";
    }
    return out.str();
}

RecallReport run_recall(const TopIndex& index, const std::vector<RealVector>& queries) {
    RecallReport report;
    report.strict = index.record().strict;
    report.queries = queries.size();
    report.false_positives_per_block.assign(index.mids().size(), 0);
    const auto start = std::chrono::steady_clock::now();
    double candidates = 0;
    for (const RealVector& q : queries) {
        const auto t0 = std::chrono::steady_clock::now();
        const TopQueryReport r = query_top_index(index, q);
        const auto t1 = std::chrono::steady_clock::now();
        QueryRecord rec;
        rec.result = r.result;
        rec.distance = r.distance;
        rec.candidates = r.candidates;
        rec.false_positives = r.false_positives;
        rec.micros = std::chrono::duration<double, std::micro>(t1 - t0).count();
        for (std::size_t b = 0; b < r.false_positives_per_block.size(); ++b) {
            report.false_positives_per_block[b] += r.false_positives_per_block[b];
        }
        candidates += static_cast<double>(r.candidates);
        if (r.result && r.distance <= index.record().c) {
            ++report.hits;
        } else {
            ++report.misses;
        }
        report.records.push_back(rec);
    }
    report.total_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    report.mean_candidates = queries.empty() ? 0.0 : candidates / static_cast<double>(queries.size());
    return report;
}

}  // namespace lvann
