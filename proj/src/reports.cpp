#include "aad/reports.hpp"

#include <cstdio>
#include <fstream>

namespace aad {

std::string format_fixed(double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

namespace {

std::string format_window(double window_s) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%g", window_s);
    return buf;
}

}  // namespace

void write_metrics_csv(const std::string& path, const std::vector<EvalReport>& reports) {
    std::ofstream os(path);
    if (!os) throw IoError("write_metrics_csv: cannot open " + path);
    os << "subject,task,window_s,model,variant,ACC,F1,PRE,SEN,SPE,AUC\n";
    for (const EvalReport& r : reports) {
        const std::string tail = std::string(task_name(r.task)) + "," + format_window(r.window_s) +
                                 "," + r.model + "," + r.variant;
        for (const SubjectResult& s : r.subjects) {
            os << s.subject_id << ',' << tail << ',' << format_fixed(s.metrics.acc) << ','
               << format_fixed(s.metrics.f1) << ',' << format_fixed(s.metrics.pre) << ','
               << format_fixed(s.metrics.sen) << ',' << format_fixed(s.metrics.spe) << ','
               << format_fixed(s.roc.auc) << '\n';
        }
        auto cell = [](double mean, double sd) { return format_fixed(mean) + "±" + format_fixed(sd); };
        os << "aggregate," << tail << ',' << cell(r.mean.acc, r.sd.acc) << ','
           << cell(r.mean.f1, r.sd.f1) << ',' << cell(r.mean.pre, r.sd.pre) << ','
           << cell(r.mean.sen, r.sd.sen) << ',' << cell(r.mean.spe, r.sd.spe) << ','
           << cell(r.auc_mean, r.auc_sd) << '\n';
    }
    os.flush();
    if (!os) throw IoError("write_metrics_csv: write failed for " + path);
}

void write_roc_tsv(const std::string& path, const EvalReport& report) {
    std::ofstream os(path);
    if (!os) throw IoError("write_roc_tsv: cannot open " + path);
    os << "fpr\ttpr\n";
    for (const RocPoint& p : report.pooled.points)
        os << format_fixed(p.fpr) << '\t' << format_fixed(p.tpr) << '\n';
    os.flush();
    if (!os) throw IoError("write_roc_tsv: write failed for " + path);
}

void write_embed_tsv(const std::string& path, const std::vector<EmbedPoint>& points) {
    std::ofstream os(path);
    if (!os) throw IoError("write_embed_tsv: cannot open " + path);
    os << "x\ty\tlabel\n";
    for (const EmbedPoint& p : points)
        os << format_fixed(p.x) << '\t' << format_fixed(p.y) << '\t' << p.label << '\n';
    os.flush();
    if (!os) throw IoError("write_embed_tsv: write failed for " + path);
}

}  // namespace aad
