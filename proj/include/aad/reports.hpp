#pragma once

#include <string>
#include <vector>

#include "aad/evaluate.hpp"

namespace aad {

// metrics.csv: subject,task,window_s,model,variant,ACC,F1,PRE,SEN,SPE,AUC
// with one per-subject row each and a single aggregate (mean±sd) row per
// report. Numbers are fixed six-decimal, locale-independent.
void write_metrics_csv(const std::string& path, const std::vector<EvalReport>& reports);

// roc.tsv: fpr<TAB>tpr rows of the pooled curve.
void write_roc_tsv(const std::string& path, const EvalReport& report);

// embed.tsv: x<TAB>y<TAB>label rows.
void write_embed_tsv(const std::string& path, const std::vector<EmbedPoint>& points);

std::string format_fixed(double v);  // "%.6f"

}  // namespace aad
