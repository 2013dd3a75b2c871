#pragma once

#include <string>
#include <vector>

#include "aad/model.hpp"

namespace aad {

struct GradCheckRow {
    std::string name;
    double worst = 0.0;          // worst relative error over checked coordinates
    double tolerance = 0.0;
    double pass_fraction = 1.0;  // full-model row samples coordinates
    bool pass = false;
    std::string detail;
};

// Central finite differences (h = 1e-5) against every layer's analytic
// gradient, plus a sampled whole-model check on a small configuration.
// The numeric side only ever calls forward passes. `corrupt_elu` injects a
// deliberate error into the ELU analytic gradient (harness sensitivity
// fixture for tests).
std::vector<GradCheckRow> run_gradcheck(std::uint64_t seed, bool corrupt_elu = false);

bool gradcheck_all_pass(const std::vector<GradCheckRow>& rows);
std::string gradcheck_table(const std::vector<GradCheckRow>& rows);

// |a - n| / max(1, |a|, |n|)
double gradcheck_rel_err(double analytic, double numeric);

}  // namespace aad
