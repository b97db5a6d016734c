#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>

#include "splitplot/coverage.hpp"
#include "splitplot/estimator.hpp"
#include "splitplot/pom.hpp"

namespace splitplot {

/// Shortest decimal representation that round-trips the double.
std::string format_double(double value);

// Science table: header whole_plot,sub_plot,y1,y2,y3,y4 with 1-based plot
// and sub-plot indices. Rows may arrive in any order; loading validates the
// full grid and sorts to lexicographic (w, m).
void write_pom_csv(std::ostream& out, const PotentialOutcomeMatrix& pom);
PotentialOutcomeMatrix read_pom_csv(std::istream& in);

// Randomization plan: whole_plot,sub_plot,level_A,level_B,treatment.
void write_assignment_csv(std::ostream& out, const Assignment& assignment,
                          const BlockLayout& layout);

// Observed data: whole_plot,sub_plot,treatment,y_obs.
void write_observed_csv(std::ostream& out, const ObservedData& data);
ObservedData read_observed_csv(std::istream& in);

// Per-effect estimates: effect,method,tau_hat,v_hat,ci_lo,ci_hi,alpha.
void write_estimate_csv(std::ostream& out, const EffectEstimate& estimate);

// One row per (cell, effect, method):
// po_type,additivity,effect,method,coverage,mean_width,tau_true,reps,W,M,alpha,seed.
void write_coverage_csv(std::ostream& out, const CoverageReport& report);

/// Writes through a temporary file in the target directory and renames it
/// into place, so a failed run never leaves a partial output file.
void write_file_atomic(const std::filesystem::path& path,
                       const std::function<void(std::ostream&)>& writer);

}  // namespace splitplot
