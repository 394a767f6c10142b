#pragma once

// The fourteen acceptance checks, shared by the ctest binary and
// `ymindex verify-all`. Each prints one line; a check that throws fails with
// the message as its detail.

#include <functional>
#include <string>
#include <vector>

#include "ymindex/experiments.hpp"

namespace ymindex {

enum class AcceptanceLevel {
  smoke,  // reduced sizes for the expensive checks, no runtime budgets
  full,   // the stated sizes; runtime budgets are reported (advisory)
};

struct CriterionResult {
  int id = 0;
  std::string title;
  bool pass = false;
  std::string detail;
  double seconds = 0.0;
  double budget = 0.0;  // seconds; 0 = none
};

using CriterionSink = std::function<void(const CriterionResult&)>;

int criterion_count();
// `only` empty = all. The sink sees every result as soon as it is known.
std::vector<CriterionResult> run_acceptance(AcceptanceLevel level, const std::vector<int>& only = {},
                                            const CriterionSink& sink = {});
std::string format_result(const CriterionResult& r);

// Schedules the sequence checks run on.
BubbleSchedule shipped_quantization_schedule();
BubbleSchedule shipped_semicontinuity_schedule();

}  // namespace ymindex
