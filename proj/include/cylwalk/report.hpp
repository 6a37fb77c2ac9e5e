#pragma once

// Persistence and plots: CSV with the config embedded in comment lines,
// versioned JSON summaries, and SVG figures.

#include <string>
#include <vector>

#include "cylwalk/experiments.hpp"
#include "cylwalk/exponents.hpp"

namespace cylwalk {

void write_csv(const RunRecord& rec, const std::string& path);
RunRecord read_csv(const std::string& path);  // config, columns and rows; summary left empty
void write_json_summary(const RunRecord& rec, const std::string& path);

// emits <out>/<kind>.csv, <kind>.json and optionally <kind>.svg; returns
// the written paths
std::vector<std::string> emit_report(const RunRecord& rec);

void write_record_svg(const RunRecord& rec, const std::string& path);

// exponent table outputs: table CSV, identity-check JSON, band figure
std::vector<std::string> emit_exponent_report(const ExponentTable& table, const std::string& out_dir,
                                              bool svg);

}  // namespace cylwalk
