#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "qoct/optimize.hpp"
#include "qoct/pulse.hpp"
#include "qoct/rb_analysis.hpp"

namespace qoct {

// Writes via a temp file in the same directory plus rename, so readers never
// observe a half-written file.
void write_text_atomic(const std::filesystem::path& path, const std::string& content);

// Pulse persistence: CSV `index,re,im` plus a JSON sidecar named
// <stem>.json holding {dt_ns, n_samples, description}.
void write_pulse(const std::filesystem::path& csv_path, const SampledPulse& pulse,
                 const std::string& description);

// Parse failures throw ConfigError naming the offending row.
SampledPulse read_pulse(const std::filesystem::path& csv_path);

// AWG export: CSV `index,i,q`.
void write_awg(const std::filesystem::path& csv_path, const IqSamples& iq);

// Optimization trace: JSON lines {iter, best, mean_cost, sigma, timings{...}}
// and a per-candidate CSV `iter,candidate,cost`.
void write_trace_jsonl(const std::filesystem::path& path, const OptimizationTrace& trace);
void write_candidates_csv(const std::filesystem::path& path, const OptimizationTrace& trace);

// RB dataset: CSV `m,seq_index,shots,n0,n1,n2`.
void write_rb_dataset(const std::filesystem::path& path, const RbDataset& dataset);
RbDataset read_rb_dataset(const std::filesystem::path& path);

// RB curve: CSV `m,p0_mean,p0_err`.
void write_rb_curve(const std::filesystem::path& path, const std::vector<RbCurvePoint>& curve);

// Leakage analysis: JSON {L1, lambda1, lambda2, F_avg, stderr{...},
// fit_diagnostics}.
void write_leakage_result(const std::filesystem::path& path, const LeakageResult& result);

std::string format_double(double v);

}  // namespace qoct
