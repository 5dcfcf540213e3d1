#pragma once

#include <string>

#include "pushpull/metrics.hpp"

namespace pushpull {

// Per-seed trace CSV. Header row is mandatory; columns in this exact order:
// k,eta,lambda,f_bar,grad_norm_sq,e_x,e_v,e_m,e_momentum_energy,cons_residual
// Decimals carry 17 significant digits so values round-trip bit-exactly.
std::string trace_to_csv(const MetricsTrace& trace);
MetricsTrace trace_from_csv(const std::string& text);

// Aggregate CSV: k,eta,lambda then <field>_mean,<field>_std pairs.
std::string aggregate_to_csv(const AggregateTrace& agg);

// Writes via a temp file and rename, so readers never see partial output.
void write_file_atomic(const std::string& path, const std::string& content);
std::string read_file(const std::string& path);

std::string format_double(double v);  // shortest 17-significant-digit form

// FNV-1a digest of a canonical config echo, hex-encoded.
std::string digest(const std::string& text);

}  // namespace pushpull
