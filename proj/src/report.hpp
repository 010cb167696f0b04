// Copyright 2026 The covprice Authors
// SPDX-License-Identifier: Apache-2.0

// CSV layouts for replication summaries and derived diagnostic series.
// Numbers are written with %.17g so files round-trip bit-exactly; undefined
// values are written as "nan".

#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include "simulator.hpp"

namespace covprice {

enum class SeriesId { kPrice, kRegret, kLambdaMin, kTOverLambdaMin, kRawErrorSq, kTruncatedErrorSq };

const SeriesStats& series(const ReplicationSummary& s, SeriesId id);
// Column stem, e.g. "regret" -> mean_regret / ci_halfwidth_regret.
const char* series_name(SeriesId id);

// t,replications,mean_price,ci_halfwidth_price,mean_regret,... for every SeriesId.
void write_summary_csv(const ReplicationSummary& s, std::ostream& out);
void write_series_csv(const ReplicationSummary& s, SeriesId id, std::ostream& out);
void write_final_regrets_csv(const ReplicationSummary& s, std::ostream& out);

// Columns needed to derive diagnostics from a summary CSV.
struct SummaryColumns {
  std::vector<std::uint64_t> t;
  std::vector<double> mean_regret;
  std::vector<double> mean_lambda_min;
  std::vector<double> mean_error_sq;
};

// Throws DataError naming any missing column.
SummaryColumns read_summary_csv(std::istream& in);

// t,t_over_lambda_min,log_t_over_regret,t_error_sq,regret_over_log_t
void write_derived_csv(const DerivedSeries& d, std::ostream& out);

std::string format_double(double v);

}  // namespace covprice
