#pragma once

#include <string>

#include "qnacf/time_series.hpp"

namespace qnacf {

enum class SeriesFormat { single_column, csv };

struct IngestOptions {
  SeriesFormat format = SeriesFormat::single_column;
  /// csv only: a header name, or a 0-based index (then the file has no header).
  std::string column = "0";
};

/// Reads finite values, skipping blank lines and lines starting with '#'.
/// Any other token that is not a finite number raises ParseError with its line.
TimeSeries ingest_series(const std::string& path, const IngestOptions& opt = {});

/// "%.17g": parsing the text back gives the identical double.
std::string format_exact(double v);

/// "%.6g" for human-facing tables.
std::string format_short(double v);

/// Write to a sibling temporary file, then rename over `path`.
void write_file_atomic(const std::string& path, const std::string& content);

/// One value per line in format_exact, no header.
void write_series(const std::string& path, const TimeSeries& x);

}  // namespace qnacf
