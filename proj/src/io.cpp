#include "qnacf/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include "qnacf/errors.hpp"

namespace qnacf {

namespace {

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string_view> split_fields(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

double parse_value(std::string_view tok, const std::string& path, std::size_t line) {
  if (tok.empty()) throw ParseError(path, line, "empty field");
  if (tok.front() == '+') tok.remove_prefix(1);
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), v);
  if (ec != std::errc() || ptr != tok.data() + tok.size()) {
    throw ParseError(path, line, "not a number: '" + std::string(tok) + "'");
  }
  if (!std::isfinite(v)) throw ParseError(path, line, "non-finite value '" + std::string(tok) + "'");
  return v;
}

bool is_index(const std::string& s) {
  return !s.empty() && s.find_first_not_of("0123456789") == std::string::npos;
}

}  // namespace

TimeSeries ingest_series(const std::string& path, const IngestOptions& opt) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  std::vector<double> values;
  std::string raw;
  std::size_t lineno = 0;
  std::size_t col = 0;
  bool need_header = false;
  if (opt.format == SeriesFormat::csv) {
    if (is_index(opt.column)) {
      col = std::stoul(opt.column);
    } else {
      need_header = true;
    }
  }
  while (std::getline(in, raw)) {
    ++lineno;
    const std::string_view line = trim(raw);
    if (line.empty() || line.front() == '#') continue;
    if (opt.format == SeriesFormat::single_column) {
      values.push_back(parse_value(line, path, lineno));
      continue;
    }
    const auto fields = split_fields(line);
    if (need_header) {
      bool found = false;
      for (std::size_t i = 0; i < fields.size(); ++i) {
        if (fields[i] == opt.column) {
          col = i;
          found = true;
          break;
        }
      }
      if (!found) throw ParseError(path, lineno, "header has no column '" + opt.column + "'");
      need_header = false;
      continue;
    }
    if (col >= fields.size()) {
      throw ParseError(path, lineno, "missing column " + std::to_string(col));
    }
    values.push_back(parse_value(fields[col], path, lineno));
  }
  if (in.bad()) throw IoError("read error on '" + path + "'");
  if (values.empty()) throw ValidationError(path + ": no values");
  TimeSeries ts(values);
  ts.set_metadata("source", path);
  return ts;
}

std::string format_exact(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string format_short(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  fs::path tmp = target;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write '" + tmp.string() + "'");
    out << content;
    out.flush();
    if (!out) throw IoError("write failed for '" + tmp.string() + "'");
  }
  std::error_code ec;
  fs::rename(tmp, target, ec);
  if (ec) {
    fs::remove(tmp, ec);
    throw IoError("cannot rename onto '" + path + "'");
  }
}

void write_series(const std::string& path, const TimeSeries& x) {
  std::string s;
  s.reserve(x.size() * 24);
  for (std::size_t i = 0; i < x.size(); ++i) {
    s += format_exact(x[i]);
    s += '\n';
  }
  write_file_atomic(path, s);
}

}  // namespace qnacf
