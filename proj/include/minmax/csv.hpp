#pragma once

#include <array>
#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include "minmax/errors.hpp"

namespace minmax {

// Shortest round-trip decimal, independent of the C++ locale.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  std::array<char, 64> buf{};
  const auto res = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  return std::string(buf.data(), res.ptr);
}

// One CSV row; fields are appended in column order.
class CsvRow {
 public:
  CsvRow& add(double v) { return raw(format_double(v)); }
  CsvRow& add(long v) { return raw(std::to_string(v)); }
  CsvRow& add(int v) { return raw(std::to_string(v)); }
  CsvRow& add(std::size_t v) { return raw(std::to_string(v)); }
  CsvRow& add(std::string_view s) {
    if (s.find_first_of(",\"\n") == std::string_view::npos) return raw(std::string(s));
    std::string q = "\"";
    for (char c : s) {
      if (c == '"') q += '"';
      q += c;
    }
    return raw(q + "\"");
  }
  CsvRow& add(const char* s) { return add(std::string_view(s)); }
  CsvRow& empty() { return raw(""); }

  const std::vector<std::string>& fields() const { return fields_; }

 private:
  CsvRow& raw(std::string s) {
    fields_.push_back(std::move(s));
    return *this;
  }
  std::vector<std::string> fields_;
};

// Writes LF-terminated rows. A '#' comment line can follow the data.
class CsvWriter {
 public:
  CsvWriter(std::ostream& out, std::initializer_list<std::string_view> header) : out_(out) {
    for (auto h : header) header_.emplace_back(h);
    line(header_);
  }
  CsvWriter(std::ostream& out, std::vector<std::string> header) : out_(out), header_(std::move(header)) {
    line(header_);
  }

  void row(const CsvRow& r) {
    if (r.fields().size() != header_.size()) {
      throw IoError("csv row has " + std::to_string(r.fields().size()) + " fields, header has " +
                    std::to_string(header_.size()));
    }
    line(r.fields());
  }
  void comment(std::string_view text) { out_ << "# " << text << '\n'; }

 private:
  void line(const std::vector<std::string>& fields) {
    for (std::size_t i = 0; i < fields.size(); ++i) {
      if (i) out_ << ',';
      out_ << fields[i];
    }
    out_ << '\n';
    if (!out_) throw IoError("write failed");
  }

  std::ostream& out_;
  std::vector<std::string> header_;
};

inline std::ofstream open_output(const std::string& path) {
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw IoError("cannot open output file '" + path + "'");
  return f;
}

}  // namespace minmax
