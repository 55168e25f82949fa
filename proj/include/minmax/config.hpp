#pragma once

#include <charconv>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "minmax/errors.hpp"
#include "minmax/game.hpp"

namespace minmax {

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

inline std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = s.find(sep, start);
    out.push_back(trim(s.substr(start, pos == std::string_view::npos ? pos : pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

}  // namespace detail

// Locale-independent number parsing.
inline double parse_double(std::string_view text, std::string_view what = "value") {
  const auto t = detail::trim(text);
  double v = 0.0;
  const char* first = t.data();
  const char* last = t.data() + t.size();
  if (!t.empty() && *first == '+') ++first;
  const auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || t.empty()) {
    throw ConfigError("cannot parse " + std::string(what) + " '" + std::string(t) + "' as a number");
  }
  return v;
}

inline long parse_long(std::string_view text, std::string_view what = "value") {
  const auto t = detail::trim(text);
  long v = 0;
  const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
  if (ec != std::errc() || ptr != t.data() + t.size() || t.empty()) {
    throw ConfigError("cannot parse " + std::string(what) + " '" + std::string(t) + "' as an integer");
  }
  return v;
}

// "1 0; 0 2" (rows separated by ';', entries by spaces or commas).
inline Mat parse_matrix(std::string_view text) {
  std::vector<std::vector<double>> rows;
  for (auto row : detail::split(text, ';')) {
    if (row.empty()) continue;
    std::vector<double> vals;
    std::string r(row);
    for (char& c : r) {
      if (c == ',') c = ' ';
    }
    std::istringstream is(r);
    std::string tok;
    while (is >> tok) vals.push_back(parse_double(tok, "matrix entry"));
    rows.push_back(std::move(vals));
  }
  if (rows.empty() || rows.front().empty()) throw ConfigError("empty matrix");
  Mat m(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i].size() != rows.front().size()) throw ConfigError("ragged matrix rows");
    for (std::size_t j = 0; j < rows[i].size(); ++j) {
      m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i][j];
    }
  }
  return m;
}

inline std::vector<double> logspace(double lo, double hi, long n) {
  if (n < 1 || !(lo > 0.0) || !(hi > 0.0)) throw ConfigError("logspace needs positive bounds and n >= 1");
  std::vector<double> out;
  const double a = std::log10(lo), b = std::log10(hi);
  for (long i = 0; i < n; ++i) {
    out.push_back(n == 1 ? lo : std::pow(10.0, a + (b - a) * static_cast<double>(i) / (n - 1)));
  }
  return out;
}

inline std::vector<double> linspace(double lo, double hi, long n) {
  if (n < 1) throw ConfigError("linspace needs n >= 1");
  std::vector<double> out;
  for (long i = 0; i < n; ++i) {
    out.push_back(n == 1 ? lo : lo + (hi - lo) * static_cast<double>(i) / (n - 1));
  }
  return out;
}

// A hyperparameter axis: explicit points, or a distribution to sample.
struct Distribution {
  bool log = false;
  double lo = 0.0, hi = 1.0;
};
using Axis = std::variant<std::vector<double>, Distribution>;

// Accepts a comma list, logspace(lo, hi, n), linspace(lo, hi, n),
// loguniform(lo, hi) or uniform(lo, hi).
inline Axis parse_axis(std::string_view text) {
  const auto t = detail::trim(text);
  const auto open = t.find('(');
  if (open != std::string_view::npos) {
    if (t.back() != ')') throw ConfigError("unterminated range '" + std::string(t) + "'");
    const auto name = detail::trim(t.substr(0, open));
    const auto args = detail::split(t.substr(open + 1, t.size() - open - 2), ',');
    auto arg = [&](std::size_t i) { return parse_double(args.at(i), "range bound"); };
    if ((name == "logspace" || name == "linspace") && args.size() == 3) {
      const long n = parse_long(args[2], "point count");
      return name == "logspace" ? logspace(arg(0), arg(1), n) : linspace(arg(0), arg(1), n);
    }
    if ((name == "loguniform" || name == "uniform") && args.size() == 2) {
      Distribution d{name == "loguniform", arg(0), arg(1)};
      if (!(d.lo <= d.hi) || (d.log && !(d.lo > 0.0))) {
        throw ConfigError("bad bounds in '" + std::string(t) + "'");
      }
      return d;
    }
    throw ConfigError("unknown range '" + std::string(t) + "'");
  }
  std::vector<double> vals;
  for (auto part : detail::split(t, ',')) vals.push_back(parse_double(part, "list entry"));
  return vals;
}

// Sectioned key = value configuration. Lines starting with ';' or '#' are
// comments; a trailing " # ..." on a value is dropped.
class Config {
 public:
  static Config parse(std::istream& in, const std::string& source = "<config>") {
    boost::property_tree::ptree tree;
    try {
      boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error& e) {
      throw ConfigError(source + ": " + e.message() + " (line " + std::to_string(e.line()) + ")");
    }
    Config c;
    c.source_ = source;
    for (const auto& [section, body] : tree) {
      if (body.empty()) {
        c.values_[""][section] = strip_comment(body.data());
        continue;
      }
      for (const auto& [key, value] : body) c.values_[section][key] = strip_comment(value.data());
    }
    return c;
  }

  static Config load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open config file '" + path + "'");
    return parse(in, path);
  }

  static Config from_string(const std::string& text) {
    std::istringstream in(text);
    return parse(in);
  }

  const std::string& source() const { return source_; }

  void set(const std::string& section, const std::string& key, const std::string& value) {
    values_[section][key] = value;
  }

  bool has(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    return s != values_.end() && s->second.count(key) > 0;
  }
  bool has_section(const std::string& section) const { return values_.count(section) > 0; }

  std::optional<std::string> find(const std::string& section, const std::string& key) const {
    const auto s = values_.find(section);
    if (s == values_.end()) return std::nullopt;
    const auto k = s->second.find(key);
    if (k == s->second.end()) return std::nullopt;
    return k->second;
  }

  std::string str(const std::string& section, const std::string& key) const {
    if (auto v = find(section, key)) return *v;
    throw ConfigError(source_ + ": missing [" + section + "] " + key);
  }
  std::string str(const std::string& section, const std::string& key, std::string fallback) const {
    return find(section, key).value_or(std::move(fallback));
  }

  double num(const std::string& section, const std::string& key) const {
    return parse_double(str(section, key), section + "." + key);
  }
  double num(const std::string& section, const std::string& key, double fallback) const {
    const auto v = find(section, key);
    return v ? parse_double(*v, section + "." + key) : fallback;
  }

  long integer(const std::string& section, const std::string& key, long fallback) const {
    const auto v = find(section, key);
    return v ? parse_long(*v, section + "." + key) : fallback;
  }

  std::vector<double> numbers(const std::string& section, const std::string& key) const {
    const auto axis = parse_axis(str(section, key));
    if (const auto* v = std::get_if<std::vector<double>>(&axis)) return *v;
    throw ConfigError(source_ + ": [" + section + "] " + key + " must be a list, not a distribution");
  }

  std::vector<std::string> strings(const std::string& section, const std::string& key) const {
    std::vector<std::string> out;
    const std::string text = str(section, key);
    for (auto part : detail::split(text, ',')) {
      if (!part.empty()) out.emplace_back(part);
    }
    return out;
  }

  Mat matrix(const std::string& section, const std::string& key) const {
    return parse_matrix(str(section, key));
  }

  // MINMAX_SEED in the environment wins over the file.
  std::uint64_t seed(std::uint64_t fallback = 0) const {
    if (const char* env = std::getenv("MINMAX_SEED"); env != nullptr && *env != '\0') {
      return static_cast<std::uint64_t>(parse_long(env, "MINMAX_SEED"));
    }
    return static_cast<std::uint64_t>(integer("experiment", "seed", static_cast<long>(fallback)));
  }

 private:
  static std::string strip_comment(const std::string& v) {
    const auto pos = v.find(" #");
    return std::string(detail::trim(pos == std::string::npos ? v : v.substr(0, pos)));
  }

  std::string source_ = "<config>";
  std::map<std::string, std::map<std::string, std::string>> values_;
};

}  // namespace minmax
