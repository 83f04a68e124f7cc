#pragma once

// Price ingestion, log-returns, synthetic datasets, and dataset persistence
// (CSV observations plus a JSON metadata sidecar).

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <istream>
#include <optional>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"
#include "tcsde/discretization.hpp"
#include "tcsde/error.hpp"
#include "tcsde/model.hpp"
#include "tcsde/random.hpp"
#include "tcsde/subordinator.hpp"

namespace tcsde {

/// Shortest decimal text that parses back to exactly `x`.
inline std::string format_double(double x) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

inline std::optional<double> parse_double(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  double v = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

struct PriceSeries {
  std::vector<std::string> dates;
  std::vector<double> closes;
};

struct PriceIngestOptions {
  std::string date_col = "Date";
  std::string close_col = "Close";
  /// Inclusive ISO-8601 window; empty means unbounded.
  std::string start;
  std::string end;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  bool quoted = false;
  for (char ch : line) {
    if (ch == '"') {
      quoted = !quoted;
    } else if (ch == ',' && !quoted) {
      out.push_back(field);
      field.clear();
    } else if (ch != '\r') {
      field.push_back(ch);
    }
  }
  out.push_back(field);
  for (auto& f : out) {
    const auto b = f.find_first_not_of(" \t");
    const auto e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string{} : f.substr(b, e - b + 1);
  }
  return out;
}

inline std::string lower(std::string s) {
  std::transform(s.begin(), s.end(), s.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  return s;
}

}  // namespace detail

/// Reads a daily price CSV with a header row. Column names match
/// case-insensitively; dates are compared as ISO-8601 strings (a date-time
/// suffix is ignored for ordering and windowing).
inline PriceSeries ingest_prices(std::istream& in, const PriceIngestOptions& opts = {}) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") != std::string::npos) break;
  }
  if (line.empty()) throw ParseError("data", line_no, "missing header row");
  const auto header = detail::split_csv_line(line);
  auto find = [&](const std::string& name) -> std::size_t {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (detail::lower(header[i]) == detail::lower(name)) return i;
    throw ParseError("data", line_no, "column '" + name + "' not found in header");
  };
  const std::size_t date_i = find(opts.date_col);
  const std::size_t close_i = find(opts.close_col);

  PriceSeries series;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() <= std::max(date_i, close_i))
      throw ParseError("data", line_no, "row has too few columns");
    std::string date = fields[date_i].substr(0, 10);
    if (date.size() != 10 || date[4] != '-' || date[7] != '-')
      throw ParseError("data", line_no, "date '" + fields[date_i] + "' is not ISO-8601");
    const auto close = parse_double(fields[close_i]);
    if (!close) throw ParseError("data", line_no, "close '" + fields[close_i] + "' is not a number");
    if (!opts.start.empty() && date < opts.start) continue;
    if (!opts.end.empty() && date > opts.end) continue;
    if (!(*close > 0.0) || !std::isfinite(*close))
      throw DataError("data", "non-positive price on line " + std::to_string(line_no));
    if (!series.dates.empty() && !(date > series.dates.back()))
      throw DataError("data", "dates must be strictly increasing (line " + std::to_string(line_no) + ")");
    series.dates.push_back(std::move(date));
    series.closes.push_back(*close);
  }
  return series;
}

inline PriceSeries ingest_prices_file(const std::string& path, const PriceIngestOptions& opts = {}) {
  std::ifstream in(path);
  if (!in) throw IoError("data", "cannot open '" + path + "'");
  return ingest_prices(in, opts);
}

struct Dataset {
  Observations observations;
  std::optional<std::vector<double>> truth;  // synthetic only
  nlohmann::json metadata = nlohmann::json::object();
};

/// Log-returns R_t = ln(close_t) - ln(close_{t-1}).
inline Dataset to_returns(const PriceSeries& series) {
  if (series.closes.size() < 2) throw DataError("data", "need at least two prices for returns");
  Dataset d;
  for (std::size_t i = 1; i < series.closes.size(); ++i) {
    if (!(series.closes[i] > 0.0) || !(series.closes[i - 1] > 0.0))
      throw DataError("data", "non-positive price");
    d.observations.y.push_back(std::log(series.closes[i]) - std::log(series.closes[i - 1]));
  }
  d.metadata["kind"] = "returns";
  d.metadata["first_date"] = series.dates.empty() ? "" : series.dates.front();
  d.metadata["last_date"] = series.dates.empty() ? "" : series.dates.back();
  return d;
}

/// Log-price levels ln(close_t), or raw prices when `log_scale` is false.
inline Dataset to_levels(const PriceSeries& series, bool log_scale) {
  Dataset d;
  for (double c : series.closes) d.observations.y.push_back(log_scale ? std::log(c) : c);
  d.metadata["kind"] = log_scale ? "log_prices" : "prices";
  return d;
}

inline std::string sidecar_path(const std::string& csv_path) { return csv_path + ".json"; }

inline void write_dataset(const Dataset& d, const std::string& csv_path) {
  std::ofstream out(csv_path, std::ios::binary);
  if (!out) throw IoError("data", "cannot write '" + csv_path + "'");
  out << "k,y\n";
  for (std::size_t k = 1; k <= d.observations.size(); ++k)
    out << k << ',' << format_double(d.observations[k]) << '\n';
  if (!out) throw IoError("data", "failed writing '" + csv_path + "'");
  nlohmann::json meta = d.metadata;
  if (d.truth) meta["truth"] = *d.truth;
  std::ofstream side(sidecar_path(csv_path), std::ios::binary);
  if (!side) throw IoError("data", "cannot write '" + sidecar_path(csv_path) + "'");
  side << meta.dump(2) << '\n';
}

/// Reads a (k, y) CSV and, when present, its JSON sidecar.
inline Dataset read_dataset(const std::string& csv_path) {
  std::ifstream in(csv_path);
  if (!in) throw IoError("data", "cannot open '" + csv_path + "'");
  Dataset d;
  std::string line;
  std::size_t line_no = 0;
  bool header = true;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto fields = detail::split_csv_line(line);
    if (header) {
      header = false;
      if (fields.size() < 2 || detail::lower(fields[0]) != "k" || detail::lower(fields[1]) != "y")
        throw ParseError("data", line_no, "expected header 'k,y'");
      continue;
    }
    if (fields.size() < 2) throw ParseError("data", line_no, "row has too few columns");
    const auto k = parse_double(fields[0]);
    const auto y = parse_double(fields[1]);
    if (!k || *k != static_cast<double>(d.observations.size() + 1))
      throw ParseError("data", line_no, "index must count 1, 2, ...");
    if (!y) throw ParseError("data", line_no, "value '" + fields[1] + "' is not a number");
    d.observations.y.push_back(*y);
  }
  if (header) throw ParseError("data", line_no, "missing header row");
  std::ifstream side(sidecar_path(csv_path));
  if (side) {
    try {
      side >> d.metadata;
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("data", 0, std::string("sidecar is not valid JSON: ") + e.what());
    }
    if (d.metadata.contains("truth")) {
      d.truth = d.metadata["truth"].get<std::vector<double>>();
      d.metadata.erase("truth");
    }
  }
  return d;
}

/// Simulates one level-`level` trajectory at theta and emits y_k = x_k + nu * Z.
inline Dataset generate_synthetic(const ModelConstants& constants, const BlackScholesModel::Params& theta,
                                  int level, std::uint64_t seed, double op_time_ratio = 0.1) {
  const BlackScholesModel model(constants);
  const double nu2 = theta[BlackScholesModel::nu2_index];
  if (!(nu2 >= 0.0)) throw InvalidParameter("data", "nu2 must be non-negative");
  if (level < 0) throw InvalidParameter("data", "level must be >= 0");
  const ClockSpec clock{Subordinator::Kind::stable, constants.alpha, op_time_ratio};
  RngStream path_rng(seed, 0);
  RngStream noise_rng(seed, 1);
  const auto traj = sample_trajectory(model, theta, level, constants.T, clock.at_level(level), path_rng);
  Dataset d;
  const double nu = std::sqrt(nu2);
  for (std::size_t k = 1; k <= constants.T; ++k) {
    const double noise = noise_rng.normal();
    d.observations.y.push_back(nu2 == 0.0 ? traj.x_at(k) : traj.x_at(k) + nu * noise);
  }
  d.truth = std::vector<double>(theta.v.begin(), theta.v.end());
  d.metadata["kind"] = "synthetic";
  d.metadata["seed"] = seed;
  d.metadata["level"] = level;
  d.metadata["alpha"] = constants.alpha;
  d.metadata["sigma0"] = constants.sigma0;
  d.metadata["x0"] = constants.x0;
  d.metadata["T"] = constants.T;
  d.metadata["init_log_var"] = constants.init_log_var;
  d.metadata["op_time_ratio"] = op_time_ratio;
  d.metadata["latent"] = [&] {
    std::vector<double> xs;
    for (std::size_t k = 0; k <= constants.T; ++k) xs.push_back(traj.x_at(k));
    return xs;
  }();
  return d;
}

/// Increments x_k - x_{k-1}, k = 1..n, of one simulated latent path.
template <StateSpaceModel M>
std::vector<double> simulate_increments(const M& model, const typename M::Params& theta, int level,
                                        std::size_t n, const Subordinator& clock, RngStream& rng) {
  const auto traj = sample_trajectory(model, theta, level, n, clock, rng);
  std::vector<double> out;
  for (std::size_t k = 1; k <= n; ++k) out.push_back(traj.x_at(k) - traj.x_at(k - 1));
  return out;
}

}  // namespace tcsde
