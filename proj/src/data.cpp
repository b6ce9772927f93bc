#include "enmkf/data.hpp"

#include "enmkf/errors.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <string_view>

namespace enmkf::data {

namespace {

constexpr std::string_view kHeader = "t_min,T_int,T_ext,F_int,F_ext";
constexpr std::string_view kTruthHeader = "t_min,T_int_true,T_ext_true,F_int_true,F_ext_true";

std::string line_error(int line, const std::string& what) {
  return "line " + std::to_string(line) + ": " + what;
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.remove_suffix(1);
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  return s;
}

template <class T>
T parse_cell(std::string_view cell, int line, std::string_view column) {
  cell = trim(cell);
  T value{};
  const auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
  if (cell.empty() || ec != std::errc() || ptr != cell.data() + cell.size())
    throw DataError(line_error(line, "non-numeric value '" + std::string(cell) + "' in column " +
                                         std::string(column)));
  return value;
}

void append_number(std::string& out, double v) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

void write_rows(std::ostream& out, std::string_view header, std::span<const MeasurementRecord> records) {
  std::string text(header);
  text += '\n';
  for (const auto& r : records) {
    text += std::to_string(r.t_min);
    for (double v : {r.T_int, r.T_ext, r.F_int, r.F_ext}) {
      text += ',';
      append_number(text, v);
    }
    text += '\n';
  }
  out << text;
}

}  // namespace

void validate_series(std::span<const MeasurementRecord> records, int first_line) {
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& r = records[i];
    const int line = first_line + static_cast<int>(i);
    if (!std::isfinite(r.T_int) || !std::isfinite(r.T_ext) || !std::isfinite(r.F_int) ||
        !std::isfinite(r.F_ext))
      throw DataError(line_error(line, "non-finite value"));
    if (i == 0) continue;
    const int prev = records[i - 1].t_min;
    if (r.t_min <= prev)
      throw DataError(line_error(line, "t_min " + std::to_string(r.t_min) + " is not increasing"));
    if (r.t_min != prev + 1)
      throw DataError(line_error(line, "gap in t_min from " + std::to_string(prev) + " to " +
                                           std::to_string(r.t_min)));
  }
}

std::vector<MeasurementRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(line_error(1, "missing header"));
  if (trim(line) != kHeader)
    throw DataError(line_error(1, "header must be '" + std::string(kHeader) + "'"));

  static constexpr std::string_view columns[] = {"t_min", "T_int", "T_ext", "F_int", "F_ext"};
  std::vector<MeasurementRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string_view row = trim(line);
    if (row.empty()) continue;
    std::string_view cells[5];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = row.find(',', start);
      if (count == 5) throw DataError(line_error(line_no, "too many columns"));
      cells[count++] = row.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (count != 5) throw DataError(line_error(line_no, "missing column " + std::string(columns[count])));

    MeasurementRecord r;
    r.t_min = parse_cell<int>(cells[0], line_no, columns[0]);
    r.T_int = parse_cell<double>(cells[1], line_no, columns[1]);
    r.T_ext = parse_cell<double>(cells[2], line_no, columns[2]);
    r.F_int = parse_cell<double>(cells[3], line_no, columns[3]);
    r.F_ext = parse_cell<double>(cells[4], line_no, columns[4]);
    if (!records.empty()) {
      const int prev = records.back().t_min;
      if (r.t_min <= prev)
        throw DataError(line_error(line_no, "t_min " + std::to_string(r.t_min) + " is not increasing"));
      if (r.t_min != prev + 1)
        throw DataError(line_error(line_no, "gap in t_min from " + std::to_string(prev) + " to " +
                                                std::to_string(r.t_min)));
    }
    records.push_back(r);
  }
  validate_series(records);
  return records;
}

std::vector<MeasurementRecord> load_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open " + path.string());
  try {
    return read_csv(in);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

void write_csv(std::ostream& out, std::span<const MeasurementRecord> records) {
  write_rows(out, kHeader, records);
}

void write_csv(const std::filesystem::path& path, std::span<const MeasurementRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_rows(out, kHeader, records);
}

void write_truth_csv(const std::filesystem::path& path, std::span<const MeasurementRecord> records) {
  std::ofstream out(path);
  if (!out) throw DataError("cannot write " + path.string());
  write_rows(out, kTruthHeader, records);
}

double BoundaryProfile::operator()(double t_min) const {
  double v = mean;
  for (const auto& s : terms) v += s.amplitude * std::sin(2.0 * std::numbers::pi * t_min / s.period_min + s.phase);
  return v;
}

void SyntheticSpec::validate() const {
  cfg.validate();
  if (!(truth.R > 0.0) || !(truth.rhoC > 0.0)) throw ConfigError("synthetic: truth parameters must be positive");
  if (horizon_min < 10) throw ConfigError("synthetic: horizon must be at least 10 minutes");
  if (!(noise.var_T >= 0.0) || !(noise.var_Fint >= 0.0) || !(noise.var_Fext >= 0.0))
    throw ConfigError("synthetic: noise variances must be >= 0");
  for (const auto* p : {&T_int, &T_ext})
    for (const auto& s : p->terms)
      if (!(s.period_min > 0.0)) throw ConfigError("synthetic: sinusoid period must be positive");
}

SyntheticData generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const auto ops = wall::build_operators(spec.cfg, spec.truth);
  const Eigen::Index n = spec.cfg.node_count();

  SyntheticData out;
  out.states.resize(n, spec.horizon_min + 1);
  out.states.col(0) = wall::initial_condition(spec.T_int(0.0), spec.T_ext(0.0), spec.cfg).values;
  out.records.reserve(static_cast<std::size_t>(spec.horizon_min));
  out.truth.reserve(static_cast<std::size_t>(spec.horizon_min));

  std::mt19937_64 engine(spec.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  const double sd_t = std::sqrt(spec.noise.var_T);
  const double sd_fi = std::sqrt(spec.noise.var_Fint);
  const double sd_fe = std::sqrt(spec.noise.var_Fext);

  Vector u(2);
  for (int k = 1; k <= spec.horizon_min; ++k) {
    u << spec.T_int(k), spec.T_ext(k);
    out.states.col(k) = ops.propagate(out.states.col(k - 1), u);
    const auto flux = wall::flux_observe(out.states.col(k), spec.truth.R, spec.cfg);
    const MeasurementRecord clean{k, u(0), u(1), flux[0], flux[1]};
    out.truth.push_back(clean);

    MeasurementRecord noisy = clean;
    noisy.T_int += sd_t * normal(engine);
    noisy.T_ext += sd_t * normal(engine);
    noisy.F_int += sd_fi * normal(engine);
    noisy.F_ext += sd_fe * normal(engine);
    out.records.push_back(noisy);
  }
  return out;
}

double estimate_noise_variance(std::span<const double> series, int window) {
  if (window < 3 || window % 2 == 0) throw ConfigError("noise estimate: window must be odd and >= 3");
  const auto len = static_cast<std::ptrdiff_t>(series.size());
  if (len < window) throw DataError("noise estimate: series shorter than the window");

  const std::ptrdiff_t half = window / 2;
  double running = 0.0;
  for (std::ptrdiff_t i = 0; i < window; ++i) running += series[static_cast<std::size_t>(i)];

  double sum = 0.0;
  double sum_sq = 0.0;
  std::ptrdiff_t count = 0;
  for (std::ptrdiff_t c = half; c + half < len; ++c) {
    if (c > half) {
      running += series[static_cast<std::size_t>(c + half)] - series[static_cast<std::size_t>(c - half - 1)];
    }
    const double r = series[static_cast<std::size_t>(c)] - running / window;
    sum += r;
    sum_sq += r * r;
    ++count;
  }
  if (count < 2) return 0.0;
  const double mean = sum / static_cast<double>(count);
  const double var = std::max(0.0, (sum_sq - static_cast<double>(count) * mean * mean) / static_cast<double>(count - 1));
  return var / (1.0 - 1.0 / window);
}

}  // namespace enmkf::data
