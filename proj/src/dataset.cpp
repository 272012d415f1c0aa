#include "badtime/dataset.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

namespace badtime {

namespace {

std::string trim(std::string_view s) {
  auto is_space = [](char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; };
  while (!s.empty() && is_space(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_space(s.back())) s.remove_suffix(1);
  return std::string(s);
}

std::vector<std::string> split_fields(const std::string& line) {
  std::vector<std::string> out;
  std::string_view rest(line);
  while (true) {
    auto pos = rest.find(',');
    out.push_back(trim(rest.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    rest.remove_prefix(pos + 1);
  }
  return out;
}

std::optional<double> parse_real(const std::string& cell) {
  if (cell.empty()) return std::nullopt;
  double v = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  if (*first == '+') ++first;
  auto [ptr, ec] = std::from_chars(first, last, v);
  if (ec != std::errc() || ptr != last || !std::isfinite(v)) return std::nullopt;
  return v;
}

// YYYY-MM-DD prefix; such stamps order lexicographically.
bool looks_iso8601(const std::string& s) {
  if (s.size() < 10) return false;
  for (int i : {0, 1, 2, 3, 5, 6, 8, 9})
    if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
  return s[4] == '-' && s[7] == '-';
}

}  // namespace

std::optional<Index> SeriesMatrix::find(const std::string& name) const {
  auto it = std::find(variable_names.begin(), variable_names.end(), name);
  if (it == variable_names.end()) return std::nullopt;
  return static_cast<Index>(it - variable_names.begin());
}

void WindowSpec::validate() const {
  if (t_in < 1 || t_out < 1 || stride < 1)
    fail(ErrorKind::Config, "window spec requires t_in, t_out, stride >= 1");
}

SeriesMatrix parse_csv(const std::string& text, const std::optional<std::string>& date_column,
                       const std::string& source) {
  std::istringstream in(text);
  std::string line;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    if (!trim(line).empty()) {
      header = split_fields(line);
      break;
    }
  }
  if (header.empty()) fail(ErrorKind::EmptyInput, source + ": empty file");

  std::optional<std::size_t> date_idx;
  if (date_column) {
    auto it = std::find(header.begin(), header.end(), *date_column);
    if (it == header.end())
      fail(ErrorKind::Format, source + ": date column '" + *date_column + "' not in header");
    date_idx = static_cast<std::size_t>(it - header.begin());
  } else if (!header.empty()) {
    std::string first = header.front();
    std::transform(first.begin(), first.end(), first.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    if (first == "date") date_idx = 0;
  }

  SeriesMatrix m;
  std::vector<std::size_t> value_cols;
  for (std::size_t j = 0; j < header.size(); ++j) {
    if (date_idx && j == *date_idx) continue;
    value_cols.push_back(j);
    m.variable_names.push_back(header[j]);
  }
  if (value_cols.empty()) fail(ErrorKind::EmptyInput, source + ": no value columns");

  std::vector<double> cells;
  std::vector<std::string> stamps;
  Index rows = 0;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != header.size()) {
      std::ostringstream msg;
      msg << source << ": row " << line_no << " has " << fields.size() << " fields, expected "
          << header.size();
      fail(ErrorKind::Format, msg.str());
    }
    if (date_idx) stamps.push_back(fields[*date_idx]);
    for (std::size_t k = 0; k < value_cols.size(); ++k) {
      auto v = parse_real(fields[value_cols[k]]);
      if (!v) {
        std::ostringstream msg;
        msg << source << ": cannot parse '" << fields[value_cols[k]] << "' at row " << line_no
            << ", column \"" << header[value_cols[k]] << "\"";
        fail(ErrorKind::Format, msg.str());
      }
      cells.push_back(*v);
    }
    ++rows;
  }
  if (rows == 0) fail(ErrorKind::EmptyInput, source + ": no data rows");

  if (!stamps.empty() && std::all_of(stamps.begin(), stamps.end(), looks_iso8601)) {
    for (std::size_t r = 1; r < stamps.size(); ++r) {
      if (!(stamps[r - 1] < stamps[r])) {
        std::ostringstream msg;
        msg << source << ": timestamps not increasing at data row " << r + 1 << " ('"
            << stamps[r - 1] << "' then '" << stamps[r] << "')";
        fail(ErrorKind::Ordering, msg.str());
      }
    }
  }

  const auto n = static_cast<Index>(value_cols.size());
  m.values = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>>(
      cells.data(), rows, n);
  m.norm_stats.assign(static_cast<std::size_t>(n), NormStats{});
  return m;
}

SeriesMatrix load_csv(const std::string& path, const std::optional<std::string>& date_column) {
  std::ifstream in(path, std::ios::binary);
  if (!in) fail(ErrorKind::Io, "cannot open '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_csv(buf.str(), date_column, path);
}

void write_csv(const SeriesMatrix& m, const std::string& path) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::Io, "cannot write '" + path + "'");
  out << std::setprecision(17);
  for (std::size_t j = 0; j < m.variable_names.size(); ++j)
    out << (j ? "," : "") << m.variable_names[j];
  out << '\n';
  for (Index r = 0; r < m.rows(); ++r) {
    for (Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << m.values(r, c);
    out << '\n';
  }
  if (!out) fail(ErrorKind::Io, "write failed for '" + path + "'");
}

SeriesMatrix zscore_normalize(const SeriesMatrix& m, std::optional<Index> fit_rows) {
  if (m.is_normalized) fail(ErrorKind::State, "series is already normalized");
  const Index rows = fit_rows.value_or(m.rows());
  if (rows < 1 || rows > m.rows())
    fail(ErrorKind::Config, "normalization fit range out of bounds");

  SeriesMatrix out = m;
  out.norm_stats.resize(static_cast<std::size_t>(m.cols()));
  for (Index c = 0; c < m.cols(); ++c) {
    auto fit = m.values.col(c).head(rows);
    const double mean = fit.mean();
    const double var = (fit.array() - mean).square().mean();
    double sd = std::sqrt(var);
    const bool constant = !(sd > 0.0);
    if (constant) sd = 1.0;
    out.norm_stats[static_cast<std::size_t>(c)] = {mean, sd};
    if (constant && rows == m.rows())
      out.values.col(c).setZero();
    else
      out.values.col(c) = (m.values.col(c).array() - mean) / sd;
  }
  out.is_normalized = true;
  return out;
}

SeriesMatrix denormalize(const SeriesMatrix& m) {
  if (!m.is_normalized) fail(ErrorKind::State, "series is not normalized");
  SeriesMatrix out = m;
  for (Index c = 0; c < m.cols(); ++c) {
    const auto& s = m.norm_stats[static_cast<std::size_t>(c)];
    out.values.col(c) = m.values.col(c).array() * s.std + s.mean;
    out.norm_stats[static_cast<std::size_t>(c)] = NormStats{};
  }
  out.is_normalized = false;
  return out;
}

std::vector<WindowIndex> make_windows(Index series_length, const WindowSpec& spec) {
  spec.validate();
  const Index need = spec.t_in + spec.t_out;
  if (series_length < need) {
    std::ostringstream msg;
    msg << "series has " << series_length << " rows; windowing needs at least " << need
        << " (t_in + t_out)";
    fail(ErrorKind::InsufficientData, msg.str());
  }
  std::vector<WindowIndex> out;
  out.reserve(static_cast<std::size_t>((series_length - need) / spec.stride + 1));
  for (Index t = spec.t_in; t + spec.t_out <= series_length; t += spec.stride)
    out.push_back({t});
  return out;
}

std::vector<WindowIndex> make_windows(const SeriesMatrix& m, const WindowSpec& spec) {
  return make_windows(m.rows(), spec);
}

WindowSplit train_valid_split(const std::vector<WindowIndex>& windows, double ratio,
                              const WindowSpec& spec) {
  if (!(ratio > 0.0 && ratio < 1.0)) fail(ErrorKind::Config, "split ratio must lie in (0, 1)");
  const auto count = windows.size();
  const auto n_train = static_cast<std::size_t>(std::ceil(ratio * static_cast<double>(count)));
  if (n_train == 0 || n_train >= count) {
    std::ostringstream msg;
    msg << "split of " << count << " windows at ratio " << ratio << " leaves an empty side";
    fail(ErrorKind::Config, msg.str());
  }

  WindowSplit split;
  split.valid.assign(windows.begin() + static_cast<std::ptrdiff_t>(n_train), windows.end());
  // Validation inputs start here; nothing a train window predicts may reach it.
  Index valid_begin = std::numeric_limits<Index>::max();
  for (const auto& w : split.valid) valid_begin = std::min(valid_begin, w.input_begin(spec));
  for (std::size_t i = 0; i < n_train; ++i)
    if (windows[i].label_end(spec) <= valid_begin) split.train.push_back(windows[i]);

  if (split.train.empty())
    fail(ErrorKind::Config, "no training windows remain after leakage exclusion");
  return split;
}

Index training_rows(const std::vector<WindowIndex>& train, const WindowSpec& spec) {
  Index end = 0;
  for (const auto& w : train) end = std::max(end, w.label_end(spec));
  return end;
}

std::uint64_t checksum(const Matrix& values) {
  std::uint64_t h = 1469598103934665603ULL;
  const auto* bytes = reinterpret_cast<const unsigned char*>(values.data());
  const auto n = static_cast<std::size_t>(values.size()) * sizeof(double);
  for (std::size_t i = 0; i < n; ++i) {
    h ^= bytes[i];
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace badtime
