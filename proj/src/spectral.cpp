#include "svar/spectral.hpp"

#include <unsupported/Eigen/FFT>

#include <cmath>
#include <fstream>
#include <sstream>

namespace svar {

std::vector<std::string> default_series_names(Index k) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(k));
  for (Index i = 0; i < k; ++i) names.push_back("Y" + std::to_string(i + 1));
  return names;
}

TimeSeries::TimeSeries(MatrixXd values, std::vector<std::string> names)
    : values_(std::move(values)), names_(std::move(names)) {
  require(values_.rows() >= 2, "time series: need at least 2 observations");
  require(values_.cols() >= 1, "time series: need at least 1 series");
  require(values_.allFinite(), "time series: non-finite observation");
  if (names_.empty()) names_ = default_series_names(values_.cols());
  require(static_cast<Index>(names_.size()) == values_.cols(),
          "time series: name count does not match column count");
}

TimeSeries TimeSeries::slice(Index begin, Index count) const {
  require(begin >= 0 && count >= 0 && begin + count <= length(), "time series: slice out of range");
  return TimeSeries(values_.middleRows(begin, count), names_);
}

namespace {

std::vector<std::string> split_row(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream ss(line);
  std::string cell;
  while (std::getline(ss, cell, ',')) {
    const auto first = cell.find_first_not_of(" \t\r\"");
    const auto last = cell.find_last_not_of(" \t\r\"");
    cells.push_back(first == std::string::npos ? std::string{} : cell.substr(first, last - first + 1));
  }
  return cells;
}

}  // namespace

TimeSeries read_csv(std::istream& in) {
  std::string line;
  require(static_cast<bool>(std::getline(in, line)), "csv: missing header row");
  auto names = split_row(line);
  require(!names.empty(), "csv: empty header");
  std::vector<std::vector<double>> rows;
  Index lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto cells = split_row(line);
    require(cells.size() == names.size(),
            "csv: row " + std::to_string(lineno) + " has " + std::to_string(cells.size()) +
                " fields, expected " + std::to_string(names.size()));
    std::vector<double> row;
    row.reserve(cells.size());
    for (const auto& c : cells) {
      std::size_t used = 0;
      double v = 0;
      try {
        v = std::stod(c, &used);
      } catch (const std::exception&) {
        used = 0;
      }
      require(used == c.size() && !c.empty(),
              "csv: cannot parse '" + c + "' on row " + std::to_string(lineno));
      row.push_back(v);
    }
    rows.push_back(std::move(row));
  }
  MatrixXd values(static_cast<Index>(rows.size()), static_cast<Index>(names.size()));
  for (Index t = 0; t < values.rows(); ++t)
    for (Index k = 0; k < values.cols(); ++k) values(t, k) = rows[t][k];
  return TimeSeries(std::move(values), std::move(names));
}

TimeSeries read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidInput("csv: cannot open " + path);
  return read_csv(in);
}

void write_csv(std::ostream& out, const TimeSeries& series) {
  const auto& names = series.names();
  for (std::size_t k = 0; k < names.size(); ++k) out << (k ? "," : "") << names[k];
  out << '\n';
  out.precision(17);
  for (Index t = 0; t < series.length(); ++t) {
    for (Index k = 0; k < series.dim(); ++k) out << (k ? "," : "") << series.values()(t, k);
    out << '\n';
  }
}

MatrixXcd full_dft(const MatrixXd& values) {
  require(values.allFinite(), "dft: non-finite input");
  const Index n = values.rows();
  Eigen::FFT<double> fft;
  MatrixXcd out(values.cols(), n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  std::vector<std::complex<double>> in(static_cast<std::size_t>(n)), res(static_cast<std::size_t>(n));
  for (Index k = 0; k < values.cols(); ++k) {
    for (Index t = 0; t < n; ++t) in[t] = values(t, k);
    fft.fwd(res.data(), in.data(), n);
    for (Index f = 0; f < n; ++f) out(k, f) = res[f] * scale;
  }
  return out;
}

DftFrame dft(const TimeSeries& series) {
  require(series.length() >= 4, "dft: series too short (need T >= 4)");
  const Index t_even = series.length() - series.length() % 2;
  const MatrixXcd full = full_dft(series.values().topRows(t_even));
  DftFrame frame;
  frame.length = t_even;
  const Index retained = t_even / 2 - 1;
  frame.coefficients = full.middleCols(1, retained);
  frame.frequencies.reserve(static_cast<std::size_t>(retained));
  for (Index n = 1; n <= retained; ++n)
    frame.frequencies.push_back(static_cast<double>(n) / static_cast<double>(t_even));
  return frame;
}

int default_half_window(Index k) { return static_cast<int>((k + 1) / 2); }

Index smoothed_frequency_count(Index length, int half_window) {
  const Index window = 2 * static_cast<Index>(half_window) + 1;
  const Index numer = length / 2 - half_window - 1;
  return numer < 0 ? 0 : numer / window;
}

HermitianSpectrum smoothed_spectrum(const DftFrame& frames, int half_window) {
  require(half_window >= 0, "smoothed_spectrum: negative half window");
  const Index k = frames.coefficients.rows();
  const int window = 2 * half_window + 1;
  require(window >= k, "smoothed_spectrum: window L = 2m+1 = " + std::to_string(window) +
                           " is smaller than K = " + std::to_string(k));
  const Index count = smoothed_frequency_count(frames.length, half_window);
  require(count >= 1, "smoothed_spectrum: series too short for half window " +
                          std::to_string(half_window));

  std::vector<MatrixXcd> mats;
  std::vector<double> freqs;
  mats.reserve(static_cast<std::size_t>(count));
  for (Index l = 0; l < count; ++l) {
    // centre index (1-based Fourier index), column = index - 1
    const Index centre = l * window + half_window + 1;
    MatrixXcd acc = MatrixXcd::Zero(k, k);
    for (Index off = -half_window; off <= half_window; ++off) {
      const auto d = frames.coefficients.col(centre + off - 1);
      acc.selfadjointView<Eigen::Lower>().rankUpdate(d);
    }
    acc /= static_cast<double>(window);
    mats.push_back(std::move(acc));
    freqs.push_back(static_cast<double>(centre) / static_cast<double>(frames.length));
  }
  return HermitianSpectrum(std::move(mats), std::move(freqs), window);
}

HermitianSpectrum estimate_spectrum(const TimeSeries& series, int half_window) {
  return smoothed_spectrum(dft(series), half_window);
}

}  // namespace svar
