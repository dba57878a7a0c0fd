#pragma once

#include "svar/core.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace svar {

/// T x K matrix of real observations, one column per series.
class TimeSeries {
 public:
  TimeSeries() = default;
  /// Series names default to Y1..YK when `names` is empty.
  explicit TimeSeries(MatrixXd values, std::vector<std::string> names = {});

  Index length() const { return values_.rows(); }
  Index dim() const { return values_.cols(); }
  const MatrixXd& values() const { return values_; }
  const std::vector<std::string>& names() const { return names_; }

  /// Rows [begin, begin + count).
  TimeSeries slice(Index begin, Index count) const;

 private:
  MatrixXd values_;
  std::vector<std::string> names_;
};

std::vector<std::string> default_series_names(Index k);

TimeSeries read_csv(std::istream& in);
TimeSeries read_csv_file(const std::string& path);
void write_csv(std::ostream& out, const TimeSeries& series);

/// Normalized DFT coefficients at the retained Fourier frequencies n/T,
/// n = 1 .. T/2 - 1. Column n-1 holds d(n/T).
struct DftFrame {
  MatrixXcd coefficients;  // K x (T/2 - 1)
  std::vector<double> frequencies;
  Index length = 0;  // T actually used (even)
};

/// d(w_n) = T^{-1/2} sum_t Y_t exp(-i 2 pi w_n t) over the retained indices.
/// An odd-length series loses its last observation.
DftFrame dft(const TimeSeries& series);

/// The same transform over every index n = 0 .. T-1 (K x T), no truncation.
MatrixXcd full_dft(const MatrixXd& values);

/// Smallest half window with 2 m + 1 >= K + 1.
int default_half_window(Index k);

/// Number of window centres M = floor((T/2 - m - 1) / (2m + 1)).
Index smoothed_frequency_count(Index length, int half_window);

/// Locally averaged periodogram over windows of L = 2m + 1 adjacent Fourier
/// frequencies. Uses the periodogram scaling E[d d^H] ~ f (no 2 pi factor).
HermitianSpectrum smoothed_spectrum(const DftFrame& frames, int half_window);

/// Convenience: dft followed by smoothed_spectrum.
HermitianSpectrum estimate_spectrum(const TimeSeries& series, int half_window);

}  // namespace svar
