#pragma once

#include <array>
#include <string>
#include <vector>

#include "qrad/series.hpp"

namespace qrad {

/// Taper applied before the DFT.  blackman_harris (4-term, -92 dB sidelobes)
/// is the default wherever leakage budgets matter (zitterbewegung band-power
/// splits); hann is fine for plain peak location.
enum class Window { rectangular, hann, blackman, blackman_harris };

const char* window_name(Window w);
Window window_from_name(const std::string& name);

struct SpectrumPeak {
  double omega = 0.0;      ///< parabolically interpolated angular frequency
  double amplitude = 0.0;  ///< interpolated magnitude
  int bin = 0;             ///< index of the hosting DFT bin
};

/// One-sided magnitude spectrum of a windowed series.
struct Spectrum {
  std::vector<double> omega;      ///< bin centres, 0 .. pi/dt
  std::vector<double> amplitude;  ///< window-normalised magnitude per bin
  std::vector<SpectrumPeak> peaks;
  double bin_width = 0.0;
  Window window = Window::hann;
  bool mean_removed = true;

  /// Sum of squared bin magnitudes with omega in [lo, hi); the DC bin is
  /// excluded whenever lo > 0.
  double band_power(double lo, double hi) const;
  double max_amplitude() const;
};

/// Windowed DFT with peak extraction.
///
/// The weighted mean is removed before windowing (by default) so that slow
/// drift terms do not leak across the low-frequency band; peaks are local
/// maxima above `peak_rel_threshold` times the spectrum maximum, refined by
/// parabolic interpolation on the magnitude.  Needs >= 32 samples.
Spectrum spectrum(const ScalarSeries& s, Window window = Window::hann,
                  double peak_rel_threshold = 1e-3, bool remove_mean = true);

/// Vector series variant: component spectra are combined into a single
/// magnitude per bin, sqrt(|X_x|^2 + |X_y|^2 + |X_z|^2).
Spectrum spectrum(const VecSeries& s, Window window = Window::hann,
                  double peak_rel_threshold = 1e-3, bool remove_mean = true);

}  // namespace qrad
