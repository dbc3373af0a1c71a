#include "qrad/spectrum.hpp"

#include <algorithm>
#include <cmath>
#include <complex>

#include "qrad/errors.hpp"

namespace qrad {

const char* window_name(Window w) {
  switch (w) {
    case Window::rectangular: return "rectangular";
    case Window::hann: return "hann";
    case Window::blackman: return "blackman";
    case Window::blackman_harris: return "blackman_harris";
  }
  return "?";
}

Window window_from_name(const std::string& name) {
  if (name == "rectangular") return Window::rectangular;
  if (name == "hann") return Window::hann;
  if (name == "blackman") return Window::blackman;
  if (name == "blackman_harris") return Window::blackman_harris;
  throw ConfigError("unknown window '" + name + "'");
}

namespace {

std::vector<double> window_weights(Window w, int n) {
  std::vector<double> wt(n, 1.0);
  auto fill = [&](auto f) {
    for (int i = 0; i < n; ++i) wt[i] = f(2.0 * M_PI * i / (n - 1));
  };
  switch (w) {
    case Window::rectangular: break;
    case Window::hann:
      fill([](double x) { return 0.5 - 0.5 * std::cos(x); });
      break;
    case Window::blackman:
      fill([](double x) { return 0.42 - 0.5 * std::cos(x) + 0.08 * std::cos(2.0 * x); });
      break;
    case Window::blackman_harris:
      fill([](double x) {
        return 0.35875 - 0.48829 * std::cos(x) + 0.14128 * std::cos(2.0 * x) -
               0.01168 * std::cos(3.0 * x);
      });
      break;
  }
  return wt;
}

Spectrum analyse(const std::vector<std::vector<double>>& components, const TimeSampling& times,
                 Window window, double peak_rel_threshold, bool remove_mean) {
  const int n = times.n_samples;
  if (n < 32) throw ConfigError("spectrum: need at least 32 samples");

  const std::vector<double> wt = window_weights(window, n);
  double wsum = 0.0;
  for (double w : wt) wsum += w;

  Spectrum result;
  result.window = window;
  result.mean_removed = remove_mean;
  result.bin_width = 2.0 * M_PI / (n * times.dt);
  const int n_bins = n / 2 + 1;
  result.omega.resize(n_bins);
  result.amplitude.assign(n_bins, 0.0);
  for (int k = 0; k < n_bins; ++k) result.omega[k] = k * result.bin_width;

  std::vector<std::vector<double>> tapered(components.size());
  for (std::size_t c = 0; c < components.size(); ++c) {
    const auto& comp = components[c];
    double mean = 0.0;
    if (remove_mean) {
      // Window-weighted mean: makes the DC bin exactly zero so that drift
      // leakage cannot contaminate the low band.
      double acc = 0.0;
      for (int i = 0; i < n; ++i) acc += wt[i] * comp[i];
      mean = acc / wsum;
    }
    auto& t = tapered[c];
    t.resize(n);
    for (int i = 0; i < n; ++i) t[i] = wt[i] * (comp[i] - mean);
  }

  // Direct DFT: series are short (<= a few thousand samples), and the naive
  // loop keeps the evaluation exactly deterministic with no plan state.
  for (int k = 0; k < n_bins; ++k) {
    double power = 0.0;
    for (const auto& t : tapered) {
      cplx acc{0.0, 0.0};
      const double step = -2.0 * M_PI * k / n;
      for (int i = 0; i < n; ++i) acc += t[i] * std::polar(1.0, step * i);
      power += std::norm(acc);
    }
    // One-sided amplitude, compensated for the window's coherent gain.
    const double one_sided = (k == 0 || (n % 2 == 0 && k == n / 2)) ? 1.0 : 2.0;
    result.amplitude[k] = one_sided * std::sqrt(power) / wsum;
  }

  const double peak_floor = peak_rel_threshold * *std::max_element(result.amplitude.begin(),
                                                                   result.amplitude.end());
  for (int k = 1; k + 1 < n_bins; ++k) {
    const double a = result.amplitude[k];
    if (a < peak_floor) continue;
    if (a < result.amplitude[k - 1] || a <= result.amplitude[k + 1]) continue;
    SpectrumPeak peak;
    peak.bin = k;
    // Parabolic refinement through the three magnitudes around the maximum.
    const double am = result.amplitude[k - 1], ap = result.amplitude[k + 1];
    const double denom = am - 2.0 * a + ap;
    const double delta = (denom != 0.0) ? 0.5 * (am - ap) / denom : 0.0;
    peak.omega = (k + delta) * result.bin_width;
    peak.amplitude = a - 0.25 * (am - ap) * delta;
    result.peaks.push_back(peak);
  }
  return result;
}

}  // namespace

double Spectrum::band_power(double lo, double hi) const {
  double p = 0.0;
  for (std::size_t k = 0; k < omega.size(); ++k) {
    if (k == 0 && lo <= 0.0 && mean_removed) continue;
    if (omega[k] >= lo && omega[k] < hi) p += amplitude[k] * amplitude[k];
  }
  return p;
}

double Spectrum::max_amplitude() const {
  return omega.empty() ? 0.0 : *std::max_element(amplitude.begin(), amplitude.end());
}

Spectrum spectrum(const ScalarSeries& s, Window window, double peak_rel_threshold,
                  bool remove_mean) {
  if (int(s.values.size()) != s.times.n_samples)
    throw ConfigError("spectrum: series length does not match its sampling");
  return analyse({s.values}, s.times, window, peak_rel_threshold, remove_mean);
}

Spectrum spectrum(const VecSeries& s, Window window, double peak_rel_threshold, bool remove_mean) {
  if (int(s.values.size()) != s.times.n_samples)
    throw ConfigError("spectrum: series length does not match its sampling");
  std::vector<std::vector<double>> comps(3);
  for (auto& c : comps) c.reserve(s.values.size());
  for (const Vec3& v : s.values) {
    comps[0].push_back(v.x);
    comps[1].push_back(v.y);
    comps[2].push_back(v.z);
  }
  return analyse(comps, s.times, window, peak_rel_threshold, remove_mean);
}

}  // namespace qrad
