#include "doctest.h"

#include <sstream>

#include "../oracles.hpp"
#include "cpdd/detail/evolve_kernel.hpp"
#include "cpdd/fitting.hpp"
#include "cpdd/sensing.hpp"
#include "cpdd/special_functions.hpp"

using namespace cpdd;

namespace {

const double kWl = angular(8e6);
const double kT = kPi / kWl;

double fitted_frequency(const ScanResult& s) {
  const auto f = fit_sinusoid(s.x, s.mean);
  return std::abs(f.value("omega"));
}

double theta_after(std::size_t reps, double g) {
  const auto segs = to_segments(build_cxy8(kWl, kT, reps));
  const auto r = detail::evolve_su2(FrameChoice::rotating(), segs, SignalField{g, kWl, 0.0}, kT / 64, {});
  return accumulated_angle(r.final);
}

}  // namespace

TEST_CASE("readout conventions") {
  const detail::Su2 id;
  const auto v = bloch_after(id);
  CHECK(v.x == doctest::Approx(0.0));
  CHECK(v.y == doctest::Approx(-1.0));
  CHECK(v.z == doctest::Approx(0.0));
  CHECK(coherent_contrast(id, Readout::Variance) == doctest::Approx(1.0));
  CHECK(coherent_contrast(id, Readout::Slope) == doctest::Approx(0.0));
  // a z rotation by Θ moves the state around the equator: slope sin Θ, variance cos Θ
  const double th = 0.7;
  const auto r = detail::Su2::rot_z(th);
  CHECK(coherent_contrast(r, Readout::Slope) == doctest::Approx(std::sin(th)));
  CHECK(coherent_contrast(r, Readout::Variance) == doctest::Approx(std::cos(th)));
  CHECK(accumulated_angle(r) == doctest::Approx(th));
  // ideal Ramsey: readout pulse at phase 0 after an identity block gives p0 = 0
  CHECK(readout_population(id, 0.0) == doctest::Approx(0.0).epsilon(1e-15));
  CHECK(readout_population(id, kPi) == doctest::Approx(1.0));
}

TEST_CASE("measurement model") {
  MeasurementModel m;
  m.t2 = 100e-6;
  m.stretch = 2;
  CHECK(m.envelope(100e-6) == doctest::Approx(std::exp(-1.0)));
  CHECK(m.photon_contrast(0.0) == doctest::Approx(0.32));
  MeasurementModel bad;
  bad.photons = 0;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
  bad = {};
  bad.t2 = -1;
  CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("on-resonance oscillation frequency equals g for CX and CXY8") {
  for (Protocol p : {Protocol::CX, Protocol::CXY8}) {
    TimeScanConfig cfg;
    cfg.protocol = p;
    const auto trace = time_scan(cfg, 0.0);
    CHECK(trace.size() == 81);
    CHECK(fitted_frequency(trace) == doctest::Approx(cfg.signal.amplitude).epsilon(0.01));
  }
}

TEST_CASE("accumulated phase grows linearly") {
  const double g = angular(20e3);
  const double t1 = theta_after(10, g), t2 = theta_after(20, g);
  CHECK(t2 == doctest::Approx(2 * t1).epsilon(0.01));
  CHECK(t1 == doctest::Approx(g * 80 * kT).epsilon(0.01));
}

TEST_CASE("a signal in quadrature is suppressed") {
  const auto spec = build_cxy8(kWl, kT, 10);
  MeasurementModel m;
  const double g = angular(20e3);
  const double s0 = ramsey_wrapped_measurement(spec, {g, kWl, 0.0}, {}, Readout::Slope, m);
  const double s90 = ramsey_wrapped_measurement(spec, {g, kWl, kPi / 2}, {}, Readout::Slope, m);
  CHECK(std::abs(s0) > 0.05);
  CHECK(std::abs(s90) <= 0.1 * std::abs(s0));
}

TEST_CASE("CXY8 keeps its contrast far beyond the CX amplitude tolerance") {
  TimeScanConfig cx;
  cx.protocol = Protocol::CX;
  TimeScanConfig c8;
  const std::vector<double> d = {0.0, angular(20e3)};
  const auto a = contrast_vs_detuning(cx, d);
  CHECK(a.mean[1] < 0.5 * a.mean[0]);
  const std::vector<double> e = {0.0, angular(200e3)};
  const auto b = contrast_vs_detuning(c8, e);
  CHECK(b.mean[1] > 0.5 * b.mean[0]);
}

TEST_CASE("scans are reproducible and thread-independent") {
  TimeScanConfig cfg;
  cfg.window = 8e-6;
  const std::vector<double> d = {0.0, angular(50e3), angular(100e3)};
  const auto s = contrast_vs_detuning(cfg, d, Exec::Serial);
  const auto p = contrast_vs_detuning(cfg, d, Exec::Parallel);
  CHECK(s.mean == p.mean);

  OrderScanConfig o;
  o.orders = {4, 8, 16};
  o.shots = 40;
  o.seed = 3;
  const auto a = order_scan(o, Exec::Serial), b = order_scan(o, Exec::Parallel), c = order_scan(o);
  CHECK(a.mean == b.mean);
  CHECK(a.stderr_ == b.stderr_);
  CHECK(c.mean == a.mean);
  o.seed = 4;
  CHECK(order_scan(o).mean != a.mean);

  FrequencyScanConfig f;
  f.signal.amplitude = resonant_amplitude_for_angle(f, 1.0);
  const std::vector<double> fr = {1.65e6, 1.7e6, 1.75e6};
  CHECK(frequency_scan(f, fr, Exec::Serial).mean == frequency_scan(f, fr, Exec::Parallel).mean);
}

TEST_CASE("phase-averaged frequency scan follows J0 on resonance") {
  FrequencyScanConfig f;
  f.signal.amplitude = resonant_amplitude_for_angle(f, 1.5);
  const std::vector<double> fr = {1.7e6};
  const auto s = frequency_scan(f, fr);
  CHECK(s.mean[0] == doctest::Approx(bessel_j0(1.5)).epsilon(0.02));
  f.phase_average = 1;
  f.signal.phase = 0.0;
  CHECK(frequency_scan(f, fr).mean[0] == doctest::Approx(std::cos(1.5)).epsilon(0.02));
}

TEST_CASE("order-scan ensemble reproduces J0 decay") {
  OrderScanConfig o;
  o.orders = {10, 40, 80};
  o.shots = 400;
  const auto s = order_scan(o);
  for (std::size_t k = 0; k < s.size(); ++k)
    CHECK(std::abs(s.mean[k] - bessel_j0(o.amplitude * s.x[k])) < 4 * s.stderr_[k] + 0.01);
  o.shots = 1;
  CHECK_THROWS_AS(order_scan(o), std::invalid_argument);
  o.shots = 10;
  o.orders = {8, 4};
  CHECK_THROWS_AS(order_scan(o), std::invalid_argument);
}

TEST_CASE("Gaussian variance ensemble recovers the rms field") {
  OrderScanConfig o;
  for (std::size_t n = 4; n <= 120; n += 8) o.orders.push_back(n);
  o.shots = 800;
  const double b = 3e-6;
  const auto s = gaussian_variance_scan(o, b);
  const auto fit = fit_gaussian_decay(s.x, s.mean, 0.5, kGammaNV);
  CHECK(fit.value("B_rms") == doctest::Approx(b).epsilon(0.05));
}

TEST_CASE("contrast half width and dip width on synthetic data") {
  ScanResult c;
  c.x = {0, 10, 20, 30};
  c.mean = {1.0, 0.8, 0.4, 0.2};
  c.stderr_.assign(4, 0.0);
  CHECK(contrast_half_width(c) == doctest::Approx(17.5));
  c.mean = {1.0, 0.9, 0.8, 0.7};
  CHECK(std::isinf(contrast_half_width(c)));

  ScanResult d;
  for (int i = -100; i <= 100; ++i) {
    d.x.push_back(i);
    d.mean.push_back(1.0 - 0.8 * 25.0 / (i * i + 25.0));
    d.stderr_.push_back(0);
  }
  CHECK(dip_fwhm(d) == doctest::Approx(10.0).epsilon(0.01));
}

TEST_CASE("spurious summary on a synthetic spectrum") {
  ScanResult s;
  for (int i = 0; i <= 1000; ++i) {
    const double f = 1e6 + 4e3 * i;
    double y = 0.01;
    if (std::abs(f - 2e6) < 5e3) y = 0.9;
    if (std::abs(f - 4e6) <= 10e3) y = 0.1;
    s.x.push_back(f);
    s.mean.push_back(y);
    s.stderr_.push_back(0);
  }
  const std::vector<double> feats = {4e6};
  const auto sum = summarize_spurious(s, 2e6, feats);
  CHECK(sum.baseline == doctest::Approx(0.01));
  CHECK(sum.baseline_sd == doctest::Approx(0.0).epsilon(1e-12));
  REQUIRE(sum.features.size() == 1);
  CHECK(sum.features[0].ratio == doctest::Approx(10.0));
}

TEST_CASE("scan result output") {
  ScanResult s;
  s.x = {1, 2};
  s.mean = {0.5, 0.25};
  s.stderr_ = {0, 0.1};
  std::ostringstream csv, dat;
  s.write_csv(csv);
  s.write_dat(dat);
  CHECK(csv.str().rfind("x,contrast,stderr", 0) == 0);
  CHECK(dat.str().find("0.25") != std::string::npos);
  s.mean.pop_back();
  CHECK_THROWS_AS(s.validate(), std::logic_error);
}
