#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <limits>
#include <sstream>

#include "phaser/signal.hpp"
#include "test_util.hpp"

using namespace phaser;

TEST_CASE("dft of a constant vector is DC only") {
  Eigen::VectorXd x(4);
  x << 1, 1, 1, 1;
  const Eigen::VectorXcd s = dft_forward(x);
  CHECK(std::abs(s[0] - std::complex<double>(4.0, 0.0)) < 1e-12);
  for (int k = 1; k < 4; ++k) CHECK(std::abs(s[k]) < 1e-12);
}

TEST_CASE("dft round trip recovers the input") {
  const Eigen::VectorXd x = testutil::random_vector(128, 42);
  const Eigen::VectorXd back = dft_inverse(dft_forward(x));
  CHECK(testutil::rms(back - x) < 1e-12);
}

TEST_CASE("dft round trip holds on non-power-of-two even lengths") {
  for (int n : {6, 10, 100, 200}) {
    const Eigen::VectorXd x = testutil::random_vector(n, 7 + n);
    CHECK(testutil::rms(dft_inverse(dft_forward(x)) - x) < 1e-12);
  }
}

TEST_CASE("bin-aligned cosine concentrates at its conjugate bin pair") {
  const int n = 32;
  const Eigen::VectorXd x = testutil::tone(n, 3);
  const Eigen::VectorXcd s = dft_forward(x);
  const Eigen::VectorXcd oracle = testutil::dft_oracle(x);
  for (int k = 0; k < n; ++k) CHECK(std::abs(s[k] - oracle[k]) < 1e-10);
  CHECK(std::abs(s[3]) == doctest::Approx(16.0).epsilon(1e-10));
  CHECK(std::abs(s[29]) == doctest::Approx(16.0).epsilon(1e-10));
  for (int k = 0; k < n; ++k) {
    if (k == 3 || k == 29) continue;
    CHECK(std::abs(s[k]) < 1e-9);
  }
}

TEST_CASE("fft agrees with the direct-summation oracle on random input") {
  const Eigen::VectorXd x = testutil::random_vector(64, 99);
  const Eigen::VectorXcd s = dft_forward(x);
  const Eigen::VectorXcd oracle = testutil::dft_oracle(x);
  for (int k = 0; k < 64; ++k) CHECK(std::abs(s[k] - oracle[k]) < 1e-10);
}

TEST_CASE("positive-exponent convention conjugates the spectrum") {
  const Eigen::VectorXd x = testutil::random_vector(32, 5);
  const Eigen::VectorXcd neg = dft_forward(x);
  const Eigen::VectorXcd pos = dft_forward(x, FourierSign::Positive);
  for (int k = 0; k < 32; ++k) {
    CHECK(std::abs(pos[k] - std::conj(neg[k])) < 1e-10);
    CHECK(std::abs(std::abs(pos[k]) - std::abs(neg[k])) < 1e-10);
  }
  CHECK(testutil::rms(dft_inverse(pos, FourierSign::Positive) - x) < 1e-12);
}

TEST_CASE("dft rejects bad input") {
  CHECK_THROWS_AS(dft_forward(Eigen::VectorXd()), DataError);
  CHECK_THROWS_AS(dft_forward(Eigen::VectorXd::Zero(5)), DataError);
  Eigen::VectorXd bad = Eigen::VectorXd::Zero(8);
  bad[3] = std::nan("");
  CHECK_THROWS_AS(dft_forward(bad), NumericError);
}

TEST_CASE("hilbert turns 2cos into 2sin on a bin-aligned tone") {
  const int n = 128;
  const int bin = 5;
  const Eigen::VectorXd x = testutil::tone(n, bin, 2.0);
  Eigen::VectorXd expected(n);
  for (int i = 0; i < n; ++i) expected[i] = 2.0 * std::sin(2.0 * kPi * bin * i / n);
  CHECK(testutil::rms(hilbert(x) - expected) < 1e-9);
}

TEST_CASE("hilbert annihilates a constant") {
  const Eigen::VectorXd x = Eigen::VectorXd::Constant(16, 3.5);
  CHECK(hilbert(x).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("hilbert is an anti-involution away from DC and Nyquist") {
  const Eigen::VectorXd x = testutil::strip_dc_nyquist(testutil::random_vector(64, 11));
  CHECK(testutil::rms(hilbert(hilbert(x)) + x) < 1e-9);
}

TEST_CASE("hilbert preserves magnitude off DC and Nyquist") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd x = testutil::random_vector(64, 1000 + seed);
    const Eigen::VectorXcd sx = dft_forward(x);
    const Eigen::VectorXcd sh = dft_forward(hilbert(x));
    for (int k = 1; k < 64; ++k) {
      if (k == 32) continue;
      CHECK(std::abs(std::abs(sh[k]) - std::abs(sx[k])) < 1e-9);
    }
  }
}

TEST_CASE("hilbert shifts the tone-bin phase by -pi/2") {
  const int n = 64;
  const int bin = 7;
  const Eigen::VectorXd x = testutil::tone(n, bin);
  const std::complex<double> before = dft_forward(x)[bin];
  const std::complex<double> after = dft_forward(hilbert(x))[bin];
  double delta = std::arg(after) - std::arg(before);
  while (delta <= -kPi) delta += 2.0 * kPi;
  while (delta > kPi) delta -= 2.0 * kPi;
  CHECK(std::abs(delta + kPi / 2) < 1e-9);
}

TEST_CASE("hilbert output is orthogonal to its input") {
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Eigen::VectorXd x = testutil::strip_dc_nyquist(testutil::random_vector(128, 50 + seed));
    const Eigen::VectorXd h = hilbert(x);
    const double cosine = std::abs(x.dot(h)) / (x.norm() * h.norm());
    CHECK(cosine < 1e-9);
  }
}

TEST_CASE("hilbert rejects odd length and non-finite input") {
  CHECK_THROWS_AS(hilbert(Eigen::VectorXd::Zero(7)), DataError);
  Eigen::VectorXd bad = Eigen::VectorXd::Ones(8);
  bad[0] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(hilbert(bad), NumericError);
}

TEST_CASE("hanning window of length 4") {
  const Eigen::VectorXd w = hanning_window(4);
  CHECK(w[0] == doctest::Approx(0.0));
  CHECK(w[1] == doctest::Approx(0.75));
  CHECK(w[2] == doctest::Approx(0.75));
  CHECK(w[3] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("stft shape follows the configuration") {
  TimeSeries ts;
  ts.sample_rate_hz = 20.0;
  ts.values = Eigen::MatrixXd::Zero(3, 128);
  phaser::Rng rng(3);
  for (Eigen::Index v = 0; v < 3; ++v)
    for (Eigen::Index t = 0; t < 128; ++t) ts.values(v, t) = rng.normal();
  const Spectrogram s = stft(ts, 4, 1024);
  CHECK(s.variates() == 3);
  CHECK(s.bins() == 513);
  CHECK(s.frames() == 32);
  CHECK(s.hop == 4);
}

TEST_CASE("stft of the zero signal is identically zero") {
  TimeSeries ts;
  ts.values = Eigen::MatrixXd::Zero(2, 64);
  const Spectrogram s = stft(ts, 4, 16);
  for (const auto& c : s.channels) CHECK(c.cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("unit impulse at sample 1 fills frame 0 with the window value") {
  TimeSeries ts;
  ts.values = Eigen::MatrixXd::Zero(1, 16);
  ts.values(0, 1) = 1.0;
  const Spectrogram s = stft(ts, 4, 64);
  for (Eigen::Index k = 0; k < s.bins(); ++k)
    CHECK(std::abs(s.channels[0](k, 0)) == doctest::Approx(0.75).epsilon(1e-12));
  for (Eigen::Index f = 1; f < s.frames(); ++f)
    CHECK(s.channels[0].col(f).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("stft is linear") {
  TimeSeries x, y, mix;
  x.values = testutil::random_vector(64, 21).transpose();
  y.values = testutil::random_vector(64, 22).transpose();
  const double a = 1.7, b = -0.4;
  mix.values = a * x.values + b * y.values;
  const Spectrogram sx = stft(x, 8, 16);
  const Spectrogram sy = stft(y, 8, 16);
  const Spectrogram sm = stft(mix, 8, 16);
  const Eigen::MatrixXcd expect = a * sx.channels[0] + b * sy.channels[0];
  CHECK((sm.channels[0] - expect).cwiseAbs().maxCoeff() < 1e-10);
}

TEST_CASE("stft drops trailing samples that do not fill a frame") {
  TimeSeries ts;
  ts.values = testutil::random_vector(130, 8).transpose();
  const Spectrogram s = stft(ts, 4, 8);
  CHECK(s.frames() == 32);
}

TEST_CASE("stft validates its arguments") {
  TimeSeries ts;
  ts.values = Eigen::MatrixXd::Zero(1, 8);
  CHECK_THROWS_AS(stft(ts, 16, 32), DataError);  // T < seg_len
  CHECK_THROWS_AS(stft(ts, 4, 2), DataError);    // nfft < seg_len
  CHECK_THROWS_AS(stft(ts, 4, 24), DataError);   // nfft not a power of 2
}

TEST_CASE("multi-window stft pads shorter variates onto a common grid") {
  TimeSeries ts;
  ts.values = Eigen::MatrixXd::Random(2, 64);
  const Spectrogram s = stft_multi_window(ts, {4, 16}, 32);
  CHECK(s.bins() == 17);
  CHECK(s.frames() == 16);          // driven by the shortest window
  CHECK(s.channels[1].col(4).cwiseAbs().maxCoeff() == 0.0);  // variate 1 has 4 frames
}

TEST_CASE("mag_phase basics") {
  Spectrogram s;
  s.seg_len = 2;
  s.nfft = 4;
  s.hop = 2;
  Eigen::MatrixXcd c(3, 1);
  c(0, 0) = {3.0, 4.0};
  c(1, 0) = {0.0, 0.0};
  c(2, 0) = {1.0, -1.0};
  s.channels.push_back(c);
  const MagPhase mp = mag_phase(s);
  CHECK(mp.mag[0](0, 0) == doctest::Approx(5.0));
  CHECK(mp.pha[0](0, 0) == doctest::Approx(std::atan2(4.0, 3.0)));
  CHECK(mp.pha[0](0, 0) == doctest::Approx(0.92730).epsilon(1e-4));
  CHECK(mp.mag[0](1, 0) == 0.0);
  CHECK(mp.pha[0](1, 0) == 0.0);
  CHECK(mp.mag[0](2, 0) == doctest::Approx(std::sqrt(2.0)));
  CHECK(mp.pha[0](2, 0) == doctest::Approx(-kPi / 4));
}

TEST_CASE("phase stays in (-pi, pi]") {
  Spectrogram s;
  Eigen::MatrixXcd c(1, 1);
  c(0, 0) = {-1.0, -0.0};  // atan2 would give -pi
  s.channels.push_back(c);
  const MagPhase mp = mag_phase(s);
  CHECK(mp.pha[0](0, 0) == doctest::Approx(kPi));
}

TEST_CASE("spectrogram csv dump is well formed") {
  TimeSeries ts;
  ts.values = Eigen::MatrixXd::Random(2, 8);
  const Spectrogram s = stft(ts, 4, 4);
  std::ostringstream out;
  write_spectrogram_csv(s, out);
  const std::string text = out.str();
  CHECK(text.rfind("variate,bin,frame,re,im\n", 0) == 0);
  const auto lines = std::count(text.begin(), text.end(), '\n');
  CHECK(lines == 1 + 2 * 3 * 2);  // header + V*bins*frames
}
