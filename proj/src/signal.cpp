#include "phaser/signal.hpp"

#include <algorithm>
#include <cmath>

namespace phaser {

namespace {

bool is_power_of_two(std::size_t n) { return n != 0 && (n & (n - 1)) == 0; }

// Iterative radix-2 Cooley-Tukey, no scaling.
void fft_radix2(std::vector<std::complex<double>>& a, bool positive_kernel) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = (positive_kernel ? 2.0 : -2.0) * kPi / static_cast<double>(len);
    const std::complex<double> step(std::cos(ang), std::sin(ang));
    for (std::size_t base = 0; base < n; base += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        const auto u = a[base + k];
        const auto v = a[base + k + len / 2] * w;
        a[base + k] = u + v;
        a[base + k + len / 2] = u - v;
        w *= step;
      }
    }
  }
}

// O(N^2) fallback for even lengths that are not powers of two.
void dft_direct(std::vector<std::complex<double>>& a, bool positive_kernel) {
  const std::size_t n = a.size();
  std::vector<std::complex<double>> out(n);
  const double sign = positive_kernel ? 1.0 : -1.0;
  for (std::size_t k = 0; k < n; ++k) {
    std::complex<double> acc(0.0, 0.0);
    for (std::size_t m = 0; m < n; ++m) {
      const double ang = sign * 2.0 * kPi * static_cast<double>(k * m % n) / static_cast<double>(n);
      acc += a[m] * std::complex<double>(std::cos(ang), std::sin(ang));
    }
    out[k] = acc;
  }
  a.swap(out);
}

void transform(std::vector<std::complex<double>>& a, bool positive_kernel) {
  if (is_power_of_two(a.size())) {
    fft_radix2(a, positive_kernel);
  } else {
    dft_direct(a, positive_kernel);
  }
}

void check_real_input(const Eigen::Ref<const Eigen::VectorXd>& x, const char* who) {
  if (x.size() == 0) throw DataError(std::string(who) + ": empty input");
  if (x.size() < 2 || x.size() % 2 != 0)
    throw DataError(std::string(who) + ": length must be even and >= 2, got " +
                    std::to_string(x.size()));
  if (!x.allFinite()) throw NumericError(std::string(who) + ": non-finite input");
}

}  // namespace

void TimeSeries::validate() const {
  if (values.rows() < 1) throw DataError("TimeSeries: V must be >= 1");
  if (values.cols() < 4) throw DataError("TimeSeries: T must be >= 4");
  if (!values.allFinite()) throw NumericError("TimeSeries: non-finite values");
  if (!(sample_rate_hz > 0.0)) throw DataError("TimeSeries: sample rate must be positive");
}

Eigen::VectorXcd dft_forward(const Eigen::Ref<const Eigen::VectorXd>& x, FourierSign sign) {
  check_real_input(x, "dft_forward");
  std::vector<std::complex<double>> a(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) a[static_cast<std::size_t>(i)] = {x[i], 0.0};
  transform(a, sign == FourierSign::Positive);
  Eigen::VectorXcd out(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) out[i] = a[static_cast<std::size_t>(i)];
  return out;
}

Eigen::VectorXd dft_inverse(const Eigen::Ref<const Eigen::VectorXcd>& spectrum,
                            FourierSign sign) {
  const Eigen::Index n = spectrum.size();
  if (n == 0) throw DataError("dft_inverse: empty spectrum");
  if (n < 2 || n % 2 != 0)
    throw DataError("dft_inverse: length must be even and >= 2, got " + std::to_string(n));
  if (!spectrum.allFinite()) throw NumericError("dft_inverse: non-finite spectrum");

  std::vector<std::complex<double>> a(static_cast<std::size_t>(n));
  for (Eigen::Index i = 0; i < n; ++i) a[static_cast<std::size_t>(i)] = spectrum[i];
  // Inverse kernel is the conjugate of the forward one.
  transform(a, sign == FourierSign::Negative);

  Eigen::VectorXd out(n);
  double max_imag = 0.0;
  double max_real = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto v = a[static_cast<std::size_t>(i)] / static_cast<double>(n);
    out[i] = v.real();
    max_imag = std::max(max_imag, std::abs(v.imag()));
    max_real = std::max(max_real, std::abs(v.real()));
  }
  if (max_imag > 1e-6 * std::max(1.0, max_real))
    throw NumericError("dft_inverse: imaginary residue " + std::to_string(max_imag) +
                       " exceeds tolerance; spectrum is not Hermitian");
  return out;
}

Eigen::VectorXd hilbert(const Eigen::Ref<const Eigen::VectorXd>& x) {
  if (x.size() < 4 || x.size() % 2 != 0)
    throw DataError("hilbert: length must be even and >= 4, got " + std::to_string(x.size()));
  if (!x.allFinite()) throw NumericError("hilbert: non-finite input");

  const Eigen::Index n = x.size();
  Eigen::VectorXcd spec = dft_forward(x);
  const std::complex<double> minus_i(0.0, -1.0);
  const std::complex<double> plus_i(0.0, 1.0);
  spec[0] = 0.0;
  spec[n / 2] = 0.0;
  for (Eigen::Index k = 1; k < n / 2; ++k) spec[k] *= minus_i;
  for (Eigen::Index k = n / 2 + 1; k < n; ++k) spec[k] *= plus_i;
  return dft_inverse(spec);
}

Eigen::VectorXd hanning_window(int length) {
  if (length < 2) throw DataError("hanning_window: length must be >= 2");
  Eigen::VectorXd w(length);
  for (int i = 0; i < length; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * kPi * i / static_cast<double>(length - 1)));
  return w;
}

namespace {

void stft_one_variate(const Eigen::Ref<const Eigen::RowVectorXd>& x, int seg_len, int nfft,
                      FourierSign sign, Eigen::MatrixXcd& out, Eigen::Index frame_slots) {
  const Eigen::VectorXd w = hanning_window(seg_len);
  const Eigen::Index n_frames = x.size() / seg_len;  // hop = seg_len
  out.setZero(nfft / 2 + 1, frame_slots);
  std::vector<std::complex<double>> buf(static_cast<std::size_t>(nfft));
  for (Eigen::Index f = 0; f < n_frames; ++f) {
    std::fill(buf.begin(), buf.end(), std::complex<double>(0.0, 0.0));
    for (int i = 0; i < seg_len; ++i)
      buf[static_cast<std::size_t>(i)] = {x[f * seg_len + i] * w[i], 0.0};
    transform(buf, sign == FourierSign::Positive);
    for (int k = 0; k <= nfft / 2; ++k) out(k, f) = buf[static_cast<std::size_t>(k)];
  }
}

void check_stft_args(const TimeSeries& x, int seg_len, int nfft) {
  x.validate();
  if (seg_len < 2) throw DataError("stft: seg_len must be >= 2");
  if (!is_power_of_two(static_cast<std::size_t>(nfft)))
    throw DataError("stft: nfft must be a power of two, got " + std::to_string(nfft));
  if (nfft < seg_len) throw DataError("stft: nfft must be >= seg_len");
  if (x.timesteps() < seg_len)
    throw DataError("stft: series shorter than one segment (T=" +
                    std::to_string(x.timesteps()) + ", seg_len=" + std::to_string(seg_len) + ")");
}

}  // namespace

Spectrogram stft(const TimeSeries& x, int seg_len, int nfft, FourierSign sign) {
  check_stft_args(x, seg_len, nfft);
  Spectrogram s;
  s.seg_len = seg_len;
  s.nfft = nfft;
  s.hop = seg_len;
  s.channels.resize(static_cast<std::size_t>(x.variates()));
  const Eigen::Index n_frames = x.timesteps() / seg_len;
  for (Eigen::Index v = 0; v < x.variates(); ++v)
    stft_one_variate(x.values.row(v), seg_len, nfft, sign,
                     s.channels[static_cast<std::size_t>(v)], n_frames);
  return s;
}

Spectrogram stft_multi_window(const TimeSeries& x, const std::vector<int>& seg_lens, int nfft,
                              FourierSign sign) {
  if (static_cast<Eigen::Index>(seg_lens.size()) != x.variates())
    throw DataError("stft_multi_window: need one segment length per variate");
  Eigen::Index max_frames = 0;
  for (int w : seg_lens) {
    check_stft_args(x, w, nfft);
    max_frames = std::max(max_frames, x.timesteps() / w);
  }
  Spectrogram s;
  s.seg_len = *std::min_element(seg_lens.begin(), seg_lens.end());
  s.nfft = nfft;
  s.hop = s.seg_len;
  s.channels.resize(static_cast<std::size_t>(x.variates()));
  for (Eigen::Index v = 0; v < x.variates(); ++v)
    stft_one_variate(x.values.row(v), seg_lens[static_cast<std::size_t>(v)], nfft, sign,
                     s.channels[static_cast<std::size_t>(v)], max_frames);
  return s;
}

MagPhase mag_phase(const Spectrogram& s) {
  MagPhase mp;
  mp.mag.resize(s.channels.size());
  mp.pha.resize(s.channels.size());
  for (std::size_t v = 0; v < s.channels.size(); ++v) {
    const Eigen::MatrixXcd& c = s.channels[v];
    if (!c.allFinite()) throw NumericError("mag_phase: non-finite spectrogram entry");
    Eigen::MatrixXd mag(c.rows(), c.cols());
    Eigen::MatrixXd pha(c.rows(), c.cols());
    for (Eigen::Index j = 0; j < c.cols(); ++j) {
      for (Eigen::Index i = 0; i < c.rows(); ++i) {
        const double re = c(i, j).real();
        const double im = c(i, j).imag();
        const double m = std::hypot(re, im);
        mag(i, j) = m;
        double p = (m == 0.0) ? 0.0 : std::atan2(im, re);
        if (p == -kPi) p = kPi;  // keep the range (-pi, pi]
        pha(i, j) = p;
      }
    }
    mp.mag[v] = std::move(mag);
    mp.pha[v] = std::move(pha);
  }
  return mp;
}

void write_spectrogram_csv(const Spectrogram& s, std::ostream& out) {
  out << "variate,bin,frame,re,im\n";
  char line[160];
  for (int v = 0; v < s.variates(); ++v) {
    const Eigen::MatrixXcd& c = s.channels[static_cast<std::size_t>(v)];
    for (Eigen::Index k = 0; k < c.rows(); ++k) {
      for (Eigen::Index f = 0; f < c.cols(); ++f) {
        std::snprintf(line, sizeof(line), "%d,%lld,%lld,%.17g,%.17g\n", v,
                      static_cast<long long>(k), static_cast<long long>(f), c(k, f).real(),
                      c(k, f).imag());
        out << line;
      }
    }
  }
}

}  // namespace phaser
