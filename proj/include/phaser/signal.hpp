#pragma once

#include <Eigen/Dense>
#include <complex>
#include <ostream>
#include <vector>

#include "phaser/common.hpp"

namespace phaser {

// Sign of the exponent in the forward transform kernel. Negative is the
// analysis convention used everywhere by default; Positive conjugates the
// spectrum (magnitudes identical) and exists for conformance testing.
enum class FourierSign { Negative, Positive };

// Multivariate sample: V variates (rows) by T time steps (columns).
struct TimeSeries {
  Eigen::MatrixXd values;
  double sample_rate_hz = 1.0;

  Eigen::Index variates() const { return values.rows(); }
  Eigen::Index timesteps() const { return values.cols(); }
  void validate() const;
};

// Full complex spectrum of a real even-length signal, bin k at k*fs/N.
Eigen::VectorXcd dft_forward(const Eigen::Ref<const Eigen::VectorXd>& x,
                             FourierSign sign = FourierSign::Negative);

// Inverse with 1/N scaling. The spectrum must be Hermitian up to numerical
// noise; an imaginary residue above 1e-6 (relative) raises NumericError.
Eigen::VectorXd dft_inverse(const Eigen::Ref<const Eigen::VectorXcd>& spectrum,
                            FourierSign sign = FourierSign::Negative);

// Discrete Hilbert transform: inverse DFT of -i*sgn(xi) * DFT(x), with
// sgn = 0 on the DC and Nyquist bins so the output stays real.
Eigen::VectorXd hilbert(const Eigen::Ref<const Eigen::VectorXd>& x);

// Symmetric Hanning window w[n] = 0.5*(1 - cos(2*pi*n/(W-1))), n in [0, W).
// Endpoints are exactly zero, including for small W.
Eigen::VectorXd hanning_window(int length);

// One-sided STFT tensor: V channels of (nfft/2 + 1) bins by N~ frames.
struct Spectrogram {
  std::vector<Eigen::MatrixXcd> channels;  // bins x frames per variate
  int seg_len = 0;
  int nfft = 0;
  int hop = 0;

  int variates() const { return static_cast<int>(channels.size()); }
  Eigen::Index bins() const { return channels.empty() ? 0 : channels[0].rows(); }
  Eigen::Index frames() const { return channels.empty() ? 0 : channels[0].cols(); }
};

// Non-overlapping Hanning-windowed frames (hop = seg_len), zero-padded to
// nfft before the transform; trailing samples that do not fill a frame are
// dropped. One frame per column.
Spectrogram stft(const TimeSeries& x, int seg_len, int nfft,
                 FourierSign sign = FourierSign::Negative);

// Same, with an independent segment length per variate. Every variate is
// transformed on the common nfft bin grid; variates with fewer frames are
// zero-padded on the time axis so the tensor stays rectangular.
Spectrogram stft_multi_window(const TimeSeries& x, const std::vector<int>& seg_lens,
                              int nfft, FourierSign sign = FourierSign::Negative);

struct MagPhase {
  std::vector<Eigen::MatrixXd> mag;  // >= 0
  std::vector<Eigen::MatrixXd> pha;  // in (-pi, pi], 0 where mag == 0
};

MagPhase mag_phase(const Spectrogram& s);

// Debug dump, columns: variate,bin,frame,re,im
void write_spectrogram_csv(const Spectrogram& s, std::ostream& out);

}  // namespace phaser
