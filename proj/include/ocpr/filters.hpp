#pragma once

#include <cmath>
#include <numbers>

namespace ocpr {

// Single-pole low-pass 1/(1 + s/wc), bilinear transform prewarped at the
// cutoff so the -3 dB point is exact at any sample rate below Nyquist.
class OnePoleLowpass {
 public:
  OnePoleLowpass() = default;
  OnePoleLowpass(double cutoff_hz, double dt) {
    const double k = std::tan(std::numbers::pi * cutoff_hz * dt);
    b0_ = k / (1.0 + k);
    a1_ = (k - 1.0) / (1.0 + k);
  }

  double step(double x) {
    const double y = b0_ * x + state_;
    state_ = b0_ * x - a1_ * y;
    return y;
  }

  // Puts the filter in steady state for a constant input x.
  void settle(double x) { state_ = x - b0_ * x; }
  void reset() { state_ = 0.0; }

 private:
  double b0_ = 1.0;
  double a1_ = 0.0;
  double state_ = 0.0;
};

}  // namespace ocpr
