#pragma once

#include <cstddef>
#include <utility>
#include <vector>

#include "cptmag/physics.hpp"

namespace cptmag {

struct Estimate {
  double b_est = 0.0;    // nT
  double delta_b = 0.0;  // nT, posterior standard deviation
};

// Probability density over the field, discretized on a uniform grid.
// The trapezoidal integral over [b_lo, b_hi] is kept at 1.
class Posterior {
 public:
  Posterior(double b_lo, double b_hi, std::vector<double> density);

  double b_lo() const { return b_lo_; }
  double b_hi() const { return b_hi_; }
  double spacing() const { return spacing_; }
  std::size_t size() const { return density_.size(); }
  double grid_b(std::size_t i) const { return b_lo_ + spacing_ * static_cast<double>(i); }
  const std::vector<double>& density() const { return density_; }
  double trapz_w(std::size_t i) const;

  double integral() const;

  // Smallest index range [first, last) holding every point whose density
  // exceeds rel_eps times the peak. Used to skip zero-mass tails.
  std::pair<std::size_t, std::size_t> support(double rel_eps = 1e-18) const;

 private:
  double b_lo_, b_hi_, spacing_;
  std::vector<double> density_;
};

// Flat prior of width 1/(|zeeman| * t_first) centered on `center`; the width
// equals one full fringe period of the first interrogation time, i.e. twice
// the dynamic range.
Posterior uniform_prior(double center_nt, double t_first_s, const PhysicsParams& params,
                        std::size_t n_points);

// Truncated Gaussian prior with the moments of `est`, renormalized on
// [b_lo, b_hi]. Throws std::invalid_argument when est.b_est lies outside.
Posterior gaussian_prior(const Estimate& est, double b_lo, double b_hi, std::size_t n_points);

// Shot-noise scale of the normalized signal; the measured probability is
// clamped away from the rails so the density stays proper.
double likelihood_sigma(double p_e, double n_eff);

// Gaussian likelihood density of measuring p_e when the field is b_nt.
double likelihood(const PhysicsParams& params, double p_e, double b_nt, const RamseyConfig& cfg,
                  double n_eff);

struct UpdateResult {
  Posterior posterior;
  bool degenerate = false;  // product underflowed everywhere; prior returned unchanged
};

// Pointwise product of prior density and measurement likelihood, renormalized
// on the same grid. Accumulation is shifted by the peak log-likelihood so long
// update chains cannot underflow.
UpdateResult bayes_update(const Posterior& prior, const PhysicsParams& params,
                          const MeasurementOutcome& outcome, const RamseyConfig& cfg);

// Trapezoidal mean and standard deviation.
Estimate moments(const Posterior& post);

// New interval of one fringe period of t_ramsey centered on the estimate,
// carrying a Gaussian reset of the estimate's moments.
Posterior recentre(const Posterior& post, const Estimate& est, double t_ramsey_s,
                   const PhysicsParams& params, std::size_t n_points = 0);

}  // namespace cptmag
