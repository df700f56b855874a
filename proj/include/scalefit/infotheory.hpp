#pragma once

// Mutual information and infogain from paired losses, logarithmic trends in
// model size, and the closed-form context-position model.

#include <cstdint>
#include <span>

#include "scalefit/powerfit.hpp"

namespace scalefit {

enum class MISource { PairedLoss, ContextModel };

struct MIEstimate {
  double mi = 0.0;  // nats; negative values indicate measurement noise
  std::optional<double> infogain;
  bool negative = false;
  bool over_unity = false;  // infogain > 1
  MISource source = MISource::PairedLoss;
};

/// mi = loss_unconditioned - loss_conditioned, never clamped.
MIEstimate mutual_info(double loss_unconditioned, double loss_conditioned);

/// infogain = mi / loss_text; flags rather than rejects values above 1.
MIEstimate infogain(double mi, double loss_text);

double words_equivalent(double mi, double nats_per_word);

/// value = lambda * ln(N / n_c).
struct LogMIFit {
  double lambda = 0.0;
  double n_c = 0.0;
  double residual_rms = 0.0;
  bool increasing = true;

  double operator()(double n_params) const;
};

LogMIFit fit_log_mi(std::span<const DataPoint> points);
double invert_log_mi(const LogMIFit& fit, double target);

/// H_T^(p) = sum_{t=1..T} t^-p, compensated summation in ascending t.
double gen_harmonic(std::int64_t terms, double power);

/// L(t) = l_model + (l_unigram - l_model) / t^p.
struct ContextModel {
  double l_model = 0.0;
  double l_unigram = 0.0;
  double p = 0.5;
  std::int64_t horizon = 1;  // T

  /// Requires 0 < l_model <= l_unigram, 0 < p <= 1, T >= 1.
  void validate() const;
};

double context_loss(double t, const ContextModel& model);
/// Mutual information between tokens [1, T] and [T+1, 2T].
double context_mi(const ContextModel& model);
double context_infogain(const ContextModel& model);
/// Infogain bound as l_model -> 0: (2 H_T - H_2T) / (H_2T - H_T).
double context_infogain_limit(std::int64_t horizon, double p);

/// Fits (l_model, l_unigram, p) to a loss-by-position profile; the horizon
/// is set to the largest observed position.
ContextModel fit_context_profile(std::span<const DataPoint> losses, const FitOptions& opts = {});

}  // namespace scalefit
