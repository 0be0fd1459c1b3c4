// Synthetic-evaluation protocol: generation of partially overlapping scan
// pairs with known ground truth, perturbation sampling, relative-error
// metrics, the success criterion, and Monte-Carlo campaigns over all
// algorithms.
#pragma once

#include "hsaicp/geometry.hpp"
#include "hsaicp/registration.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace hsaicp {

/// Minimal splittable generator (splitmix64 streams). Identical seeds give
/// identical draw sequences on every platform, which is the reproducibility
/// contract for everything below. Sub-streams are derived with
/// Rng::derive(seed, k).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();
  /// Unbiased integer in [0, n).
  std::uint64_t bounded(std::uint64_t n);
  /// Uniform in [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);
  /// Zero-mean Gaussian via Box-Muller (two uniforms per draw).
  double gaussian(double sigma);

  static std::uint64_t derive(std::uint64_t seed, std::uint64_t stream);

 private:
  std::uint64_t state_;
};

/// A ground-truthed synthetic pair. The data shape is the source minus a
/// random 5% and one end cap along a random cut axis, plus isotropic
/// Gaussian noise; the model shape drops an independent 5% and the opposite
/// end cap (disjoint cut regions) and is moved by ground_truth. The overlap
/// of the two shapes is xi_true = 0.95 (0.95 N - 2n) / (0.95 N - n).
struct SimulatedPair {
  PointCloud data;
  PointCloud model;
  RigidTransform ground_truth;  // maps data onto model
  double xi_true = 0.95;
  double d = 0.0;  // mean_resolution(model)
  double noise_sigma = 0.0;
  std::size_t n_cut = 0;
  std::uint64_t seed = 0;
};

/// Deterministic given the seed (draw streams: 0 data deletion, 1 model
/// deletion, 2 cut axis, 3 ground-truth transform, 4 noise). Requires
/// n_cut < 0.4 * source.size(); throws if the two cut regions would
/// intersect.
SimulatedPair generate_pair(const PointCloud& source, std::size_t n_cut,
                            double noise_sigma, std::uint64_t seed);

/// Overlap percentage of a generated pair, as a function of the source size
/// and the cut size.
double simulated_overlap(std::size_t n_source, std::size_t n_cut);

/// Cut size producing a pair with overlap closest to (and not below)
/// xi_target.
std::size_t cut_for_overlap(std::size_t n_source, double xi_target);

/// Three Euler angles i.i.d. uniform in +-angle_range_deg and a translation
/// with components i.i.d. uniform in +-trans_range_d * d. Angles are
/// applied in Z * Y * X order; draw order is the six values in that
/// sequence.
RigidTransform random_perturbation(double angle_range_deg, double trans_range_d,
                                   double d, std::uint64_t seed);

/// The benchmark initialization rule (R_p * R_g, t_p + t_g). Deliberately
/// not group composition; see compose() for that.
RigidTransform apply_perturbation(const RigidTransform& perturbation,
                                  const RigidTransform& ground_truth);

struct RelativeErrors {
  double eps_r;       // Frobenius norm of the rotation difference
  double eps_t_raw;   // Euclidean norm of the translation difference
  double eps_t_norm;  // eps_t_raw / d
};

RelativeErrors relative_errors(const RigidTransform& estimated,
                               const RigidTransform& truth, double d);

/// eps_r <= 0.01 and raw eps_t <= d; nothing else.
bool registration_success(const RelativeErrors& errors, double d);

struct TrialReport {
  std::string algorithm;
  std::size_t trial = 0;
  double eps_r = 0.0;
  double eps_t_raw = 0.0;
  double eps_t_norm = 0.0;
  bool success = false;
  bool converged = false;
  int iterations = 0;
  double xi_estimated = 1.0;
  double runtime_seconds = 0.0;
};

struct AlgorithmSummary {
  std::string algorithm;
  double success_rate = 0.0;
  double mean_eps_r = 0.0;
  double median_eps_r = 0.0;
  double mean_eps_t_raw = 0.0;
  double median_eps_t_raw = 0.0;
  double mean_eps_t_norm = 0.0;
  double mean_runtime_seconds = 0.0;
  double mean_iterations = 0.0;
};

struct PairConfig {
  std::size_t n_cut = 0;
  double noise_sigma = 0.0;
  double angle_range_deg = 5.0;  // initialization perturbation
  double trans_range_d = 1.0;
};

struct CampaignReport {
  PairConfig config;
  std::uint64_t seed = 0;
  std::size_t trials = 0;
  double xi_true = 0.95;
  std::vector<TrialReport> trial_reports;  // trial-major, algorithms in input order
  std::vector<AlgorithmSummary> summaries;

  const AlgorithmSummary& summary(const std::string& algorithm) const;
};

/// Runs `trials` independent trials. Trial k generates its pair and its
/// initialization from sub-seeds of (seed, k), runs every algorithm on the
/// same pair, and records one TrialReport each; a failing trial is recorded
/// as unsuccess, never aborts the campaign. Trials may execute in parallel
/// (max_threads = 0 picks a default); the report is identical regardless of
/// scheduling.
CampaignReport run_monte_carlo(const PointCloud& source, const PairConfig& config,
                               const std::vector<Algorithm>& algorithms,
                               std::size_t trials, const RegistrationParams& params,
                               std::uint64_t seed, unsigned max_threads = 0);

/// Deterministic bumpy-sphere sampler: n points on an asymmetric closed
/// surface of radius ~1. Useful as a self-contained benchmark source.
PointCloud synthetic_surface(std::size_t n, std::uint64_t seed);

}  // namespace hsaicp
