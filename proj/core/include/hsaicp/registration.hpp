// The iterative registration algorithms.
//
// All five share one loop: match every (transformed) data point to its
// nearest model point, weight the matches, and re-solve the weighted rigid
// alignment from the original data positions. They differ only in how the
// weights are produced:
//
//   hsa    — trimmed overlap selection (hard assignment) picks the inliers;
//            each inlier is then re-weighted by the reliability of its
//            bidirectional match (soft assignment).
//   icp    — every pair weighted 1.
//   ftricp — trimmed overlap selection only; inliers weighted 1.
//   wicp   — linear down-weighting by distance with threshold rejection,
//            w = max(0, 1 - dist / tau), tau = 3 * median forward distance.
//   cticp  — Gaussian kernel weights exp(-dist^2 / (2 sigma^2)), sigma = 2d.
//
// Iteration stops when the relative change of the weighted inlier MSE drops
// below rel_tol and the translation update is below trans_tol, or after
// max_iterations.
#pragma once

#include "hsaicp/assignment.hpp"
#include "hsaicp/geometry.hpp"

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace hsaicp {

enum class Algorithm { Hsa, Icp, FtrIcp, WIcp, CtIcp };

const char* to_string(Algorithm algorithm);
std::optional<Algorithm> parse_algorithm(const std::string& name);

/// Snapshot handed to the optional per-iteration observer. The referenced
/// structures live on the iteration's stack; copy what you need.
struct IterationRecord {
  int iteration;  // 1-based
  const RigidTransform& before;
  const RigidTransform& after;
  double sse_before;   // objective at `before`, this iteration's pairs/weights
  double sse_after;    // objective at `after`, same pairs/weights
  double weighted_mse;  // sse_after / sum of weights
  const CorrespondenceSet& correspondences;
  const HardAssignment* hard;  // null for icp / wicp / cticp
};

struct RegistrationParams {
  Algorithm algorithm = Algorithm::Hsa;
  double gamma = 2.0;
  double lambda = 2.0;
  double xi_min = 0.25;
  /// Ratio regularizer; defaults to 1e-6 * mean_resolution(model).
  std::optional<double> delta;
  int max_iterations = 100;
  /// Relative change of the weighted inlier MSE below which the run is
  /// considered stationary.
  double rel_tol = 1e-8;
  /// Translation update floor; defaults to 1e-6 * mean_resolution(model).
  std::optional<double> trans_tol;
  std::function<void(const IterationRecord&)> observer;
};

struct RegistrationResult {
  RigidTransform transform;
  int iterations = 0;
  bool converged = false;
  double xi_final = 1.0;
  std::vector<double> objective_trace;  // weighted MSE per iteration
  std::vector<std::size_t> inlier_count_trace;
  double runtime_seconds = 0.0;
  std::string failure_reason;  // nonempty when a run stopped on an error
};

/// Runs params.algorithm. Requires both clouds to have >= 3 points and a
/// valid initial transform. On mid-run solver degeneracy the last valid
/// transform is returned with converged = false and the reason recorded.
RegistrationResult register_clouds(const PointCloud& data, const PointCloud& model,
                                   const RigidTransform& init,
                                   const RegistrationParams& params);

RegistrationResult hsa_icp(const PointCloud& data, const PointCloud& model,
                           const RigidTransform& init, RegistrationParams params = {});
RegistrationResult icp(const PointCloud& data, const PointCloud& model,
                       const RigidTransform& init, RegistrationParams params = {});
RegistrationResult ftricp(const PointCloud& data, const PointCloud& model,
                          const RigidTransform& init, RegistrationParams params = {});
RegistrationResult wicp(const PointCloud& data, const PointCloud& model,
                        const RigidTransform& init, RegistrationParams params = {});
RegistrationResult cticp(const PointCloud& data, const PointCloud& model,
                         const RigidTransform& init, RegistrationParams params = {});

}  // namespace hsaicp
