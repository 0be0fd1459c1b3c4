#include "hsaicp/registration.hpp"

#include "hsaicp/kdtree.hpp"
#include "hsaicp/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>

namespace hsaicp {

const char* to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::Hsa: return "hsa";
    case Algorithm::Icp: return "icp";
    case Algorithm::FtrIcp: return "ftricp";
    case Algorithm::WIcp: return "wicp";
    case Algorithm::CtIcp: return "cticp";
  }
  return "?";
}

std::optional<Algorithm> parse_algorithm(const std::string& name) {
  if (name == "hsa") return Algorithm::Hsa;
  if (name == "icp") return Algorithm::Icp;
  if (name == "ftricp") return Algorithm::FtrIcp;
  if (name == "wicp") return Algorithm::WIcp;
  if (name == "cticp") return Algorithm::CtIcp;
  return std::nullopt;
}

namespace {

void validate_params(const RegistrationParams& params) {
  if (params.gamma < 0.0) throw std::invalid_argument("params: gamma must be >= 0");
  if (!(params.lambda > 0.0)) throw std::invalid_argument("params: lambda must be > 0");
  if (!(params.xi_min > 0.0) || params.xi_min > 1.0) {
    throw std::invalid_argument("params: xi_min must be in (0, 1]");
  }
  if (params.delta && !(*params.delta > 0.0)) {
    throw std::invalid_argument("params: delta must be > 0");
  }
  if (params.max_iterations < 1) {
    throw std::invalid_argument("params: max_iterations must be >= 1");
  }
  if (!(params.rel_tol >= 0.0)) throw std::invalid_argument("params: rel_tol must be >= 0");
  if (params.trans_tol && !(*params.trans_tol > 0.0)) {
    throw std::invalid_argument("params: trans_tol must be > 0");
  }
}

double median(std::vector<double> values) {
  const std::size_t n = values.size();
  std::sort(values.begin(), values.end());
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

RegistrationResult register_clouds(const PointCloud& data, const PointCloud& model,
                                   const RigidTransform& init,
                                   const RegistrationParams& params) {
  if (data.size() < 3 || model.size() < 3) {
    throw std::invalid_argument("register_clouds: both clouds need >= 3 points");
  }
  if (!init.is_valid()) {
    throw std::invalid_argument("register_clouds: invalid initial transform");
  }
  validate_params(params);

  const auto start = std::chrono::steady_clock::now();
  const Algorithm algo = params.algorithm;
  const std::size_t n = data.size();

  const KdTree model_index(model);
  std::optional<KdTree> data_index;
  if (algo == Algorithm::Hsa) data_index.emplace(data);

  const double resolution = mean_resolution(model_index);
  constexpr double tiny = std::numeric_limits<double>::min();
  const double delta = params.delta.value_or(std::max(1e-6 * resolution, tiny));
  const double trans_tol = params.trans_tol.value_or(std::max(1e-6 * resolution, tiny));
  const double ct_sigma = 2.0 * resolution;
  // Below this the weighted MSE is pure roundoff and the run may stop
  // without waiting for a second iterate.
  const double mse_floor = 1e-18 * resolution * resolution;

  RegistrationResult result;
  result.transform = init;
  RigidTransform current = init;
  std::optional<double> prev_mse;

  for (int iteration = 1; iteration <= params.max_iterations; ++iteration) {
    const PointCloud transformed = apply_transform(data, current);
    Matches forward = forward_correspondences(model_index, transformed);

    CorrespondenceSet corr;
    corr.forward_target = std::move(forward.target);
    corr.forward_dist = std::move(forward.distance);
    corr.omega.assign(n, 1);
    corr.backward_source.assign(n, 0);
    corr.backward_dist.assign(n, 0.0);
    corr.rho.assign(n, 1.0);
    corr.p.assign(n, 1.0);
    corr.q.assign(n, 1.0);

    std::optional<HardAssignment> hard;
    if (algo == Algorithm::Hsa || algo == Algorithm::FtrIcp) {
      hard = hard_assignment(corr.forward_dist, params.lambda, params.xi_min);
      corr.omega = hard->inlier_mask;
      for (std::size_t i = 0; i < n; ++i) {
        if (!corr.omega[i]) corr.q[i] = 0.0;
      }
    }

    if (algo == Algorithm::Hsa) {
      std::vector<std::size_t> inliers;
      inliers.reserve(hard->inlier_count);
      std::vector<Point3> matched;
      matched.reserve(hard->inlier_count);
      for (std::size_t i = 0; i < n; ++i) {
        if (corr.omega[i]) {
          inliers.push_back(i);
          matched.push_back(model[corr.forward_target[i]]);
        }
      }
      const Matches backward = backward_correspondences(
          *data_index, PointCloud(std::move(matched)), current);
      for (std::size_t k = 0; k < inliers.size(); ++k) {
        const std::size_t i = inliers[k];
        // The backward distance is measured after a round trip through the
        // inverse transform; clamp the stray roundoff that would push the
        // ratio below 1.
        const double b = std::min(backward.distance[k], corr.forward_dist[i]);
        corr.backward_source[i] = backward.target[k];
        corr.backward_dist[i] = b;
        corr.rho[i] = distance_ratio(corr.forward_dist[i], b, delta);
        corr.p[i] = soft_assignment(corr.rho[i], params.gamma);
        corr.q[i] = corr.p[i];
      }
    } else if (algo == Algorithm::WIcp) {
      const double tau = 3.0 * median(corr.forward_dist);
      for (std::size_t i = 0; i < n; ++i) {
        corr.q[i] = tau > 0.0 ? std::max(0.0, 1.0 - corr.forward_dist[i] / tau)
                              : (corr.forward_dist[i] == 0.0 ? 1.0 : 0.0);
      }
    } else if (algo == Algorithm::CtIcp) {
      for (std::size_t i = 0; i < n; ++i) {
        const double dist = corr.forward_dist[i];
        corr.q[i] = std::exp(-dist * dist / (2.0 * ct_sigma * ct_sigma));
      }
    }

    WeightedPairSet pairs;
    double weight_sum = 0.0;
    std::size_t effective = 0;
    const bool trimmed = algo == Algorithm::Hsa || algo == Algorithm::FtrIcp;
    for (std::size_t i = 0; i < n; ++i) {
      if (trimmed && !corr.omega[i]) continue;
      pairs.source.push_back(data[i]);
      pairs.target.push_back(model[corr.forward_target[i]]);
      pairs.weight.push_back(corr.q[i]);
      weight_sum += corr.q[i];
      if (corr.q[i] > 0.0) ++effective;
    }

    if (weight_sum <= 0.0) {
      result.failure_reason = "all correspondence weights are zero";
      break;
    }

    const double sse_before = weighted_sse(pairs, current);
    RigidTransform next;
    try {
      next = weighted_rigid_solve(pairs);
    } catch (const NoInliersError& e) {
      result.failure_reason = e.what();
      break;
    } catch (const DegenerateGeometryError& e) {
      result.failure_reason = e.what();
      break;
    }
    const double sse_after = weighted_sse(pairs, next);
    const double mse = sse_after / weight_sum;

    result.iterations = iteration;
    result.objective_trace.push_back(mse);
    result.inlier_count_trace.push_back(trimmed ? hard->inlier_count : effective);
    result.xi_final = trimmed ? hard->xi : 1.0;

    if (params.observer) {
      params.observer(IterationRecord{iteration, current, next, sse_before, sse_after,
                                      mse, corr, hard ? &*hard : nullptr});
    }

    const double step = (next.translation - current.translation).norm();
    current = next;

    const bool mse_stationary =
        mse <= mse_floor ||
        (prev_mse &&
         std::abs(mse - *prev_mse) <= params.rel_tol * std::max(*prev_mse, mse));
    prev_mse = mse;
    if (mse_stationary && step < trans_tol) {
      result.converged = true;
      break;
    }
  }

  result.transform = current;
  result.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

namespace {

RegistrationResult run_as(Algorithm algorithm, const PointCloud& data,
                          const PointCloud& model, const RigidTransform& init,
                          RegistrationParams params) {
  params.algorithm = algorithm;
  return register_clouds(data, model, init, params);
}

}  // namespace

RegistrationResult hsa_icp(const PointCloud& data, const PointCloud& model,
                           const RigidTransform& init, RegistrationParams params) {
  return run_as(Algorithm::Hsa, data, model, init, std::move(params));
}

RegistrationResult icp(const PointCloud& data, const PointCloud& model,
                       const RigidTransform& init, RegistrationParams params) {
  return run_as(Algorithm::Icp, data, model, init, std::move(params));
}

RegistrationResult ftricp(const PointCloud& data, const PointCloud& model,
                          const RigidTransform& init, RegistrationParams params) {
  return run_as(Algorithm::FtrIcp, data, model, init, std::move(params));
}

RegistrationResult wicp(const PointCloud& data, const PointCloud& model,
                        const RigidTransform& init, RegistrationParams params) {
  return run_as(Algorithm::WIcp, data, model, init, std::move(params));
}

RegistrationResult cticp(const PointCloud& data, const PointCloud& model,
                         const RigidTransform& init, RegistrationParams params) {
  return run_as(Algorithm::CtIcp, data, model, init, std::move(params));
}

}  // namespace hsaicp
