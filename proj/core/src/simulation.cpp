#include "hsaicp/simulation.hpp"

#include "hsaicp/kdtree.hpp"

#include <Eigen/Geometry>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace hsaicp {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

}  // namespace

std::uint64_t Rng::next_u64() { return splitmix64(state_); }

std::uint64_t Rng::bounded(std::uint64_t n) {
  if (n == 0) throw std::invalid_argument("Rng::bounded: n must be > 0");
  const std::uint64_t threshold = (0 - n) % n;  // 2^64 mod n
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % n;
  }
}

double Rng::uniform() {
  return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::gaussian(double sigma) {
  const double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  const double u2 = uniform();
  return sigma * std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

std::uint64_t Rng::derive(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t state = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  return splitmix64(state);
}

double simulated_overlap(std::size_t n_source, std::size_t n_cut) {
  const double n95 = 0.95 * static_cast<double>(n_source);
  const double n = static_cast<double>(n_cut);
  return 0.95 * (n95 - 2.0 * n) / (n95 - n);
}

std::size_t cut_for_overlap(std::size_t n_source, double xi_target) {
  if (xi_target > 0.95) {
    throw std::invalid_argument("cut_for_overlap: overlap cannot exceed 0.95");
  }
  const double n95 = 0.95 * static_cast<double>(n_source);
  const double exact = n95 * (0.95 - xi_target) / (1.9 - xi_target);
  const auto n_cut = static_cast<std::size_t>(std::max(0.0, std::floor(exact)));
  if (static_cast<double>(n_cut) >= 0.4 * static_cast<double>(n_source)) {
    throw std::invalid_argument("cut_for_overlap: overlap target too low");
  }
  return n_cut;
}

namespace {

// Survivors of a uniform deletion of (N - keep) points, in original order.
std::vector<std::uint32_t> random_survivors(std::size_t n, std::size_t keep,
                                            std::uint64_t seed) {
  std::vector<std::uint32_t> idx(n);
  std::iota(idx.begin(), idx.end(), 0u);
  Rng rng(seed);
  const std::size_t n_remove = n - keep;
  for (std::size_t i = 0; i < n_remove; ++i) {
    std::swap(idx[i], idx[i + rng.bounded(n - i)]);
  }
  std::vector<std::uint32_t> out(idx.begin() + static_cast<std::ptrdiff_t>(n_remove),
                                 idx.end());
  std::sort(out.begin(), out.end());
  return out;
}

// Removes the n_cut most extreme projections (sign = +1: largest) and
// reports the projection threshold of the removed cap.
void cut_extreme(std::vector<std::uint32_t>& survivors, const PointCloud& source,
                 const Point3& axis, std::size_t n_cut, int sign, double& cap_edge) {
  std::sort(survivors.begin(), survivors.end(),
            [&](std::uint32_t a, std::uint32_t b) {
              const double pa = sign * axis.dot(source[a]);
              const double pb = sign * axis.dot(source[b]);
              return pa > pb || (pa == pb && a < b);
            });
  cap_edge = axis.dot(source[survivors[n_cut - 1]]);
  survivors.erase(survivors.begin(), survivors.begin() + static_cast<std::ptrdiff_t>(n_cut));
  std::sort(survivors.begin(), survivors.end());
}

}  // namespace

SimulatedPair generate_pair(const PointCloud& source, std::size_t n_cut,
                            double noise_sigma, std::uint64_t seed) {
  const std::size_t n = source.size();
  if (n < 4) throw std::invalid_argument("generate_pair: source too small");
  if (!(noise_sigma >= 0.0)) {
    throw std::invalid_argument("generate_pair: noise_sigma must be >= 0");
  }
  if (static_cast<double>(n_cut) >= 0.4 * static_cast<double>(n)) {
    throw std::invalid_argument("generate_pair: n_cut must be < 0.4 * N");
  }
  const auto keep = static_cast<std::size_t>(std::llround(0.95 * static_cast<double>(n)));

  std::vector<std::uint32_t> data_idx = random_survivors(n, keep, Rng::derive(seed, 0));
  std::vector<std::uint32_t> model_idx = random_survivors(n, keep, Rng::derive(seed, 1));

  Rng axis_rng(Rng::derive(seed, 2));
  const double z = axis_rng.uniform(-1.0, 1.0);
  const double phi = axis_rng.uniform(0.0, 2.0 * std::numbers::pi);
  const double s = std::sqrt(std::max(0.0, 1.0 - z * z));
  const Point3 axis(s * std::cos(phi), s * std::sin(phi), z);

  Rng move_rng(Rng::derive(seed, 3));
  const double d_source = mean_resolution(source);
  RigidTransform truth;
  {
    const double limit = std::numbers::pi / 4.0;
    const double ax = move_rng.uniform(-limit, limit);
    const double ay = move_rng.uniform(-limit, limit);
    const double az = move_rng.uniform(-limit, limit);
    truth.rotation = (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
                      Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
                      Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
                         .toRotationMatrix();
    const double reach = 10.0 * d_source;
    truth.translation = Point3(move_rng.uniform(-reach, reach),
                               move_rng.uniform(-reach, reach),
                               move_rng.uniform(-reach, reach));
  }

  double data_cap_edge = 0.0;
  double model_cap_edge = 0.0;
  if (n_cut > 0) {
    // Cut membership is decided on the original coordinates for both
    // shapes, so the two caps are provably disjoint and the overlap formula
    // is exact.
    cut_extreme(data_idx, source, axis, n_cut, +1, data_cap_edge);
    cut_extreme(model_idx, source, axis, n_cut, -1, model_cap_edge);
    if (model_cap_edge >= data_cap_edge) {
      throw std::invalid_argument("generate_pair: cut regions intersect");
    }
  }

  Rng noise_rng(Rng::derive(seed, 4));
  std::vector<Point3> data_points;
  data_points.reserve(data_idx.size());
  for (std::uint32_t i : data_idx) {
    Point3 p = source[i];
    if (noise_sigma > 0.0) {
      p += Point3(noise_rng.gaussian(noise_sigma), noise_rng.gaussian(noise_sigma),
                  noise_rng.gaussian(noise_sigma));
    }
    data_points.push_back(p);
  }

  std::vector<Point3> model_points;
  model_points.reserve(model_idx.size());
  for (std::uint32_t i : model_idx) model_points.push_back(truth(source[i]));

  SimulatedPair pair;
  pair.data = PointCloud(std::move(data_points));
  pair.model = PointCloud(std::move(model_points));
  pair.ground_truth = truth;
  pair.xi_true = simulated_overlap(n, n_cut);
  pair.d = mean_resolution(pair.model);
  pair.noise_sigma = noise_sigma;
  pair.n_cut = n_cut;
  pair.seed = seed;
  return pair;
}

RigidTransform random_perturbation(double angle_range_deg, double trans_range_d,
                                   double d, std::uint64_t seed) {
  if (!(angle_range_deg >= 0.0) || !(trans_range_d >= 0.0)) {
    throw std::invalid_argument("random_perturbation: ranges must be >= 0");
  }
  Rng rng(seed);
  const double limit = angle_range_deg * std::numbers::pi / 180.0;
  const double ax = rng.uniform(-limit, limit);
  const double ay = rng.uniform(-limit, limit);
  const double az = rng.uniform(-limit, limit);
  const double reach = trans_range_d * d;

  RigidTransform out;
  out.rotation = (Eigen::AngleAxisd(az, Eigen::Vector3d::UnitZ()) *
                  Eigen::AngleAxisd(ay, Eigen::Vector3d::UnitY()) *
                  Eigen::AngleAxisd(ax, Eigen::Vector3d::UnitX()))
                     .toRotationMatrix();
  out.translation = Point3(rng.uniform(-reach, reach), rng.uniform(-reach, reach),
                           rng.uniform(-reach, reach));
  return out;
}

RigidTransform apply_perturbation(const RigidTransform& perturbation,
                                  const RigidTransform& ground_truth) {
  RigidTransform out;
  out.rotation = perturbation.rotation * ground_truth.rotation;
  out.translation = perturbation.translation + ground_truth.translation;
  return out;
}

RelativeErrors relative_errors(const RigidTransform& estimated,
                               const RigidTransform& truth, double d) {
  if (!(d > 0.0)) throw std::invalid_argument("relative_errors: d must be > 0");
  RelativeErrors out;
  out.eps_r = (estimated.rotation - truth.rotation).norm();
  out.eps_t_raw = (estimated.translation - truth.translation).norm();
  out.eps_t_norm = out.eps_t_raw / d;
  return out;
}

bool registration_success(const RelativeErrors& errors, double d) {
  return errors.eps_r <= 0.01 && errors.eps_t_raw <= d;
}

const AlgorithmSummary& CampaignReport::summary(const std::string& algorithm) const {
  for (const AlgorithmSummary& s : summaries) {
    if (s.algorithm == algorithm) return s;
  }
  throw std::invalid_argument("CampaignReport: no summary for " + algorithm);
}

namespace {

double mean_of(const std::vector<double>& values) {
  if (values.empty()) return 0.0;
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  if (values.empty()) return 0.0;
  std::sort(values.begin(), values.end());
  const std::size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

TrialReport failed_trial(std::size_t trial, Algorithm algorithm) {
  TrialReport tr;
  tr.trial = trial;
  tr.algorithm = to_string(algorithm);
  tr.eps_r = std::numeric_limits<double>::infinity();
  tr.eps_t_raw = std::numeric_limits<double>::infinity();
  tr.eps_t_norm = std::numeric_limits<double>::infinity();
  return tr;
}

}  // namespace

CampaignReport run_monte_carlo(const PointCloud& source, const PairConfig& config,
                               const std::vector<Algorithm>& algorithms,
                               std::size_t trials, const RegistrationParams& params,
                               std::uint64_t seed, unsigned max_threads) {
  if (trials < 1) throw std::invalid_argument("run_monte_carlo: trials must be >= 1");
  if (algorithms.empty()) {
    throw std::invalid_argument("run_monte_carlo: no algorithms given");
  }

  CampaignReport report;
  report.config = config;
  report.seed = seed;
  report.trials = trials;
  report.xi_true = simulated_overlap(source.size(), config.n_cut);

  const std::size_t n_algos = algorithms.size();
  report.trial_reports.resize(trials * n_algos);

  auto run_trial = [&](std::size_t trial) {
    const std::uint64_t base = Rng::derive(seed, trial);
    TrialReport* slots = &report.trial_reports[trial * n_algos];
    SimulatedPair pair;
    RigidTransform init;
    try {
      pair = generate_pair(source, config.n_cut, config.noise_sigma,
                           Rng::derive(base, 0));
      init = apply_perturbation(
          random_perturbation(config.angle_range_deg, config.trans_range_d, pair.d,
                              Rng::derive(base, 1)),
          pair.ground_truth);
    } catch (const std::exception&) {
      for (std::size_t a = 0; a < n_algos; ++a) {
        slots[a] = failed_trial(trial, algorithms[a]);
      }
      return;
    }
    for (std::size_t a = 0; a < n_algos; ++a) {
      TrialReport tr;
      tr.trial = trial;
      tr.algorithm = to_string(algorithms[a]);
      try {
        RegistrationParams p = params;
        p.algorithm = algorithms[a];
        const RegistrationResult res = register_clouds(pair.data, pair.model, init, p);
        const RelativeErrors err = relative_errors(res.transform, pair.ground_truth,
                                                   pair.d);
        tr.eps_r = err.eps_r;
        tr.eps_t_raw = err.eps_t_raw;
        tr.eps_t_norm = err.eps_t_norm;
        tr.success = registration_success(err, pair.d);
        tr.converged = res.converged;
        tr.iterations = res.iterations;
        tr.xi_estimated = res.xi_final;
        tr.runtime_seconds = res.runtime_seconds;
      } catch (const std::exception&) {
        tr = failed_trial(trial, algorithms[a]);
      }
      slots[a] = tr;
    }
  };

  unsigned n_threads = max_threads != 0 ? max_threads : std::thread::hardware_concurrency();
  n_threads = std::max(1u, std::min<unsigned>(n_threads, static_cast<unsigned>(trials)));

  if (n_threads == 1) {
    for (std::size_t t = 0; t < trials; ++t) run_trial(t);
  } else {
    // Each trial is self-seeded and writes only its own slots, so the
    // outcome does not depend on scheduling.
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    workers.reserve(n_threads);
    for (unsigned w = 0; w < n_threads; ++w) {
      workers.emplace_back([&] {
        for (;;) {
          const std::size_t t = next.fetch_add(1);
          if (t >= trials) return;
          run_trial(t);
        }
      });
    }
    for (std::thread& w : workers) w.join();
  }

  for (std::size_t a = 0; a < n_algos; ++a) {
    AlgorithmSummary s;
    s.algorithm = to_string(algorithms[a]);
    std::vector<double> eps_r, eps_t_raw, eps_t_norm, runtimes, iters;
    std::size_t successes = 0;
    for (std::size_t t = 0; t < trials; ++t) {
      const TrialReport& tr = report.trial_reports[t * n_algos + a];
      eps_r.push_back(tr.eps_r);
      eps_t_raw.push_back(tr.eps_t_raw);
      eps_t_norm.push_back(tr.eps_t_norm);
      runtimes.push_back(tr.runtime_seconds);
      iters.push_back(static_cast<double>(tr.iterations));
      if (tr.success) ++successes;
    }
    s.success_rate = static_cast<double>(successes) / static_cast<double>(trials);
    s.mean_eps_r = mean_of(eps_r);
    s.median_eps_r = median_of(eps_r);
    s.mean_eps_t_raw = mean_of(eps_t_raw);
    s.median_eps_t_raw = median_of(eps_t_raw);
    s.mean_eps_t_norm = mean_of(eps_t_norm);
    s.mean_runtime_seconds = mean_of(runtimes);
    s.mean_iterations = mean_of(iters);
    report.summaries.push_back(std::move(s));
  }
  return report;
}

PointCloud synthetic_surface(std::size_t n, std::uint64_t seed) {
  if (n == 0) throw std::invalid_argument("synthetic_surface: n must be > 0");
  Rng rng(seed);
  std::vector<Point3> points;
  points.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double u = rng.uniform();
    const double v = rng.uniform();
    const double theta = std::acos(std::clamp(1.0 - 2.0 * u, -1.0, 1.0));
    const double phi = 2.0 * std::numbers::pi * v;
    // Bumpy closed surface with no rotational symmetry, so the ground
    // truth of a registration problem on it is unique.
    const double radius = 1.0 + 0.22 * std::sin(3.0 * theta) * std::cos(2.0 * phi) +
                          0.13 * std::sin(5.0 * phi) + 0.07 * std::cos(7.0 * theta);
    points.emplace_back(radius * std::sin(theta) * std::cos(phi),
                        radius * std::sin(theta) * std::sin(phi),
                        radius * std::cos(theta));
  }
  return PointCloud(std::move(points));
}

}  // namespace hsaicp
