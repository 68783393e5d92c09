#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "stvf/functionals.hpp"
#include "stvf/mc.hpp"
#include "stvf/noise.hpp"

#include <cmath>
#include <set>
#include <sstream>

using namespace stvf;

namespace {

NoiseModel rademacher(std::uint64_t seed, double sigma = 1.0) {
  return NoiseModel{NoiseKind::Rademacher, NoiseOperator::Additive, sigma, seed};
}

NoiseModel brownian(std::uint64_t seed, double sigma = 1.0) {
  return NoiseModel{NoiseKind::BrownianIncrement, NoiseOperator::Additive, sigma, seed};
}

}  // namespace

TEST_CASE("Rademacher increments take the two values +-sqrt(tau)") {
  const NoiseModel model = rademacher(42);
  const double tau = 0.01;
  const NoiseIncrement inc = draw_increment(model, 3, tau, 50);
  bool saw_plus = false, saw_minus = false;
  for (Index j = 0; j < 50; ++j) {
    CHECK(std::abs(inc.xi[j]) == doctest::Approx(0.1).epsilon(1e-15));
    saw_plus = saw_plus || inc.xi[j] > 0;
    saw_minus = saw_minus || inc.xi[j] < 0;
  }
  CHECK(saw_plus);
  CHECK(saw_minus);
}

TEST_CASE("zero-noise draws vanish") {
  NoiseModel model = rademacher(7);
  model.op = NoiseOperator::ZeroNoise;
  const NoiseIncrement inc = draw_increment(model, 1, 0.5, 8);
  CHECK(inc.xi.norm() == 0.0);
}

TEST_CASE("invalid draw arguments are rejected") {
  const NoiseModel model = rademacher(7);
  CHECK_THROWS_AS(draw_increment(model, 0, 0.1, 4), std::invalid_argument);
  CHECK_THROWS_AS(draw_increment(model, 1, -0.1, 4), std::invalid_argument);
  CHECK_THROWS_AS(draw_increment(model, 1, 0.1, 0), std::invalid_argument);
}

TEST_CASE("sample variance across realizations stays in the binomial band") {
  const double tau = 0.01;
  const int m_samples = 100000;
  for (const NoiseModel base : {rademacher(2024), brownian(2024)}) {
    double sum = 0.0, sum_sq = 0.0;
    for (int m = 0; m < m_samples; ++m) {
      NoiseModel model = base;
      model.seed = realization_seed(base.seed, m);
      const double xi = draw_increment(model, 1, tau, 1).xi[0];
      sum += xi;
      sum_sq += xi * xi;
    }
    const double mean = sum / m_samples;
    const double variance = (sum_sq - m_samples * mean * mean) / (m_samples - 1);
    CHECK(variance >= 0.0096);
    CHECK(variance <= 0.0104);
    CHECK(std::abs(mean) <= 4.0 * std::sqrt(tau / m_samples));
    CHECK(std::abs(variance - tau) <= 4.0 * tau * std::sqrt(2.0 / m_samples));
  }
}

TEST_CASE("streams are reproducible and component-disjoint") {
  const NoiseModel model = brownian(99);
  const NoiseIncrement a = draw_increment(model, 5, 0.2, 32);
  const NoiseIncrement b = draw_increment(model, 5, 0.2, 32);
  CHECK(a.xi == b.xi);

  const NoiseIncrement c = draw_increment(model, 6, 0.2, 32);
  CHECK(a.xi != c.xi);

  std::set<std::uint64_t> keys;
  for (std::uint64_t i = 1; i <= 64; ++i) {
    for (std::uint64_t j = 0; j < 64; ++j) {
      keys.insert(rng::substream_key(model.seed, rng::kTagScheme, i, j));
      keys.insert(rng::substream_key(model.seed, rng::kTagImage, i, j));
    }
  }
  CHECK(keys.size() == 2u * 64u * 64u);
}

TEST_CASE("noise loads follow the operator definition") {
  const auto space = std::make_shared<FeSpace>(Mesh::build_crisscross(2), ElementKind::P1);
  const Index J = space->free_count();

  NoiseModel zero = rademacher(1, 0.7);
  zero.op = NoiseOperator::ZeroNoise;
  NoiseIncrement inc;
  inc.i = 1;
  inc.xi = Eigen::VectorXd::Zero(J);
  const State prev = nodal_interpolate(
      *space, [](const Eigen::Vector2d& p) { return p.x() * p.y(); }, Constrain::Yes);
  CHECK(apply_B(zero, *space, prev, inc).norm() == 0.0);

  // Additive with xi = e_k: sigma times the k-th mass column of a free dof.
  const NoiseModel additive = rademacher(1, 0.7);
  const Index k = 3;
  inc.xi.setZero();
  inc.xi[k] = 1.0;
  const Eigen::VectorXd load = apply_B(additive, *space, prev, inc);
  Eigen::VectorXd unit = Eigen::VectorXd::Zero(space->dof_count());
  unit[space->free_dofs()[k]] = 1.0;
  CHECK((load - 0.7 * (space->mass() * unit)).cwiseAbs().maxCoeff() < 1e-15);

  NoiseModel multiplicative = rademacher(1, 0.9);
  multiplicative.op = NoiseOperator::Multiplicative;
  inc.xi.setRandom();
  const State zero_prev = zero_state(*space);
  CHECK(apply_B(multiplicative, *space, zero_prev, inc).norm() == 0.0);

  inc.xi = Eigen::VectorXd::Ones(J + 1);
  CHECK_THROWS_AS(apply_B(additive, *space, prev, inc), std::invalid_argument);
}

TEST_CASE("walks accumulate the drawn increments") {
  NoiseModel zero = rademacher(5);
  zero.op = NoiseOperator::ZeroNoise;
  CHECK(accumulate_walk(zero, 0, 8, 0.125).norm() == 0.0);

  const NoiseModel model = rademacher(5);
  const double tau = 0.25;
  const Eigen::VectorXd walk = accumulate_walk(model, 2, 2, tau);
  const double xi1 = draw_increment(model, 1, tau, 3).xi[2];
  const double xi2 = draw_increment(model, 2, tau, 3).xi[2];
  CHECK(walk[0] == 0.0);
  CHECK(walk[1] == doctest::Approx(xi1).epsilon(1e-15));
  CHECK(walk[2] == doctest::Approx(xi1 + xi2).epsilon(1e-15));
}

TEST_CASE("walk endpoint variance matches the horizon") {
  const int paths = 2000;
  const int N = 50;
  const double tau = 1.0 / N;
  for (const NoiseModel base : {rademacher(31), brownian(31)}) {
    double sum = 0.0, sum_sq = 0.0;
    for (int m = 0; m < paths; ++m) {
      NoiseModel model = base;
      model.seed = realization_seed(base.seed, m);
      const double w = accumulate_walk(model, 0, N, tau)[N];
      sum += w;
      sum_sq += w * w;
    }
    const double mean = sum / paths;
    const double variance = (sum_sq - paths * mean * mean) / (paths - 1);
    CHECK(variance >= 0.94);
    CHECK(variance <= 1.06);
  }
}

TEST_CASE("walk Besov majorants stay bounded under step refinement") {
  const int paths = 200;
  const double s = 0.3, p = 4.0, q = 4.0;
  std::vector<double> log_tau, log_mean;
  for (int level = 4; level <= 8; ++level) {
    const int N = 1 << level;
    const double tau = 1.0 / N;
    double mean = 0.0;
    for (int m = 0; m < paths; ++m) {
      NoiseModel model = rademacher(808);
      model.seed = realization_seed(model.seed, m);
      mean += besov_seminorm(accumulate_walk(model, 0, N, tau), tau, s, p, q);
    }
    mean /= paths;
    log_tau.push_back(std::log(tau));
    log_mean.push_back(std::log(mean));
  }
  // Trend of the mean majorant against tau; growth as tau shrinks would show
  // as a slope below -0.1.
  const int n = static_cast<int>(log_tau.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sx += log_tau[i];
    sy += log_mean[i];
    sxx += log_tau[i] * log_tau[i];
    sxy += log_tau[i] * log_mean[i];
  }
  const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  CHECK(slope >= -0.1);
}

TEST_CASE("increment dumps round-trip") {
  const NoiseModel model = brownian(321);
  std::stringstream buffer;
  write_increments(buffer, model, 6, 4, 0.125);
  const IncrementFile file = read_increments(buffer);
  CHECK(file.N == 6);
  CHECK(file.J == 4);
  CHECK(file.tau == 0.125);
  for (int i = 1; i <= 6; ++i) {
    const NoiseIncrement inc = draw_increment(model, i, 0.125, 4);
    for (Index j = 0; j < 4; ++j) {
      CHECK(file.xi(i - 1, j) == inc.xi[j]);
    }
  }
}
