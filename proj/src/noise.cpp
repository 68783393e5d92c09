#include "stvf/noise.hpp"

#include <bit>
#include <cmath>
#include <istream>
#include <numbers>
#include <ostream>
#include <stdexcept>
#include <string_view>

namespace stvf {

namespace rng {

std::uint64_t scramble(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::uint64_t substream_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t i,
                            std::uint64_t j) {
  std::uint64_t k = scramble(seed ^ 0x736b6579332e3141ULL);
  k = scramble(k ^ scramble(tag));
  k = scramble(k ^ scramble(i));
  k = scramble(k ^ scramble(j));
  return k;
}

namespace {
std::uint64_t word(std::uint64_t key, std::uint64_t n) {
  return scramble(key + n * 0x9e3779b97f4a7c15ULL);
}
}  // namespace

double uniform_open(std::uint64_t key, std::uint64_t n) {
  return static_cast<double>((word(key, n) >> 11) + 1) * 0x1.0p-53;
}

double gaussian(std::uint64_t key, std::uint64_t n) {
  const double u1 = uniform_open(key, 2 * n);
  const double u2 = uniform_open(key, 2 * n + 1);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

double uniform_sym(std::uint64_t key, std::uint64_t n) {
  return 2.0 * static_cast<double>(word(key, n) >> 11) * 0x1.0p-53 - 1.0;
}

}  // namespace rng

namespace {

double draw_component(const NoiseModel& model, int i, Index j, double tau) {
  const std::uint64_t key = rng::substream_key(model.seed, rng::kTagScheme,
                                               static_cast<std::uint64_t>(i),
                                               static_cast<std::uint64_t>(j));
  if (model.kind == NoiseKind::Rademacher) {
    const bool positive = (rng::scramble(key + 0x9e3779b97f4a7c15ULL) >> 63) != 0;
    return positive ? std::sqrt(tau) : -std::sqrt(tau);
  }
  return std::sqrt(tau) * rng::gaussian(key, 0);
}

}  // namespace

NoiseIncrement draw_increment(const NoiseModel& model, int i, double tau, Index J) {
  if (!(tau > 0.0) || J < 1 || i < 1) {
    throw std::invalid_argument("draw_increment requires tau > 0, J >= 1, i >= 1");
  }
  NoiseIncrement inc;
  inc.i = i;
  inc.xi = Eigen::VectorXd::Zero(J);
  if (model.op == NoiseOperator::ZeroNoise) return inc;
  for (Index j = 0; j < J; ++j) {
    inc.xi[j] = draw_component(model, i, j, tau);
  }
  return inc;
}

Eigen::VectorXd noise_coefficients(const NoiseModel& model, const FeSpace& space,
                                   const State& prev, const NoiseIncrement& inc) {
  Eigen::VectorXd b = Eigen::VectorXd::Zero(space.dof_count());
  if (model.op == NoiseOperator::ZeroNoise) return b;
  if (inc.xi.size() != space.free_count()) {
    throw std::invalid_argument("noise increment length must equal the free dof count");
  }
  const auto& free = space.free_dofs();
  for (Index j = 0; j < space.free_count(); ++j) {
    const Index d = free[static_cast<std::size_t>(j)];
    const double factor =
        (model.op == NoiseOperator::Additive) ? 1.0 : prev.coeffs[d];
    b[d] = model.sigma * factor * inc.xi[j];
  }
  return b;
}

Eigen::VectorXd apply_B(const NoiseModel& model, const FeSpace& space, const State& prev,
                        const NoiseIncrement& inc) {
  return space.mass() * noise_coefficients(model, space, prev, inc);
}

Eigen::VectorXd accumulate_walk(const NoiseModel& model, int j, int N, double tau) {
  Eigen::VectorXd w = Eigen::VectorXd::Zero(N + 1);
  if (model.op == NoiseOperator::ZeroNoise) return w;
  for (int i = 1; i <= N; ++i) {
    w[i] = w[i - 1] + draw_component(model, i, j, tau);
  }
  return w;
}

static_assert(std::endian::native == std::endian::little,
              "binary dumps assume a little-endian host");

void write_increments(std::ostream& os, const NoiseModel& model, int N, Index J,
                      double tau) {
  os.write("STVFNSE1", 8);
  const std::int64_t n64 = N, j64 = J;
  os.write(reinterpret_cast<const char*>(&n64), sizeof n64);
  os.write(reinterpret_cast<const char*>(&j64), sizeof j64);
  os.write(reinterpret_cast<const char*>(&tau), sizeof tau);
  for (int i = 1; i <= N; ++i) {
    const NoiseIncrement inc = draw_increment(model, i, tau, J);
    os.write(reinterpret_cast<const char*>(inc.xi.data()),
             static_cast<std::streamsize>(sizeof(double)) * J);
  }
}

IncrementFile read_increments(std::istream& is) {
  char magic[8];
  is.read(magic, 8);
  if (!is || std::string_view(magic, 8) != "STVFNSE1") {
    throw std::runtime_error("not an increment dump");
  }
  IncrementFile f;
  is.read(reinterpret_cast<char*>(&f.N), sizeof f.N);
  is.read(reinterpret_cast<char*>(&f.J), sizeof f.J);
  is.read(reinterpret_cast<char*>(&f.tau), sizeof f.tau);
  f.xi.resize(f.N, f.J);
  for (std::int64_t i = 0; i < f.N; ++i) {
    for (std::int64_t j = 0; j < f.J; ++j) {
      double v;
      is.read(reinterpret_cast<char*>(&v), sizeof v);
      f.xi(i, j) = v;
    }
  }
  if (!is) throw std::runtime_error("truncated increment dump");
  return f;
}

}  // namespace stvf
