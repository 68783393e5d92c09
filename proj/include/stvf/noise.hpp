#pragma once

#include "stvf/fespace.hpp"

#include <cstdint>
#include <iosfwd>

namespace stvf {

enum class NoiseKind { Rademacher, BrownianIncrement };
enum class NoiseOperator { Additive, Multiplicative, ZeroNoise };

/// Discrete noise specification: the law of the scalar increments and the
/// operator coupling them to the state. Draws are keyed by (seed, i, j), so
/// streams are reproducible and order-independent; nothing is shared between
/// concurrent users.
struct NoiseModel {
  NoiseKind kind = NoiseKind::Rademacher;
  NoiseOperator op = NoiseOperator::Additive;
  double sigma = 1.0;
  std::uint64_t seed = 0;
};

struct NoiseIncrement {
  int i = 0;           // time index, 1-based
  Eigen::VectorXd xi;  // one mean-zero, variance-tau entry per component
};

namespace rng {

/// Stateless splitmix64 finalizer (bijective on 64-bit words).
std::uint64_t scramble(std::uint64_t x);

/// Substream key for draw (i, j) under a purpose tag. Distinct (tag, i, j)
/// triples map to distinct streams.
std::uint64_t substream_key(std::uint64_t seed, std::uint64_t tag, std::uint64_t i,
                            std::uint64_t j);

inline constexpr std::uint64_t kTagScheme = 1;  // time-stepping increments
inline constexpr std::uint64_t kTagImage = 2;   // image-data noise
inline constexpr std::uint64_t kTagSvi = 3;     // frozen test-process draws

/// n-th variate of a substream, in (0, 1].
double uniform_open(std::uint64_t key, std::uint64_t n);
/// n-th standard Gaussian variate of a substream (Box-Muller).
double gaussian(std::uint64_t key, std::uint64_t n);
/// n-th uniform variate on (-1, 1).
double uniform_sym(std::uint64_t key, std::uint64_t n);

}  // namespace rng

/// J independent draws of xi^{i,j} with variance tau. ZeroNoise yields zeros.
NoiseIncrement draw_increment(const NoiseModel& model, int i, double tau, Index J);

/// Coefficient vector (in the basis of `space`) of the noise term
/// sum_j B_j(prev) xi^{i,j}: sigma*xi for the additive operator, the
/// coefficientwise product sigma*(prev .* xi) for the multiplicative one.
/// Components are indexed by the free dofs; constrained entries stay zero.
Eigen::VectorXd noise_coefficients(const NoiseModel& model, const FeSpace& space,
                                   const State& prev, const NoiseIncrement& inc);

/// L2 load of the noise term (the pairing with every basis function):
/// mass * noise_coefficients.
Eigen::VectorXd apply_B(const NoiseModel& model, const FeSpace& space, const State& prev,
                        const NoiseIncrement& inc);

/// Values of the piecewise linear random walk W^j at times 0, tau, .., N*tau.
Eigen::VectorXd accumulate_walk(const NoiseModel& model, int j, int N, double tau);

/// Little-endian binary dump of all increments for replay:
/// magic "STVFNSE1", int64 N, int64 J, double tau, then N*J doubles row-major.
void write_increments(std::ostream& os, const NoiseModel& model, int N, Index J,
                      double tau);

struct IncrementFile {
  std::int64_t N = 0;
  std::int64_t J = 0;
  double tau = 0.0;
  Eigen::MatrixXd xi;  // N x J
};
IncrementFile read_increments(std::istream& is);

}  // namespace stvf
