#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <nlohmann/json.hpp>

#include "vdm/moments.hpp"

namespace vdm {

/// Largest matrix size accepted by the simulators.
inline constexpr int kMaxMatrixSize = 512;

/// One draw of N angles; zeta_i = exp(2 pi i angle_i) and X[i,j] = N^{-1/2} zeta_i^j for i,j in 1..N.
struct VandermondeSample {
  int N = 0;
  std::vector<double> angles;

  Eigen::MatrixXcd matrix() const;
};

/// Trial `trial` of the stream `seed`; independent of every other trial.
VandermondeSample sample(int N, std::uint64_t seed, std::uint64_t trial = 0);

/// h_N(t) = max(1, ceil(tN)).
int diagonal_index(const Rational& t, int N);

struct EstimatorReport {
  std::string word;
  int N = 0;
  std::size_t trials = 0;
  std::uint64_t seed = 0;
  std::complex<double> mean;
  double stderr_ = 0.0;
  std::optional<double> analytic;
  std::optional<double> allowance;
  /// "PASS" or "FAIL" once judged against an analytic value.
  std::optional<std::string> verdict;

  /// Sets analytic, allowance and verdict: PASS when |mean - analytic| <= max(3 stderr, allowance),
  /// with a floor of 1e-10 max(1, |analytic|) for floating roundoff.
  bool judge(double expected, double bias_allowance = 0.0);
  nlohmann::json to_json() const;
};

struct MonteCarloOptions {
  /// Worker threads; results do not depend on this value.
  unsigned threads = 1;
};

EstimatorReport estimate_trace(const Word& w, int N, std::size_t trials, std::uint64_t seed,
                               const MonteCarloOptions& options = {});

/// Mean of the (h, h) entry of the word with h = diagonal_index(t, N).
EstimatorReport estimate_diagonal(const Word& w, int N, const Rational& t, std::size_t trials, std::uint64_t seed,
                                  const MonteCarloOptions& options = {});

/// A block of a centred product together with the function subtracted from it.
struct CenteredBlock {
  Word block;
  PiecewisePoly centre;
};

/// Blocks of sigma(eps) with their limit expectations from the moments engine.
std::vector<CenteredBlock> centered_blocks(const StarPattern& eps, MomentEngine& moments);

struct DecayRow {
  int N = 0;
  std::complex<double> mean;
  double stderr_ = 0.0;
};

struct DecayReport {
  std::vector<DecayRow> rows;
  /// Least squares slope of log|mean| against log N; absent when some |mean| is 0.
  std::optional<double> slope;

  nlohmann::json to_json() const;
};

DecayReport centered_decay(const std::vector<CenteredBlock>& blocks, std::span<const int> Ns, std::size_t trials,
                           std::uint64_t seed, const MonteCarloOptions& options = {});

struct GrowthRow {
  int N = 0;
  double ratio = 0.0;
  double stderr_ = 0.0;
};

struct GrowthReport {
  int p = 0;
  std::vector<GrowthRow> rows;
  /// Set when the ratio at the largest N exceeds the one at the smallest N by more than 3 combined stderr.
  bool grows = false;

  nlohmann::json to_json() const;
};

/// Estimates E Tr((X*X)^p) / N for each N.
GrowthReport growth_check(int p, std::span<const int> Ns, std::size_t trials, std::uint64_t seed,
                          const MonteCarloOptions& options = {});

}  // namespace vdm
