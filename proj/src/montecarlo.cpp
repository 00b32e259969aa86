#include "vdm/montecarlo.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <thread>

#include "vdm/error.hpp"

namespace vdm {

namespace {

void check_size(int N) {
  if (N < 1) throw ArgumentError("matrix size must be at least 1, got " + std::to_string(N));
  if (N > kMaxMatrixSize) {
    throw ResourceLimitError("matrix size " + std::to_string(N) + " exceeds the cap of " +
                             std::to_string(kMaxMatrixSize));
  }
}

void check_trials(std::size_t trials) {
  if (trials < 2) throw ArgumentError("at least 2 trials are needed for a standard error");
}

/// D_N(b) = diag(b(1/N), ..., b(N/N)).
Eigen::VectorXcd discretize(const PiecewisePoly& b, int N) {
  Eigen::VectorXcd d(N);
  for (int k = 1; k <= N; ++k) {
    Rational t(k, N);
    t.canonicalize();
    d(k - 1) = to_double(b.eval_at(t));
  }
  return d;
}

/// Matrices derived from one sample; the Gram matrix X*X is built only on request.
class Sampled {
 public:
  explicit Sampled(const VandermondeSample& s) : x_(s.matrix()) {}

  const Eigen::MatrixXcd& x() const noexcept { return x_; }

  /// (X*X)[j,k] = p_{k-j} with p_m = (1/N) sum_i zeta_i^m; column m of X holds zeta_i^m / sqrt(N).
  const Eigen::MatrixXcd& gram() {
    if (gram_.size() == 0) {
      const auto N = x_.rows();
      const Eigen::VectorXcd sums = x_.colwise().sum().transpose() / std::sqrt(static_cast<double>(N));
      auto p = [&](Eigen::Index m) -> std::complex<double> {
        if (m == 0) return 1.0;
        return m > 0 ? sums(m - 1) : std::conj(sums(-m - 1));
      };
      gram_.resize(N, N);
      for (Eigen::Index j = 0; j < N; ++j)
        for (Eigen::Index k = 0; k < N; ++k) gram_(j, k) = p(k - j);
    }
    return gram_;
  }

 private:
  Eigen::MatrixXcd x_;
  Eigen::MatrixXcd gram_;
};

class Renderer {
 public:
  enum class Kind { X, Xstar, Gram, Diag };
  struct Token {
    Kind kind;
    std::size_t diag = 0;
    std::size_t letter = 0;
  };

  Renderer(const Word& w, int N) : letters_(w.letters()) {
    for (std::size_t i = 0; i < letters_.size(); ++i) {
      const auto& l = letters_[i];
      if (!l.is_matrix()) {
        tokens_.push_back({Kind::Diag, diag_.size(), i});
        diag_.push_back(discretize(l.coeff, N));
      } else if (l.kind == LetterKind::Xstar && i + 1 < letters_.size() && letters_[i + 1].kind == LetterKind::X) {
        tokens_.push_back({Kind::Gram, 0, i});
        ++i;
      } else {
        tokens_.push_back({l.kind == LetterKind::X ? Kind::X : Kind::Xstar, 0, i});
      }
    }
    const std::size_t T = tokens_.size();
    period_ = T;
    for (std::size_t d = 1; d < T; ++d) {
      if (T % d != 0) continue;
      bool ok = true;
      for (std::size_t i = d; ok && i < T; ++i) ok = same_token(i, i - d);
      if (ok) {
        period_ = d;
        break;
      }
    }
  }

  Eigen::MatrixXcd product(Sampled& m) const { return product(m, 0, tokens_.size()); }

  /// tr = Tr / N.
  std::complex<double> trace(Sampled& m) const {
    const auto N = static_cast<double>(m.x().rows());
    const std::size_t T = tokens_.size();
    if (T == 1) return product(m, 0, 1).trace() / N;
    if (period_ < T) return power_trace(product(m, 0, period_), T / period_) / N;
    const std::size_t mid = T / 2;
    return trace_of_product(product(m, 0, mid), product(m, mid, T)) / N;
  }

  std::complex<double> diagonal_entry(const Eigen::MatrixXcd& X, int h) const {
    Eigen::RowVectorXcd row = Eigen::RowVectorXcd::Zero(X.rows());
    row(h - 1) = 1.0;
    std::size_t d = 0;
    for (const auto& l : letters_) {
      if (!l.is_matrix()) row = row.cwiseProduct(diag_[d++].transpose());
      else if (l.kind == LetterKind::X) row = (row * X).eval();
      else row = (row * X.adjoint()).eval();
    }
    return row(h - 1);
  }

 private:
  bool same_token(std::size_t a, std::size_t b) const {
    const auto& x = tokens_[a];
    const auto& y = tokens_[b];
    if (x.kind != y.kind) return false;
    return x.kind != Kind::Diag || letters_[x.letter].coeff == letters_[y.letter].coeff;
  }

  Eigen::MatrixXcd product(Sampled& m, std::size_t begin, std::size_t end) const {
    const auto N = m.x().rows();
    std::optional<Eigen::MatrixXcd> acc;
    std::optional<Eigen::VectorXcd> lead;
    for (std::size_t i = begin; i < end; ++i) {
      const auto& tok = tokens_[i];
      if (tok.kind == Kind::Diag) {
        if (acc) acc = *acc * diag_[tok.diag].asDiagonal();
        else lead = lead ? Eigen::VectorXcd(lead->cwiseProduct(diag_[tok.diag])) : diag_[tok.diag];
        continue;
      }
      if (!acc) {
        switch (tok.kind) {
          case Kind::X: acc = m.x(); break;
          case Kind::Xstar: acc = m.x().adjoint(); break;
          default: acc = m.gram(); break;
        }
        if (lead) acc = lead->asDiagonal() * *acc;
        continue;
      }
      switch (tok.kind) {
        case Kind::X: acc = *acc * m.x(); break;
        case Kind::Xstar: acc = *acc * m.x().adjoint(); break;
        default: acc = *acc * m.gram(); break;
      }
    }
    if (acc) return *acc;
    if (lead) return Eigen::MatrixXcd(lead->asDiagonal());
    return Eigen::MatrixXcd::Identity(N, N);
  }

  static std::complex<double> trace_of_product(const Eigen::MatrixXcd& A, const Eigen::MatrixXcd& B) {
    return A.transpose().cwiseProduct(B).sum();
  }

  static Eigen::MatrixXcd power(const Eigen::MatrixXcd& U, std::size_t k) {
    Eigen::MatrixXcd result, base = U;
    bool started = false;
    for (; k > 0; k >>= 1) {
      if (k & 1u) {
        result = started ? Eigen::MatrixXcd(result * base) : base;
        started = true;
      }
      if (k > 1) base = base * base;
    }
    return result;
  }

  static std::complex<double> power_trace(const Eigen::MatrixXcd& U, std::size_t k) {
    if (k == 1) return U.trace();
    const Eigen::MatrixXcd A = power(U, k / 2);
    if (k % 2 == 0) return trace_of_product(A, A);
    return trace_of_product(A, A * U);
  }

  std::vector<Letter> letters_;
  std::vector<Token> tokens_;
  std::vector<Eigen::VectorXcd> diag_;
  std::size_t period_ = 0;
};

template <class Fn>
std::vector<std::complex<double>> run_trials(std::size_t trials, const MonteCarloOptions& options, Fn&& fn) {
  std::vector<std::complex<double>> values(trials);
  const unsigned workers = std::max(1u, std::min<unsigned>(options.threads, static_cast<unsigned>(trials)));
  if (workers == 1) {
    for (std::size_t k = 0; k < trials; ++k) values[k] = fn(k);
    return values;
  }
  std::vector<std::jthread> pool;
  for (unsigned w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      for (std::size_t k = w; k < trials; k += workers) values[k] = fn(k);
    });
  }
  return values;
}

std::pair<std::complex<double>, double> mean_and_stderr(const std::vector<std::complex<double>>& values) {
  std::complex<double> sum = 0.0;
  for (const auto& v : values) sum += v;
  const auto n = static_cast<double>(values.size());
  const auto mean = sum / n;
  double ss = 0.0;
  for (const auto& v : values) ss += std::norm(v - mean);
  return {mean, std::sqrt(ss / (n - 1.0) / n)};
}

void check_word(const Word& w) {
  if (w.is_zero() || w.matrix_letters() == 0)
    throw ArgumentError("word '" + w.to_string() + "' has no matrix letters to simulate");
}

}  // namespace

Eigen::MatrixXcd VandermondeSample::matrix() const {
  Eigen::MatrixXcd X(N, N);
  const double scale = 1.0 / std::sqrt(static_cast<double>(N));
  for (int i = 0; i < N; ++i) {
    for (int j = 1; j <= N; ++j) {
      double a = angles[static_cast<std::size_t>(i)] * j;
      a -= std::floor(a);
      X(i, j - 1) = std::polar(scale, 2.0 * std::numbers::pi * a);
    }
  }
  return X;
}

VandermondeSample sample(int N, std::uint64_t seed, std::uint64_t trial) {
  check_size(N);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial), static_cast<std::uint32_t>(trial >> 32)};
  std::mt19937_64 gen(seq);
  VandermondeSample s{N, std::vector<double>(static_cast<std::size_t>(N))};
  for (auto& a : s.angles) a = static_cast<double>(gen() >> 11) * 0x1.0p-53;
  return s;
}

int diagonal_index(const Rational& t, int N) {
  if (t < 0 || t > 1) throw ArgumentError("diagonal probe t=" + to_string(t) + " lies outside [0,1]");
  check_size(N);
  const Rational x = t * N;
  mpz_class c;
  mpz_cdiv_q(c.get_mpz_t(), x.get_num_mpz_t(), x.get_den_mpz_t());
  return std::max(1, static_cast<int>(c.get_si()));
}

bool EstimatorReport::judge(double expected, double bias_allowance) {
  analytic = expected;
  allowance = bias_allowance;
  const double roundoff = 1e-10 * std::max(1.0, std::abs(expected));
  const bool pass = std::abs(mean - expected) <= std::max({3.0 * stderr_, bias_allowance, roundoff});
  verdict = pass ? "PASS" : "FAIL";
  return pass;
}

nlohmann::json EstimatorReport::to_json() const {
  nlohmann::json j{{"word", word},       {"N", N},           {"trials", trials},       {"seed", seed},
                   {"mean_re", mean.real()}, {"mean_im", mean.imag()}, {"stderr", stderr_}};
  if (analytic) j["analytic"] = *analytic;
  if (allowance) j["allowance"] = *allowance;
  if (verdict) j["verdict"] = *verdict;
  return j;
}

EstimatorReport estimate_trace(const Word& w, int N, std::size_t trials, std::uint64_t seed,
                               const MonteCarloOptions& options) {
  check_word(w);
  check_size(N);
  check_trials(trials);
  const Renderer renderer(w, N);
  const auto values =
      run_trials(trials, options, [&](std::size_t k) {
    Sampled m(sample(N, seed, k));
    return renderer.trace(m);
  });
  const auto [mean, se] = mean_and_stderr(values);
  return EstimatorReport{w.to_string(), N, trials, seed, mean, se, {}, {}, {}};
}

EstimatorReport estimate_diagonal(const Word& w, int N, const Rational& t, std::size_t trials, std::uint64_t seed,
                                  const MonteCarloOptions& options) {
  check_word(w);
  if (!w.star_pattern().alternating())
    throw ContractError("diagonal probe needs an alternating word, got " + w.to_string());
  check_trials(trials);
  const int h = diagonal_index(t, N);
  const Renderer renderer(w, N);
  const auto values = run_trials(
      trials, options, [&](std::size_t k) { return renderer.diagonal_entry(sample(N, seed, k).matrix(), h); });
  const auto [mean, se] = mean_and_stderr(values);
  return EstimatorReport{w.to_string(), N, trials, seed, mean, se, {}, {}, {}};
}

std::vector<CenteredBlock> centered_blocks(const StarPattern& eps, MomentEngine& moments) {
  std::vector<CenteredBlock> out;
  if (eps.n() == 0) return out;
  const auto sigma = max_alternating_interval_partition(eps);
  for (const auto& block : sigma.blocks()) {
    std::vector<Letter> letters;
    for (int j : block) letters.push_back(eps.star[static_cast<std::size_t>(j - 1)] ? Letter::xstar() : Letter::x());
    Word w(std::move(letters));
    auto centre = moments.expectation(w).value;
    out.push_back({std::move(w), std::move(centre)});
  }
  return out;
}

DecayReport centered_decay(const std::vector<CenteredBlock>& blocks, std::span<const int> Ns, std::size_t trials,
                           std::uint64_t seed, const MonteCarloOptions& options) {
  check_trials(trials);
  DecayReport report;
  for (int N : Ns) {
    check_size(N);
    if (blocks.empty()) {
      report.rows.push_back({N, 0.0, 0.0});
      continue;
    }
    std::vector<Renderer> renderers;
    std::vector<Eigen::VectorXcd> centres;
    for (const auto& b : blocks) {
      renderers.emplace_back(b.block, N);
      centres.push_back(discretize(b.centre, N));
    }
    const auto values = run_trials(trials, options, [&](std::size_t k) {
      Sampled sampled(sample(N, seed, k));
      Eigen::MatrixXcd acc;
      for (std::size_t i = 0; i < renderers.size(); ++i) {
        Eigen::MatrixXcd m = renderers[i].product(sampled);
        m.diagonal() -= centres[i];
        if (i == 0) acc = std::move(m);
        else if (i + 1 < renderers.size()) acc = acc * m;
        else return acc.transpose().cwiseProduct(m).sum() / static_cast<double>(N);
      }
      return acc.trace() / static_cast<double>(N);
    });
    const auto [mean, se] = mean_and_stderr(values);
    report.rows.push_back({N, mean, se});
  }
  if (report.rows.size() >= 2) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    bool positive = true;
    for (const auto& r : report.rows) {
      const double m = std::abs(r.mean);
      if (m == 0.0) positive = false;
      const double x = std::log(static_cast<double>(r.N)), y = positive ? std::log(m) : 0.0;
      sx += x, sy += y, sxx += x * x, sxy += x * y;
    }
    const double n = static_cast<double>(report.rows.size());
    const double den = n * sxx - sx * sx;
    if (positive && den > 0) report.slope = (n * sxy - sx * sy) / den;
  }
  return report;
}

nlohmann::json DecayReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) {
    rows_json.push_back({{"N", r.N},
                         {"mean_re", r.mean.real()},
                         {"mean_im", r.mean.imag()},
                         {"abs_mean", std::abs(r.mean)},
                         {"stderr", r.stderr_}});
  }
  return {{"rows", rows_json}, {"slope", slope ? nlohmann::json(*slope) : nlohmann::json(nullptr)}};
}

GrowthReport growth_check(int p, std::span<const int> Ns, std::size_t trials, std::uint64_t seed,
                          const MonteCarloOptions& options) {
  if (p < 1 || p > 6) throw ArgumentError("growth check supports 1 <= p <= 6, got " + std::to_string(p));
  std::vector<Letter> letters;
  for (int i = 0; i < p; ++i) {
    letters.push_back(Letter::xstar());
    letters.push_back(Letter::x());
  }
  const Word w(std::move(letters));
  GrowthReport report{p, {}, false};
  for (int N : Ns) {
    const auto r = estimate_trace(w, N, trials, seed, options);
    report.rows.push_back({N, r.mean.real(), r.stderr_});
  }
  if (report.rows.size() >= 2) {
    const auto& first = report.rows.front();
    const auto& last = report.rows.back();
    report.grows = last.ratio - first.ratio > 3.0 * std::hypot(first.stderr_, last.stderr_);
  }
  return report;
}

nlohmann::json GrowthReport::to_json() const {
  nlohmann::json rows_json = nlohmann::json::array();
  for (const auto& r : rows) rows_json.push_back({{"N", r.N}, {"ratio", r.ratio}, {"stderr", r.stderr_}});
  return {{"p", p}, {"rows", rows_json}, {"grows", grows}};
}

}  // namespace vdm
