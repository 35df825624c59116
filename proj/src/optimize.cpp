#include "qtrade/optimize.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <string>

#include "qtrade/errors.hpp"
#include "qtrade/random.hpp"

namespace qtrade {

void OptConfig::validate() const {
  if (restarts < 1) throw ValidationError("OptConfig: restarts must be positive");
  if (max_iters < 1) throw ValidationError("OptConfig: max_iters must be positive");
  if (!(tol > 0.0)) throw ValidationError("OptConfig: tol must be positive");
  if (m_outcomes && *m_outcomes < 1) throw ValidationError("OptConfig: m_outcomes must be positive");
}

double Objective::operator()(const Mat& v) const {
  if (value) return value(v);
  double s = offset;
  for (Eigen::Index x = 0; x < v.rows(); ++x) s += row_term(v.row(x));
  return s;
}

double OptResult::spread() const {
  if (per_restart_values.size() < 2) return std::numeric_limits<double>::infinity();
  const double best = per_restart_values[static_cast<size_t>(best_restart)];
  double runner = std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < per_restart_values.size(); ++i) {
    if (static_cast<int>(i) == best_restart) continue;
    runner = std::min(runner, std::abs(per_restart_values[i] - best));
  }
  return runner;
}

Mat unitary_exp(const Mat& hermitian) {
  Eigen::SelfAdjointEigenSolver<Mat> es(hermitian);
  const auto& w = es.eigenvalues();
  Vec phases(w.size());
  for (Eigen::Index i = 0; i < w.size(); ++i) phases(i) = std::polar(1.0, w(i));
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

Mat polar_isometry(const Mat& v) {
  Eigen::SelfAdjointEigenSolver<Mat> es(v.adjoint() * v);
  Eigen::VectorXd inv_sqrt = es.eigenvalues().cwiseMax(1e-300).cwiseSqrt().cwiseInverse();
  return v * es.eigenvectors() * inv_sqrt.asDiagonal() * es.eigenvectors().adjoint();
}

Mat param_to_unitary(const std::vector<double>& theta) {
  const auto m = static_cast<int>(std::lround(std::sqrt(static_cast<double>(theta.size()))));
  if (m < 1 || static_cast<size_t>(m) * m != theta.size()) {
    throw ValidationError("param_to_unitary: theta length " + std::to_string(theta.size()) + " is not a square");
  }
  Mat h = Mat::Zero(m, m);
  size_t p = 0;
  for (int j = 0; j < m; ++j) h(j, j) = theta[p++];
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      h(j, k) = cplx(theta[p], theta[p + 1]);
      h(k, j) = std::conj(h(j, k));
      p += 2;
    }
  }
  return unitary_exp(h);
}

namespace {

// Basis of u(m) acting on the rows of V: exp(i t G) rotates rows j and k
// (or rephases row j).
struct Generator {
  enum class Kind { SigmaX, SigmaY, Phase } kind;
  int j;
  int k;
};

std::vector<Generator> generators(int m, bool phase_invariant) {
  std::vector<Generator> gens;
  for (int j = 0; j < m; ++j) {
    for (int k = j + 1; k < m; ++k) {
      gens.push_back({Generator::Kind::SigmaX, j, k});
      gens.push_back({Generator::Kind::SigmaY, j, k});
    }
  }
  if (!phase_invariant) {
    for (int j = 0; j < m; ++j) gens.push_back({Generator::Kind::Phase, j, j});
  }
  return gens;
}

void rotated_rows(const Mat& v, const Generator& g, double t, Eigen::RowVectorXcd& rj, Eigen::RowVectorXcd& rk) {
  const double c = std::cos(t);
  const double s = std::sin(t);
  switch (g.kind) {
    case Generator::Kind::SigmaX:
      rj = c * v.row(g.j) + cplx(0.0, s) * v.row(g.k);
      rk = cplx(0.0, s) * v.row(g.j) + c * v.row(g.k);
      break;
    case Generator::Kind::SigmaY:
      rj = c * v.row(g.j) + s * v.row(g.k);
      rk = -s * v.row(g.j) + c * v.row(g.k);
      break;
    case Generator::Kind::Phase:
      rj = std::polar(1.0, t) * v.row(g.j);
      rk = rj;
      break;
  }
}

Mat hermitian_from(const std::vector<Generator>& gens, const Eigen::VectorXd& coeff, int m) {
  Mat h = Mat::Zero(m, m);
  for (size_t n = 0; n < gens.size(); ++n) {
    const auto& g = gens[n];
    const double d = coeff(static_cast<Eigen::Index>(n));
    switch (g.kind) {
      case Generator::Kind::SigmaX:
        h(g.j, g.k) += d;
        h(g.k, g.j) += d;
        break;
      case Generator::Kind::SigmaY:
        h(g.j, g.k) += cplx(0.0, -d);
        h(g.k, g.j) += cplx(0.0, d);
        break;
      case Generator::Kind::Phase:
        h(g.j, g.j) += d;
        break;
    }
  }
  return h;
}

struct LocalResult {
  Mat v;
  double value = 0.0;
  int iterations = 0;
  std::vector<double> trajectory;
};

// BFGS in the Lie-algebra coordinates of left rotations V -> exp(i H) V,
// with central finite-difference gradients and Armijo backtracking.
class LocalSearch {
 public:
  LocalSearch(const Objective& obj, Direction dir, int m, const OptConfig& cfg)
      : obj_(obj), sign_(dir == Direction::Min ? 1.0 : -1.0), m_(m), cfg_(cfg),
        gens_(generators(m, obj.phase_invariant)) {}

  LocalResult run(Mat v) {
    LocalResult out;
    double f = evaluate(v, terms_);
    if (cfg_.record_trajectory) out.trajectory.push_back(sign_ * f);
    const auto n = static_cast<Eigen::Index>(gens_.size());
    if (n == 0) {
      out.v = std::move(v);
      out.value = sign_ * f;
      out.iterations = 1;
      return out;
    }

    Eigen::VectorXd g = gradient(v, f);
    Eigen::MatrixXd hinv = Eigen::MatrixXd::Identity(n, n);
    bool fresh = true;
    int small_steps = 0;
    int it = 0;
    while (it < cfg_.max_iters) {
      ++it;
      if (g.lpNorm<Eigen::Infinity>() < 1e-12) break;
      Eigen::VectorXd d = -hinv * g;
      double slope = g.dot(d);
      if (!(slope < 0.0)) {
        hinv.setIdentity();
        fresh = true;
        d = -g;
        slope = -g.squaredNorm();
      }
      const Mat h = hermitian_from(gens_, d, m_);
      Eigen::SelfAdjointEigenSolver<Mat> es(h);

      double t = std::min(1.0, (std::numbers::pi / 4.0) / d.lpNorm<Eigen::Infinity>());
      bool accepted = false;
      Mat v_new;
      double f_new = f;
      std::vector<double> terms_new;
      for (int bt = 0; bt < 60; ++bt) {
        Vec phases(m_);
        for (int i = 0; i < m_; ++i) phases(i) = std::polar(1.0, t * es.eigenvalues()(i));
        v_new = es.eigenvectors() * (phases.asDiagonal() * (es.eigenvectors().adjoint() * v));
        f_new = evaluate(v_new, terms_new);
        if (f_new <= f + 1e-4 * t * slope) {
          accepted = true;
          break;
        }
        t *= 0.5;
      }
      if (!accepted) {
        if (fresh) break;
        hinv.setIdentity();
        fresh = true;
        continue;
      }

      if (it % 25 == 0) {
        v_new = polar_isometry(v_new);
        f_new = evaluate(v_new, terms_new);
      }
      const double improvement = f - f_new;
      v = std::move(v_new);
      terms_ = std::move(terms_new);
      f = f_new;
      if (cfg_.record_trajectory) out.trajectory.push_back(sign_ * f);

      Eigen::VectorXd g_new = gradient(v, f);
      const Eigen::VectorXd s = t * d;
      const Eigen::VectorXd y = g_new - g;
      const double sy = s.dot(y);
      if (sy > 1e-12 * s.norm() * y.norm()) {
        if (fresh) hinv *= sy / y.squaredNorm();
        const double rho = 1.0 / sy;
        const Eigen::MatrixXd left = Eigen::MatrixXd::Identity(n, n) - rho * s * y.transpose();
        hinv = left * hinv * left.transpose() + rho * s * s.transpose();
        fresh = false;
      }
      g = std::move(g_new);

      if (improvement < cfg_.tol) {
        if (++small_steps >= 2) break;
      } else {
        small_steps = 0;
      }
    }

    out.v = polar_isometry(v);
    out.value = obj_(out.v);
    if (!std::isfinite(out.value)) throw NumericalError("optimize: objective returned a non-finite value");
    out.iterations = it;
    return out;
  }

 private:
  // Signed objective (always minimized); fills per-row terms when separable.
  double evaluate(const Mat& v, std::vector<double>& terms) const {
    double value;
    if (obj_.row_term) {
      terms.resize(static_cast<size_t>(v.rows()));
      value = obj_.offset;
      for (Eigen::Index x = 0; x < v.rows(); ++x) {
        terms[static_cast<size_t>(x)] = obj_.row_term(v.row(x));
        value += terms[static_cast<size_t>(x)];
      }
    } else {
      value = obj_.value(v);
    }
    if (!std::isfinite(value)) throw NumericalError("optimize: objective returned a non-finite value");
    return sign_ * value;
  }

  Eigen::VectorXd gradient(const Mat& v, double f) const {
    constexpr double h = 1e-6;
    Eigen::VectorXd g(static_cast<Eigen::Index>(gens_.size()));
    Eigen::RowVectorXcd rj, rk;
    Mat work;
    if (!obj_.row_term) work = v;
    for (size_t n = 0; n < gens_.size(); ++n) {
      const auto& gen = gens_[n];
      double side[2];
      for (int s = 0; s < 2; ++s) {
        const double t = s == 0 ? h : -h;
        rotated_rows(v, gen, t, rj, rk);
        if (obj_.row_term) {
          double delta = obj_.row_term(rj) - terms_[static_cast<size_t>(gen.j)];
          if (gen.kind != Generator::Kind::Phase) delta += obj_.row_term(rk) - terms_[static_cast<size_t>(gen.k)];
          side[s] = sign_ * delta;
        } else {
          work.row(gen.j) = rj;
          work.row(gen.k) = rk;
          const double value = obj_.value(work);
          if (!std::isfinite(value)) throw NumericalError("optimize: objective returned a non-finite value");
          side[s] = sign_ * value - f;
          work.row(gen.j) = v.row(gen.j);
          work.row(gen.k) = v.row(gen.k);
        }
      }
      g(static_cast<Eigen::Index>(n)) = (side[0] - side[1]) / (2.0 * h);
    }
    return g;
  }

  const Objective& obj_;
  double sign_;
  int m_;
  const OptConfig& cfg_;
  std::vector<Generator> gens_;
  std::vector<double> terms_;
};

}  // namespace

OptResult optimize(const Objective& objective, Direction direction, int rows, int cols, const OptConfig& config) {
  config.validate();
  if (!objective.value && !objective.row_term) throw ValidationError("optimize: objective has no evaluator");
  if (cols < 1 || rows < cols) throw ValidationError("optimize: isometry shape must satisfy rows >= cols >= 1");

  OptResult result;
  result.seed = config.seed;
  result.restarts_used = config.restarts;
  LocalSearch search(objective, direction, rows, config);
  for (int k = 0; k < config.restarts; ++k) {
    Mat start;
    if (k == 0) {
      start = Mat::Identity(rows, cols);
    } else {
      Rng rng(derive_seed(config.seed, static_cast<std::uint64_t>(k)));
      start = haar_unitary(rows, rng).leftCols(cols);
    }
    LocalResult local = search.run(std::move(start));
    result.per_restart_values.push_back(local.value);
    result.total_iterations += local.iterations;
    if (config.record_trajectory) result.trajectories.push_back(std::move(local.trajectory));
    const bool better = k == 0 || (direction == Direction::Min ? local.value < result.value : local.value > result.value);
    if (better) {
      result.value = local.value;
      result.argument = std::move(local.v);
      result.iterations = local.iterations;
      result.best_restart = k;
    }
  }
  return result;
}

}  // namespace qtrade
