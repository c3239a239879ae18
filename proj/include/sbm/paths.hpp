#pragma once

#include <stdexcept>
#include <vector>

#include "sbm/rng.hpp"

namespace sbm {

// Ensemble of m-dimensional Brownian paths on [0, T] with uniform steps.
// Increments are i.i.d. centered Gaussians of variance dt per component,
// generated lazily from (seed, path, step, component); nothing is stored.
class PathEnsemble {
public:
  PathEnsemble(int m, double T, int steps, long long n_paths, std::uint64_t seed)
      : m_(m), steps_(steps), n_paths_(n_paths), seed_(seed), dt_(T / steps) {
    if (m < 1) throw std::invalid_argument("PathEnsemble: m must be positive");
    if (!(T > 0)) throw std::invalid_argument("PathEnsemble: T must be positive");
    if (steps < 1) throw std::invalid_argument("PathEnsemble: steps must be positive");
    if (n_paths < 1) throw std::invalid_argument("PathEnsemble: n_paths must be positive");
  }

  int m() const { return m_; }
  int steps() const { return steps_; }
  long long n_paths() const { return n_paths_; }
  std::uint64_t seed() const { return seed_; }
  double dt() const { return dt_; }
  double T() const { return dt_ * steps_; }

  double increment(long long path, int step, int comp) const {
    std::uint64_t k = std::uint64_t(step) * m_ + comp;
    return std::sqrt(dt_) * normal_at(seed_, std::uint64_t(path), k);
  }

private:
  int m_;
  int steps_;
  long long n_paths_;
  std::uint64_t seed_;
  double dt_;
};

// Adapted view of one path.  At horizon r the filtration contains the
// increments with step index < r, equivalently the positions b_{t_0..t_r};
// touching anything later throws.
class PathView {
public:
  PathView(const PathEnsemble& e, long long path) : e_(&e), path_(path) {
    if (path < 0 || path >= e.n_paths()) throw std::out_of_range("PathView: path index");
    cum_.assign(size_t(e.steps() + 1) * e.m(), 0.0);
    for (int r = 0; r < e.steps(); ++r)
      for (int a = 0; a < e.m(); ++a)
        cum_[size_t(r + 1) * e.m() + a] = cum_[size_t(r) * e.m() + a] + e.increment(path, r, a);
  }

  void set_horizon(int r) { horizon_ = r; }
  int horizon() const { return horizon_; }

  double increment(int step, int comp) const {
    if (step >= horizon_)
      throw std::logic_error("PathView: increment beyond the adapted horizon");
    require_range(step, comp);
    return cum_[size_t(step + 1) * e_->m() + comp] - cum_[size_t(step) * e_->m() + comp];
  }

  double position(int k, int comp) const {
    if (k > horizon_) throw std::logic_error("PathView: position beyond the adapted horizon");
    if (k < 0 || k > e_->steps() || comp < 0 || comp >= e_->m())
      throw std::out_of_range("PathView: position index");
    return cum_[size_t(k) * e_->m() + comp];
  }

  const PathEnsemble& ensemble() const { return *e_; }

private:
  void require_range(int step, int comp) const {
    if (step < 0 || step >= e_->steps() || comp < 0 || comp >= e_->m())
      throw std::out_of_range("PathView: increment index");
  }

  const PathEnsemble* e_;
  long long path_;
  std::vector<double> cum_;
  int horizon_ = 0;
};

}  // namespace sbm
