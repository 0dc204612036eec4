#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

#include "flm/quadrature.hpp"

namespace flm {

/// Complex function sampled at Chebyshev points of the second kind on each
/// panel and evaluated by the barycentric formula.
class ChebPanels {
 public:
  ChebPanels() = default;
  explicit ChebPanels(int degree) : n_(degree) {
    const double pi = std::numbers::pi;
    nodes_.resize(static_cast<std::size_t>(n_) + 1);
    weights_.resize(nodes_.size());
    for (int j = 0; j <= n_; ++j) {
      nodes_[static_cast<std::size_t>(j)] = -std::cos(pi * j / n_);
      weights_[static_cast<std::size_t>(j)] = ((j % 2) ? -1.0 : 1.0) * ((j == 0 || j == n_) ? 0.5 : 1.0);
    }
  }

  /// Appends the panel [a, b]; f is sampled at the n+1 nodes.
  template <typename F>
  void add_panel(double a, double b, F&& f) {
    if (breaks_.empty()) breaks_.push_back(a);
    breaks_.push_back(b);
    for (double s : nodes_) values_.push_back(f(a + 0.5 * (b - a) * (s + 1.0)));
  }

  double lo() const { return breaks_.front(); }
  double hi() const { return breaks_.back(); }
  std::size_t panels() const { return breaks_.size() - 1; }

  cplx operator()(double x) const {
    const auto it = std::upper_bound(breaks_.begin(), breaks_.end(), x);
    std::size_t p = it == breaks_.begin() ? 0 : static_cast<std::size_t>(it - breaks_.begin()) - 1;
    p = std::min(p, panels() - 1);
    const double a = breaks_[p], b = breaks_[p + 1];
    const double s = 2.0 * (x - a) / (b - a) - 1.0;
    const cplx* v = values_.data() + p * nodes_.size();
    cplx num = 0.0;
    double den = 0.0;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double d = s - nodes_[j];
      if (d == 0.0) return v[j];
      const double w = weights_[j] / d;
      num += w * v[j];
      den += w;
    }
    return num / den;
  }

 private:
  int n_ = 0;
  std::vector<double> nodes_, weights_, breaks_;
  std::vector<cplx> values_;
};

}  // namespace flm
