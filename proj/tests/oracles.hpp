#pragma once

// Test-side oracles, kept independent of the library's sparse/iterative
// code paths: dense matrix algebra goes through Eigen.

#include <Eigen/Dense>
#include <algorithm>
#include <numeric>
#include <vector>

#include "destruct/graph.hpp"

namespace oracle {

inline Eigen::MatrixXd adjacency(const destruct::Graph& g) {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(g.n, g.n);
  for (auto [u, v] : g.edges()) {
    a(u, v) = 1.0;
    a(v, u) = 1.0;
  }
  return a;
}

// column-stochastic random-walk matrix W = A D^-1
inline Eigen::MatrixXd walk_matrix(const destruct::Graph& g) {
  Eigen::MatrixXd w = adjacency(g);
  for (int j = 0; j < g.n; ++j) {
    double d = g.degree(j);
    if (d > 0) w.col(j) /= d;
  }
  return w;
}

// (W^k)_{uv} for k = 1..kmax via dense powers
inline std::vector<Eigen::MatrixXd> walk_powers(const destruct::Graph& g, int kmax) {
  std::vector<Eigen::MatrixXd> p;
  Eigen::MatrixXd w = walk_matrix(g);
  Eigen::MatrixXd cur = w;
  for (int k = 1; k <= kmax; ++k) {
    p.push_back(cur);
    cur = w * cur;
  }
  return p;
}

// dense solve of (I - damping W) x = e_v
inline Eigen::VectorXd ppr_dense(const destruct::Graph& g, int v, double damping) {
  Eigen::MatrixXd m = Eigen::MatrixXd::Identity(g.n, g.n) - damping * walk_matrix(g);
  Eigen::VectorXd e = Eigen::VectorXd::Zero(g.n);
  e(v) = 1.0;
  return m.partialPivLu().solve(e);
}

// AUC as the integral of the ROC curve obtained by sweeping the threshold
// through the sorted scores (trapezoid over tie blocks).
inline double auc_by_roc_sweep(const std::vector<double>& scores, const std::vector<int>& labels) {
  int pos = 0, neg = 0;
  for (int l : labels) (l ? pos : neg)++;
  std::vector<int> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return scores[a] > scores[b]; });
  double area = 0.0;
  double tp = 0.0, fp = 0.0;
  std::size_t i = 0;
  while (i < order.size()) {
    std::size_t j = i;
    int dtp = 0, dfp = 0;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) {
      (labels[order[j]] ? dtp : dfp)++;
      ++j;
    }
    double tp2 = tp + dtp, fp2 = fp + dfp;
    area += (fp2 - fp) / neg * (tp + tp2) / (2.0 * pos);
    tp = tp2;
    fp = fp2;
    i = j;
  }
  return area;
}

}  // namespace oracle
