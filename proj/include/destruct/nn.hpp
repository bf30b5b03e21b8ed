#pragma once

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "destruct/distance.hpp"
#include "destruct/graph.hpp"
#include "destruct/rng.hpp"

namespace destruct {

using Vector = std::vector<double>;

struct Matrix {
  int rows = 0, cols = 0;
  std::vector<double> a;

  Matrix() = default;
  Matrix(int r, int c) : rows(r), cols(c), a(static_cast<std::size_t>(r) * c, 0.0) {}

  double* row(int i) { return a.data() + static_cast<std::size_t>(i) * cols; }
  const double* row(int i) const { return a.data() + static_cast<std::size_t>(i) * cols; }
  double& at(int i, int j) { return a[static_cast<std::size_t>(i) * cols + j]; }
  double at(int i, int j) const { return a[static_cast<std::size_t>(i) * cols + j]; }

  bool operator==(const Matrix&) const = default;
};

enum class ModelKind { Wlgnn, DegnnSpd, DegnnLp, DeagnnSpd, DeagnnPr };
enum class AggKind { Gcn, Gin };

inline std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::Wlgnn: return "wlgnn";
    case ModelKind::DegnnSpd: return "degnn-spd";
    case ModelKind::DegnnLp: return "degnn-lp";
    case ModelKind::DeagnnSpd: return "deagnn-spd";
    case ModelKind::DeagnnPr: return "deagnn-pr";
  }
  return "?";
}

inline ModelKind model_kind_from(const std::string& s) {
  if (s == "wlgnn" || s == "gcn") return ModelKind::Wlgnn;
  if (s == "degnn-spd") return ModelKind::DegnnSpd;
  if (s == "degnn-lp") return ModelKind::DegnnLp;
  if (s == "deagnn-spd") return ModelKind::DeagnnSpd;
  if (s == "deagnn-pr") return ModelKind::DeagnnPr;
  throw std::invalid_argument("unknown model kind: " + s);
}

struct ModelConfig {
  ModelKind kind = ModelKind::DegnnSpd;
  AggKind agg = AggKind::Gcn;
  int layers = 2;
  int hidden = 20;
  double dropout = 0.0;
  int d_max = 3;
  int d_rw = 4;
  int prop_depth = 1;  // K-hop rings, DeagnnSpd only
  double damping = 0.9;
  double ppr_tol = 1e-12;
  std::uint64_t seed = 0;

  int hops() const { return kind == ModelKind::DeagnnSpd ? prop_depth : 1; }

  bool uses_spd_features() const {
    return kind == ModelKind::DegnnSpd || kind == ModelKind::DeagnnSpd ||
           kind == ModelKind::DeagnnPr;
  }

  int de_dim() const {
    if (kind == ModelKind::Wlgnn) return 0;
    if (kind == ModelKind::DegnnLp) return d_rw + 1;
    return d_max + 1;
  }

  // Receptive radius in graph hops per stacked layer block.
  int receptive_radius() const { return layers * hops(); }

  // The sanctioned training grid; experiment code may step outside it.
  void validate_grid() const {
    auto in = [](int v, std::initializer_list<int> set) {
      for (int s : set)
        if (v == s) return true;
      return false;
    };
    if (!in(layers, {1, 2, 3})) throw std::invalid_argument("layers outside grid {1,2,3}");
    if (!in(hidden, {20, 50, 80, 100}))
      throw std::invalid_argument("hidden outside grid {20,50,80,100}");
    if (dropout != 0.0 && dropout != 0.2)
      throw std::invalid_argument("dropout outside grid {0,0.2}");
    if (!in(d_rw, {3, 4})) throw std::invalid_argument("d_rw outside grid {3,4}");
    if (!in(d_max, {3, 4})) throw std::invalid_argument("d_max outside grid {3,4}");
    if (!in(prop_depth, {1, 2, 3})) throw std::invalid_argument("prop_depth outside grid {1,2,3}");
  }
};

// All trainable tensors. theta[l][k] is the weight of hop branch k at layer
// l; readout_w scores pooled vectors for binary tasks; class_w/class_b form
// the one-layer softmax head for node classification.
struct ModelParams {
  std::vector<std::vector<Matrix>> theta;
  Vector readout_w;
  Matrix class_w;
  Vector class_b;

  void scale_add(const ModelParams& grad, double factor) {
    for (std::size_t l = 0; l < theta.size(); ++l)
      for (std::size_t k = 0; k < theta[l].size(); ++k)
        for (std::size_t i = 0; i < theta[l][k].a.size(); ++i)
          theta[l][k].a[i] += factor * grad.theta[l][k].a[i];
    for (std::size_t i = 0; i < readout_w.size(); ++i) readout_w[i] += factor * grad.readout_w[i];
    for (std::size_t i = 0; i < class_w.a.size(); ++i) class_w.a[i] += factor * grad.class_w.a[i];
    for (std::size_t i = 0; i < class_b.size(); ++i) class_b[i] += factor * grad.class_b[i];
  }

  bool operator==(const ModelParams&) const = default;
};

// Symmetric uniform init scaled by 1/sqrt(fan_in); the draw order is fixed
// so a (config, in_dim, seed) triple always yields the same tensors.
inline ModelParams init_params(const ModelConfig& cfg, int in_dim, int n_classes,
                               std::uint64_t seed) {
  Rng rng(seed, 0x70617261);
  ModelParams p;
  p.theta.resize(cfg.layers);
  for (int l = 0; l < cfg.layers; ++l) {
    int d_in = (l == 0) ? in_dim : cfg.hidden;
    double scale = 1.0 / std::sqrt(static_cast<double>(d_in));
    p.theta[l].resize(cfg.hops());
    for (int k = 0; k < cfg.hops(); ++k) {
      Matrix m(d_in, cfg.hidden);
      for (double& x : m.a) x = rng.next_symmetric(scale);
      p.theta[l][k] = std::move(m);
    }
  }
  int top = (cfg.layers == 0) ? in_dim : cfg.hidden;
  double rscale = 1.0 / std::sqrt(static_cast<double>(top));
  p.readout_w.resize(top);
  for (double& x : p.readout_w) x = rng.next_symmetric(rscale);
  if (n_classes > 0) {
    p.class_w = Matrix(top, n_classes);
    for (double& x : p.class_w.a) x = rng.next_symmetric(rscale);
    p.class_b.assign(n_classes, 0.0);
  }
  return p;
}

inline ModelParams zeros_like(const ModelParams& p) {
  ModelParams z;
  z.theta.resize(p.theta.size());
  for (std::size_t l = 0; l < p.theta.size(); ++l) {
    z.theta[l].resize(p.theta[l].size());
    for (std::size_t k = 0; k < p.theta[l].size(); ++k)
      z.theta[l][k] = Matrix(p.theta[l][k].rows, p.theta[l][k].cols);
  }
  z.readout_w.assign(p.readout_w.size(), 0.0);
  z.class_w = Matrix(p.class_w.rows, p.class_w.cols);
  z.class_b.assign(p.class_b.size(), 0.0);
  return z;
}

// A fully prepared forward-pass instance: features with the DE block
// appended, plus whatever aggregation structure the model kind needs.
// Edge attributes would enter through f2 here; the datasets carried by this
// project have none, so the pathway stays a documented extension point.
struct ModelInput {
  const Graph* g = nullptr;
  std::vector<int> target;
  Matrix features;
  std::vector<std::vector<std::vector<int>>> rings;  // [v][k-1] exclusive k-hop ring
  Matrix ppr;                                        // ppr.at(u,v) = ppr(u | v)
};

// Degree scalar normalized by max degree; the fallback when a graph has no
// node attributes.
inline Matrix base_features(const Graph& g) {
  if (!g.node_attrs.empty()) {
    int k = static_cast<int>(g.node_attrs[0].size());
    Matrix m(g.n, k);
    for (int v = 0; v < g.n; ++v)
      for (int j = 0; j < k; ++j) m.at(v, j) = g.node_attrs[v][j];
    return m;
  }
  Matrix m(g.n, 1);
  double md = std::max(1, g.max_degree());
  for (int v = 0; v < g.n; ++v) m.at(v, 0) = g.degree(v) / md;
  return m;
}

inline ModelInput prepare_input(const Graph& g, std::vector<int> target, const ModelConfig& cfg,
                                const Matrix* base_override = nullptr) {
  check_target(g, target);
  ModelInput in;
  in.g = &g;
  in.target = std::move(target);

  Matrix base = base_override ? *base_override : base_features(g);
  if (base.rows != g.n) throw std::invalid_argument("base feature row count mismatch");
  int d0 = base.cols + cfg.de_dim();
  in.features = Matrix(g.n, d0);
  for (int v = 0; v < g.n; ++v)
    for (int j = 0; j < base.cols; ++j) in.features.at(v, j) = base.at(v, j);

  if (cfg.kind != ModelKind::Wlgnn) {
    DeParams dp{cfg.d_max, cfg.d_rw};
    auto de = de_for_set(g, in.target,
                         cfg.kind == ModelKind::DegnnLp ? DeVariant::LandingProb
                                                        : DeVariant::SpdOneHot,
                         dp);
    for (int v = 0; v < g.n; ++v)
      for (int j = 0; j < cfg.de_dim(); ++j) in.features.at(v, base.cols + j) = de[v][j];
  }

  if (cfg.kind == ModelKind::DeagnnSpd) {
    in.rings.assign(g.n, {});
    for (int v = 0; v < g.n; ++v) {
      auto t = spd_from(g, v);
      in.rings[v].assign(cfg.prop_depth, {});
      for (int u = 0; u < g.n; ++u)
        if (t.dist[u] >= 1 && t.dist[u] != kInfDist && t.dist[u] <= cfg.prop_depth)
          in.rings[v][t.dist[u] - 1].push_back(u);
    }
  }
  if (cfg.kind == ModelKind::DeagnnPr) {
    in.ppr = Matrix(g.n, g.n);
    for (int v = 0; v < g.n; ++v) {
      auto col = personalized_pagerank(g, v, cfg.damping, cfg.ppr_tol);
      for (int u = 0; u < g.n; ++u) in.ppr.at(u, v) = col[u];
    }
  }
  return in;
}

namespace detail {

inline bool lex_less(const double* a, const double* b, int d) {
  for (int i = 0; i < d; ++i) {
    if (a[i] < b[i]) return true;
    if (a[i] > b[i]) return false;
  }
  return false;
}

// Accumulates a multiset of equally shaped vectors in ascending lexicographic
// value order. The result then depends on the multiset only, which is what
// makes model outputs bit-identical under node relabeling.
class SortedAccumulator {
 public:
  void reset(int dim) {
    dim_ = dim;
    buf_.clear();
  }
  void add_row(const double* r) { buf_.insert(buf_.end(), r, r + dim_); }
  void add_scaled_row(const double* r, double s) {
    for (int i = 0; i < dim_; ++i) buf_.push_back(r[i] * s);
  }
  void sum_into(double* out) {
    int k = static_cast<int>(buf_.size()) / std::max(1, dim_);
    order_.resize(k);
    for (int i = 0; i < k; ++i) order_[i] = i;
    std::sort(order_.begin(), order_.end(), [&](int x, int y) {
      return lex_less(buf_.data() + static_cast<std::size_t>(x) * dim_,
                      buf_.data() + static_cast<std::size_t>(y) * dim_, dim_);
    });
    std::fill(out, out + dim_, 0.0);
    for (int i : order_) {
      const double* r = buf_.data() + static_cast<std::size_t>(i) * dim_;
      for (int j = 0; j < dim_; ++j) out[j] += r[j];
    }
  }

 private:
  int dim_ = 0;
  std::vector<double> buf_;
  std::vector<int> order_;
};

inline void matvec_rowmajor(const double* x, const Matrix& w, double* out) {
  for (int j = 0; j < w.cols; ++j) out[j] = 0.0;
  for (int i = 0; i < w.rows; ++i) {
    double xi = x[i];
    if (xi == 0.0) continue;
    const double* wr = w.row(i);
    for (int j = 0; j < w.cols; ++j) out[j] += xi * wr[j];
  }
}

}  // namespace detail

struct Forward {
  std::vector<Matrix> h;                  // h[0] = input features, h[l+1] after layer l
  std::vector<std::vector<Matrix>> agg;   // aggregated inputs per layer/hop
  std::vector<std::vector<Matrix>> pre;   // pre-ReLU activations per layer/hop
  std::vector<Matrix> mask;               // dropout masks (train mode only)
  Vector pooled;                          // sum pooling over S (structural output)
  Vector readout;                         // difference pooling (task readout; h_s for |S|=1)
};

// Runs the message-passing stack. Aggregation is mean-with-self-loop for
// GCN, plain sum for GIN, exclusive k-hop rings for the SPD-controlled
// variant and a PPR-weighted dense sum for the PR variant. Neighbor sums
// are order-canonicalized (see SortedAccumulator).
inline Forward forward(const ModelInput& in, const ModelConfig& cfg, const ModelParams& params,
                       bool train = false, Rng* dropout_rng = nullptr) {
  const Graph& g = *in.g;
  if (static_cast<int>(params.theta.size()) != cfg.layers)
    throw std::invalid_argument("layer count mismatch between params and config");
  Forward f;
  f.h.reserve(cfg.layers + 1);
  f.h.push_back(in.features);
  f.agg.resize(cfg.layers);
  f.pre.resize(cfg.layers);
  if (train && cfg.dropout > 0.0) f.mask.resize(cfg.layers);

  detail::SortedAccumulator acc;
  for (int l = 0; l < cfg.layers; ++l) {
    const Matrix& hin = f.h.back();
    const int d_in = hin.cols;
    const int hops = cfg.hops();
    Matrix hout(g.n, cfg.hidden);
    f.agg[l].assign(hops, Matrix(g.n, d_in));
    f.pre[l].assign(hops, Matrix(g.n, cfg.hidden));

    for (int k = 0; k < hops; ++k) {
      const Matrix& theta = params.theta[l][k];
      if (theta.rows != d_in || theta.cols != cfg.hidden)
        throw std::invalid_argument("theta shape mismatch at layer " + std::to_string(l));
      for (int v = 0; v < g.n; ++v) {
        double* m = f.agg[l][k].row(v);
        acc.reset(d_in);
        if (cfg.kind == ModelKind::DeagnnPr) {
          for (int u = 0; u < g.n; ++u) acc.add_scaled_row(hin.row(u), in.ppr.at(u, v));
          acc.sum_into(m);
        } else {
          const std::vector<int>* nbrs = nullptr;
          if (cfg.kind == ModelKind::DeagnnSpd) {
            if (static_cast<int>(in.rings[v].size()) < hops)
              throw std::invalid_argument("prop_depth exceeds precomputed ring depth");
            nbrs = &in.rings[v][k];
          } else {
            nbrs = &g.adj[v];
          }
          for (int u : *nbrs) acc.add_row(hin.row(u));
          acc.sum_into(m);
          for (int j = 0; j < d_in; ++j) m[j] += hin.at(v, j);  // self loop
          // the SPD-ring formula is mean-normalized regardless of the
          // wlgnn basis flag; GIN only changes the 1-hop basis
          if (cfg.agg == AggKind::Gcn || cfg.kind == ModelKind::DeagnnSpd) {
            double denom = static_cast<double>(nbrs->size()) + 1.0;
            for (int j = 0; j < d_in; ++j) m[j] /= denom;
          }
        }
        detail::matvec_rowmajor(m, theta, f.pre[l][k].row(v));
      }
    }

    for (int v = 0; v < g.n; ++v) {
      double* out = hout.row(v);
      for (int j = 0; j < cfg.hidden; ++j) {
        double s = 0.0;
        for (int k = 0; k < hops; ++k) s += std::max(0.0, f.pre[l][k].at(v, j));
        out[j] = s;
      }
    }

    if (train && cfg.dropout > 0.0) {
      if (!dropout_rng) throw std::invalid_argument("dropout requires an rng in train mode");
      f.mask[l] = Matrix(g.n, cfg.hidden);
      double keep = 1.0 - cfg.dropout;
      for (int v = 0; v < g.n; ++v)
        for (int j = 0; j < cfg.hidden; ++j) {
          double m = (dropout_rng->next_double() < keep) ? 1.0 / keep : 0.0;
          f.mask[l].at(v, j) = m;
          hout.at(v, j) *= m;
        }
    }

    for (double x : hout.a)
      if (std::isnan(x))
        throw std::runtime_error("NaN in forward at layer " + std::to_string(l));
    f.h.push_back(std::move(hout));
  }

  // structural output: order-canonical sum pooling over S
  const Matrix& top = f.h.back();
  f.pooled.assign(top.cols, 0.0);
  acc.reset(top.cols);
  for (int v : in.target) acc.add_row(top.row(v));
  acc.sum_into(f.pooled.data());

  // task readout: |S|=1 keeps the node vector, larger sets use difference
  // pooling over unordered member pairs
  if (in.target.size() == 1) {
    f.readout.assign(top.row(in.target[0]), top.row(in.target[0]) + top.cols);
  } else {
    acc.reset(top.cols);
    std::vector<double> tmp(top.cols);
    for (std::size_t i = 0; i < in.target.size(); ++i)
      for (std::size_t j = i + 1; j < in.target.size(); ++j) {
        const double* a = top.row(in.target[i]);
        const double* b = top.row(in.target[j]);
        for (int c = 0; c < top.cols; ++c) tmp[c] = std::fabs(a[c] - b[c]);
        acc.add_row(tmp.data());
      }
    f.readout.assign(top.cols, 0.0);
    acc.sum_into(f.readout.data());
  }
  return f;
}

// Component-wise |h_u - h_v| summed over unordered member pairs.
inline Vector difference_pool(const Matrix& h, const std::vector<int>& s) {
  if (s.size() < 2) throw std::invalid_argument("difference pool needs |S| >= 2");
  Vector z(h.cols, 0.0);
  for (std::size_t i = 0; i < s.size(); ++i)
    for (std::size_t j = i + 1; j < s.size(); ++j)
      for (int c = 0; c < h.cols; ++c) z[c] += std::fabs(h.at(s[i], c) - h.at(s[j], c));
  return z;
}

struct Prediction {
  double loss = 0.0;
  double score = 0.0;      // sigmoid probability (binary) or top-class prob
  int predicted = 0;
  Vector probs;            // multiclass probabilities
  Vector dz;               // dL/d readout vector
  double dlogit = 0.0;     // binary: sigmoid(logit) - label
};

inline Prediction predict_binary(const Vector& z, const ModelParams& p, int label) {
  if (z.size() != p.readout_w.size()) throw std::invalid_argument("readout shape mismatch");
  double logit = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) logit += p.readout_w[i] * z[i];
  if (std::isnan(logit)) throw std::runtime_error("NaN in forward at readout");
  double pr = 1.0 / (1.0 + std::exp(-logit));
  Prediction out;
  out.score = pr;
  out.predicted = pr > 0.5 ? 1 : 0;
  // numerically stable BCE in terms of the logit
  double mx = std::max(logit, 0.0);
  out.loss = mx - logit * label + std::log(std::exp(-mx) + std::exp(logit - mx));
  out.dlogit = pr - static_cast<double>(label);
  out.dz.assign(z.size(), 0.0);
  for (std::size_t i = 0; i < z.size(); ++i) out.dz[i] = out.dlogit * p.readout_w[i];
  return out;
}

inline Prediction predict_multiclass(const Vector& z, const ModelParams& p, int label) {
  int C = static_cast<int>(p.class_b.size());
  if (C < 2 || p.class_w.rows != static_cast<int>(z.size()))
    throw std::invalid_argument("class head shape mismatch");
  Vector logits(C, 0.0);
  for (int i = 0; i < p.class_w.rows; ++i)
    for (int c = 0; c < C; ++c) logits[c] += z[i] * p.class_w.at(i, c);
  for (int c = 0; c < C; ++c) logits[c] += p.class_b[c];
  double mx = *std::max_element(logits.begin(), logits.end());
  if (std::isnan(mx)) throw std::runtime_error("NaN in forward at readout");
  double denom = 0.0;
  for (int c = 0; c < C; ++c) denom += std::exp(logits[c] - mx);
  Prediction out;
  out.probs.resize(C);
  for (int c = 0; c < C; ++c) out.probs[c] = std::exp(logits[c] - mx) / denom;
  out.loss = -std::log(std::max(out.probs[label], 1e-300));
  out.predicted = static_cast<int>(std::max_element(out.probs.begin(), out.probs.end()) -
                                   out.probs.begin());
  out.score = out.probs[out.predicted];
  out.dz.assign(z.size(), 0.0);
  for (int c = 0; c < C; ++c) {
    double d = out.probs[c] - (c == label ? 1.0 : 0.0);
    for (int i = 0; i < p.class_w.rows; ++i) out.dz[i] += p.class_w.at(i, c) * d;
  }
  return out;
}

// Reverse-mode pass over the fixed layer graph: propagates dL/d(readout)
// from `pred.dz` through the pooling and the message-passing stack,
// accumulating body gradients into `grads`. DE features are constants, so
// nothing flows past h[0]. Head parameter gradients are handled by
// run_instance, which knows the label.
inline void backward(const ModelInput& in, const ModelConfig& cfg, const ModelParams& params,
                     const Forward& f, const Prediction& pred, ModelParams& grads) {
  const Graph& g = *in.g;
  const Matrix& top = f.h.back();

  // gradient w.r.t. the top-layer node representations
  Matrix dH(top.rows, top.cols);
  if (in.target.size() == 1) {
    for (int c = 0; c < top.cols; ++c) dH.at(in.target[0], c) += pred.dz[c];
  } else {
    for (std::size_t i = 0; i < in.target.size(); ++i)
      for (std::size_t j = i + 1; j < in.target.size(); ++j) {
        int a = in.target[i], b = in.target[j];
        for (int c = 0; c < top.cols; ++c) {
          double diff = top.at(a, c) - top.at(b, c);
          double s = (diff > 0.0) ? 1.0 : (diff < 0.0 ? -1.0 : 0.0);
          dH.at(a, c) += s * pred.dz[c];
          dH.at(b, c) -= s * pred.dz[c];
        }
      }
  }

  for (int l = cfg.layers - 1; l >= 0; --l) {
    const Matrix& hin = f.h[l];
    const int d_in = hin.cols;
    const int hops = cfg.hops();
    if (!f.mask.empty() && f.mask[l].rows == g.n)
      for (int v = 0; v < g.n; ++v)
        for (int j = 0; j < cfg.hidden; ++j) dH.at(v, j) *= f.mask[l].at(v, j);

    Matrix dHin(g.n, d_in);
    std::vector<double> dm(d_in);
    for (int k = 0; k < hops; ++k) {
      const Matrix& theta = params.theta[l][k];
      Matrix& dtheta = grads.theta[l][k];
      for (int v = 0; v < g.n; ++v) {
        // through ReLU of this hop branch
        const double* pre = f.pre[l][k].row(v);
        const double* gv = dH.row(v);
        // dZ = gv .* 1[pre>0]; dTheta += m^T dZ; dm = Theta dZ^T
        const double* m = f.agg[l][k].row(v);
        for (int j = 0; j < d_in; ++j) dm[j] = 0.0;
        for (int c = 0; c < cfg.hidden; ++c) {
          if (pre[c] <= 0.0) continue;
          double dz = gv[c];
          if (dz == 0.0) continue;
          for (int j = 0; j < d_in; ++j) {
            dtheta.at(j, c) += m[j] * dz;
            dm[j] += theta.at(j, c) * dz;
          }
        }
        if (cfg.kind == ModelKind::DeagnnPr) {
          for (int u = 0; u < g.n; ++u) {
            double w = in.ppr.at(u, v);
            if (w == 0.0) continue;
            for (int j = 0; j < d_in; ++j) dHin.at(u, j) += w * dm[j];
          }
        } else {
          const std::vector<int>& nbrs =
              (cfg.kind == ModelKind::DeagnnSpd) ? in.rings[v][k] : g.adj[v];
          double denom = (cfg.agg == AggKind::Gcn || cfg.kind == ModelKind::DeagnnSpd)
                             ? static_cast<double>(nbrs.size()) + 1.0
                             : 1.0;
          for (int j = 0; j < d_in; ++j) {
            double c = dm[j] / denom;
            dHin.at(v, j) += c;
          }
          for (int u : nbrs)
            for (int j = 0; j < d_in; ++j) dHin.at(u, j) += dm[j] / denom;
        }
      }
    }
    dH = std::move(dHin);
  }
}

// Full instance pass: forward, head loss, and (when `grads` is given) the
// complete gradient including head parameters.
inline Prediction run_instance(const ModelInput& in, const ModelConfig& cfg,
                               const ModelParams& params, int label, bool multiclass,
                               bool train = false, Rng* dropout_rng = nullptr,
                               ModelParams* grads = nullptr) {
  Forward f = forward(in, cfg, params, train, dropout_rng);
  Prediction pred = multiclass ? predict_multiclass(f.readout, params, label)
                               : predict_binary(f.readout, params, label);
  if (grads) {
    const Vector& z = f.readout;
    if (multiclass) {
      int C = static_cast<int>(params.class_b.size());
      for (int c = 0; c < C; ++c) {
        double dlog = pred.probs[c] - (c == label ? 1.0 : 0.0);
        grads->class_b[c] += dlog;
        for (std::size_t i = 0; i < z.size(); ++i) grads->class_w.at(static_cast<int>(i), c) += z[i] * dlog;
      }
    } else {
      for (std::size_t i = 0; i < z.size(); ++i) grads->readout_w[i] += pred.dlogit * z[i];
    }
    backward(in, cfg, params, f, pred, *grads);
  }
  return pred;
}

inline double max_norm_diff(const Vector& a, const Vector& b) {
  if (a.size() != b.size()) return std::numeric_limits<double>::infinity();
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::fabs(a[i] - b[i]));
  return d;
}

// Expressiveness probe: compares sum-pooled structural outputs of two
// prepared tuples under `trials` fresh random parameter draws (dropout
// off). True when any draw separates them beyond digital tolerance.
inline bool untrained_distinguish(const ModelInput& a, const ModelInput& b,
                                  const ModelConfig& cfg, int trials = 3, double tol = 1e-9) {
  if (a.features.cols != b.features.cols)
    throw std::invalid_argument("tuple feature dims differ");
  for (int t = 0; t < trials; ++t) {
    ModelParams params = init_params(cfg, a.features.cols, 0, cfg.seed + 1000003ULL * t);
    Forward fa = forward(a, cfg, params, false);
    Forward fb = forward(b, cfg, params, false);
    if (max_norm_diff(fa.pooled, fb.pooled) > tol) return true;
  }
  return false;
}

inline bool untrained_distinguish(const Graph& g1, const std::vector<int>& s1, const Graph& g2,
                                  const std::vector<int>& s2, const ModelConfig& cfg,
                                  int trials = 3, double tol = 1e-9) {
  ModelInput a = prepare_input(g1, s1, cfg);
  ModelInput b = prepare_input(g2, s2, cfg);
  return untrained_distinguish(a, b, cfg, trials, tol);
}

// ---- checkpoint container ------------------------------------------------
//
// Versioned text container; doubles are serialized as hex-encoded IEEE bits
// so a round trip is exact.

namespace detail {

inline std::string double_hex(double x) {
  std::uint64_t bits;
  std::memcpy(&bits, &x, 8);
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(bits));
  return std::string(buf);
}

inline double hex_double(const std::string& s) {
  std::uint64_t bits = std::stoull(s, nullptr, 16);
  double x;
  std::memcpy(&x, &bits, 8);
  return x;
}

inline void write_tensor(std::ostream& out, const std::string& name, const Matrix& m) {
  out << "tensor " << name << " " << m.rows << " " << m.cols << "\n";
  for (int i = 0; i < m.rows; ++i) {
    for (int j = 0; j < m.cols; ++j) out << (j ? " " : "") << double_hex(m.at(i, j));
    out << "\n";
  }
}

inline Matrix read_tensor(std::istream& in, int rows, int cols) {
  Matrix m(rows, cols);
  std::string tok;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) {
      if (!(in >> tok)) throw std::runtime_error("checkpoint truncated");
      m.at(i, j) = hex_double(tok);
    }
  return m;
}

}  // namespace detail

inline void save_checkpoint(std::ostream& out, const ModelConfig& cfg, const ModelParams& p) {
  out << "destruct-checkpoint v1\n";
  out << "kind " << to_string(cfg.kind) << "\n";
  out << "agg " << (cfg.agg == AggKind::Gcn ? "gcn" : "gin") << "\n";
  out << "layers " << cfg.layers << "\nhidden " << cfg.hidden << "\n";
  out << "dropout " << detail::double_hex(cfg.dropout) << "\n";
  out << "d_max " << cfg.d_max << "\nd_rw " << cfg.d_rw << "\n";
  out << "prop_depth " << cfg.prop_depth << "\n";
  out << "damping " << detail::double_hex(cfg.damping) << "\n";
  out << "ppr_tol " << detail::double_hex(cfg.ppr_tol) << "\n";
  out << "seed " << cfg.seed << "\n";
  out << "classes " << p.class_b.size() << "\n";
  for (std::size_t l = 0; l < p.theta.size(); ++l)
    for (std::size_t k = 0; k < p.theta[l].size(); ++k)
      detail::write_tensor(out, "theta_" + std::to_string(l) + "_" + std::to_string(k),
                           p.theta[l][k]);
  out << "tensor readout_w 1 " << p.readout_w.size() << "\n";
  for (std::size_t i = 0; i < p.readout_w.size(); ++i)
    out << (i ? " " : "") << detail::double_hex(p.readout_w[i]);
  out << "\n";
  if (!p.class_b.empty()) {
    detail::write_tensor(out, "class_w", p.class_w);
    out << "tensor class_b 1 " << p.class_b.size() << "\n";
    for (std::size_t i = 0; i < p.class_b.size(); ++i)
      out << (i ? " " : "") << detail::double_hex(p.class_b[i]);
    out << "\n";
  }
  out << "end\n";
}

inline std::pair<ModelConfig, ModelParams> load_checkpoint(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "destruct-checkpoint v1")
    throw std::runtime_error("not a destruct checkpoint");
  ModelConfig cfg;
  std::size_t classes = 0;
  std::string key;
  while (in >> key) {
    if (key == "kind") {
      std::string v;
      in >> v;
      cfg.kind = model_kind_from(v);
    } else if (key == "agg") {
      std::string v;
      in >> v;
      cfg.agg = (v == "gin") ? AggKind::Gin : AggKind::Gcn;
    } else if (key == "layers") in >> cfg.layers;
    else if (key == "hidden") in >> cfg.hidden;
    else if (key == "dropout") { std::string v; in >> v; cfg.dropout = detail::hex_double(v); }
    else if (key == "d_max") in >> cfg.d_max;
    else if (key == "d_rw") in >> cfg.d_rw;
    else if (key == "prop_depth") in >> cfg.prop_depth;
    else if (key == "damping") { std::string v; in >> v; cfg.damping = detail::hex_double(v); }
    else if (key == "ppr_tol") { std::string v; in >> v; cfg.ppr_tol = detail::hex_double(v); }
    else if (key == "seed") in >> cfg.seed;
    else if (key == "classes") { in >> classes; break; }
    else throw std::runtime_error("unknown checkpoint key: " + key);
  }
  ModelParams p;
  p.theta.resize(cfg.layers);
  while (in >> key) {
    if (key == "end") break;
    if (key != "tensor") throw std::runtime_error("malformed checkpoint near: " + key);
    std::string name;
    int rows, cols;
    in >> name >> rows >> cols;
    Matrix m = detail::read_tensor(in, rows, cols);
    if (name.rfind("theta_", 0) == 0) {
      auto rest = name.substr(6);
      auto us = rest.find('_');
      int l = std::stoi(rest.substr(0, us));
      int k = std::stoi(rest.substr(us + 1));
      if (l < 0 || l >= cfg.layers) throw std::runtime_error("theta layer out of range");
      if (static_cast<int>(p.theta[l].size()) <= k) p.theta[l].resize(k + 1);
      p.theta[l][k] = std::move(m);
    } else if (name == "readout_w") {
      p.readout_w.assign(m.a.begin(), m.a.end());
    } else if (name == "class_w") {
      p.class_w = std::move(m);
    } else if (name == "class_b") {
      p.class_b.assign(m.a.begin(), m.a.end());
    } else {
      throw std::runtime_error("unknown tensor: " + name);
    }
  }
  if (classes != p.class_b.size()) throw std::runtime_error("class head size mismatch");
  return {cfg, p};
}

inline void save_checkpoint(const std::string& path, const ModelConfig& cfg,
                            const ModelParams& p) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  save_checkpoint(out, cfg, p);
}

inline std::pair<ModelConfig, ModelParams> load_checkpoint(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  return load_checkpoint(in);
}

}  // namespace destruct
