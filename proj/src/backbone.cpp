#include "brl/backbone.hpp"

#include <cmath>

#include "brl/kernels.hpp"

namespace brl {

Tensor& ParamSet::value(const std::string& name) {
  for (auto& t : values)
    if (t.name == name) return t;
  throw DomainError("ParamSet: unknown parameter " + name);
}

const Tensor& ParamSet::value(const std::string& name) const {
  for (const auto& t : values)
    if (t.name == name) return t;
  throw DomainError("ParamSet: unknown parameter " + name);
}

Tensor& ParamSet::grad(const std::string& name) {
  for (auto& t : grads)
    if (t.name == name) return t;
  throw DomainError("ParamSet: unknown parameter " + name);
}

void ParamSet::add(Tensor t) {
  Tensor g(t.name, t.shape);
  Tensor m(t.name, t.shape);
  values.push_back(std::move(t));
  grads.push_back(std::move(g));
  momentum.push_back(std::move(m));
}

void ParamSet::zero_grad() {
  for (auto& g : grads) std::fill(g.v.begin(), g.v.end(), 0.0);
}

std::size_t ParamSet::total_size() const {
  std::size_t n = 0;
  for (const auto& t : values) n += t.size();
  return n;
}

void BackboneConfig::validate() const {
  if (input_channels < 1 || joints < 1 || frames < 1 || num_classes < 1)
    throw DomainError("backbone config: bad dimensions");
  if (block_channels.empty() || block_channels.size() != temporal_strides.size())
    throw DomainError("backbone config: block widths and strides must match");
  if (temporal_kernel < 1 || temporal_kernel % 2 == 0)
    throw DomainError("backbone config: kernel size must be odd (same padding)");
  for (std::size_t s : temporal_strides)
    if (s != 1 && s != 2) throw DomainError("backbone config: stride must be 1 or 2");
}

NormalizedAdjacency build_adjacency(const SkeletonGraph& g) {
  const std::size_t v = g.num_joints;
  NormalizedAdjacency adj;
  adj.num_joints = v;
  adj.a.assign(v * v, 0.0);
  for (std::size_t i = 0; i < v; ++i) adj.a[i * v + i] = 1.0;  // A + I
  for (auto [s, t] : g.edges) {
    if (s >= v || t >= v) throw DomainError("build_adjacency: edge out of range");
    adj.a[s * v + t] = 1.0;
    adj.a[t * v + s] = 1.0;
  }
  std::vector<double> dinv(v);
  for (std::size_t i = 0; i < v; ++i) {
    double deg = 0.0;
    for (std::size_t j = 0; j < v; ++j) deg += adj.a[i * v + j];
    dinv[i] = 1.0 / std::sqrt(deg);
  }
  for (std::size_t i = 0; i < v; ++i)
    for (std::size_t j = 0; j < v; ++j) adj.a[i * v + j] *= dinv[i] * dinv[j];
  return adj;
}

namespace {

std::size_t conv_out_len(std::size_t in, std::size_t k, std::size_t stride) {
  const std::size_t pad = (k - 1) / 2;
  return (in + 2 * pad - k) / stride + 1;
}

void uniform_init(Tensor& t, double bound, Rng& rng) {
  std::uniform_real_distribution<double> d(-bound, bound);
  for (double& x : t.v) x = d(rng);
}

}  // namespace

Backbone::Backbone(BackboneConfig cfg, const SkeletonGraph& graph)
    : cfg_(std::move(cfg)), adj_(build_adjacency(graph)) {
  cfg_.validate();
  if (graph.num_joints != cfg_.joints)
    throw ShapeError("backbone: graph joints do not match config");

  Rng rng = make_rng(cfg_.init_seed);
  std::size_t cin = cfg_.input_channels;
  for (std::size_t b = 0; b < cfg_.block_channels.size(); ++b) {
    const std::size_t cout = cfg_.block_channels[b];
    const std::string p = "block" + std::to_string(b) + ".";
    Tensor sw(p + "spatial_w", {cin, cout});
    // He-style bounds for the ReLU layers keep activation variance from
    // collapsing through the blocks; the head uses a unit-variance bound.
    uniform_init(sw, std::sqrt(6.0 / static_cast<double>(cin)), rng);
    params_.add(std::move(sw));
    Tensor ascale(p + "affine_scale", {cout});
    std::fill(ascale.v.begin(), ascale.v.end(), 1.0);
    params_.add(std::move(ascale));
    params_.add(Tensor(p + "affine_bias", {cout}));
    Tensor tw(p + "temporal_w", {cfg_.temporal_kernel, cout, cout});
    uniform_init(
        tw, std::sqrt(6.0 / static_cast<double>(cout * cfg_.temporal_kernel)),
        rng);
    params_.add(std::move(tw));
    params_.add(Tensor(p + "temporal_b", {cout}));
    cin = cout;
  }
  Tensor fw("fc.w", {cfg_.num_classes, cin});
  uniform_init(fw, std::sqrt(3.0 / static_cast<double>(cin)), rng);
  params_.add(std::move(fw));
  params_.add(Tensor("fc.b", {cfg_.num_classes}));
}

std::size_t Backbone::block_out_frames(std::size_t block) const {
  std::size_t len = cfg_.frames;
  for (std::size_t b = 0; b <= block; ++b)
    len = conv_out_len(len, cfg_.temporal_kernel, cfg_.temporal_strides[b]);
  return len;
}

std::vector<double> Backbone::forward(const SkeletonSequence& seq,
                                      ForwardCache& cache) const {
  if (seq.frames != cfg_.frames || seq.joints != cfg_.joints ||
      seq.channels != cfg_.input_channels)
    throw ShapeError("backbone forward: sequence shape does not match config");
  const auto& k = kern::active();
  const std::size_t V = cfg_.joints;
  const std::size_t K = cfg_.temporal_kernel;
  const std::size_t pad = (K - 1) / 2;
  const std::size_t nblocks = cfg_.block_channels.size();

  cache.persons.clear();
  cache.person_ids.clear();
  for (std::size_t m = 0; m < seq.persons; ++m)
    if (seq.person_mask[m]) cache.person_ids.push_back(m);
  if (cache.person_ids.empty())
    throw DomainError("backbone forward: no present persons in mask");

  const std::size_t feat = cfg_.block_channels.back();
  cache.mean_feature.assign(feat, 0.0);

  for (std::size_t m : cache.person_ids) {
    ForwardCache::PersonCache pc;
    pc.input.assign(seq.joint_ptr(m, 0, 0),
                    seq.joint_ptr(m, 0, 0) + seq.frames * V * seq.channels);
    pc.block_in.resize(nblocks);
    pc.spatial.resize(nblocks);
    pc.affine.resize(nblocks);
    pc.temporal.resize(nblocks);

    std::vector<double> x = pc.input;
    std::size_t lin = cfg_.frames;
    std::size_t cin = cfg_.input_channels;
    for (std::size_t b = 0; b < nblocks; ++b) {
      const std::size_t cout = cfg_.block_channels[b];
      const std::size_t stride = cfg_.temporal_strides[b];
      const std::size_t lout = conv_out_len(lin, K, stride);
      const std::string p = "block" + std::to_string(b) + ".";
      const auto& sw = params_.value(p + "spatial_w").v;
      const auto& ascale = params_.value(p + "affine_scale").v;
      const auto& abias = params_.value(p + "affine_bias").v;
      const auto& tw = params_.value(p + "temporal_w").v;
      const auto& tb = params_.value(p + "temporal_b").v;

      pc.block_in[b] = x;
      // spatial: S[t] = A_hat * (X[t] * W)
      std::vector<double> proj(V * cout);
      std::vector<double> s(lin * V * cout);
      for (std::size_t t = 0; t < lin; ++t) {
        k.gemm(V, cout, cin, x.data() + t * V * cin, cin, sw.data(), cout,
               proj.data(), cout, false);
        k.gemm(V, cout, V, adj_.a.data(), V, proj.data(), cout,
               s.data() + t * V * cout, cout, false);
      }
      pc.spatial[b] = s;
      // per-channel affine, then ReLU
      std::vector<double> u(s.size());
      for (std::size_t i = 0; i < s.size(); ++i) {
        const std::size_t c = i % cout;
        u[i] = s[i] * ascale[c] + abias[c];
      }
      pc.affine[b] = u;
      std::vector<double> r(u.size());
      k.relu(u.size(), u.data(), r.data());
      // temporal conv along frames, zero padding
      std::vector<double> tpre(lout * V * cout);
      for (std::size_t to = 0; to < lout; ++to) {
        double* out = tpre.data() + to * V * cout;
        for (std::size_t v = 0; v < V; ++v)
          for (std::size_t c = 0; c < cout; ++c) out[v * cout + c] = tb[c];
        for (std::size_t kk = 0; kk < K; ++kk) {
          const std::ptrdiff_t ti =
              static_cast<std::ptrdiff_t>(to * stride + kk) -
              static_cast<std::ptrdiff_t>(pad);
          if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(lin)) continue;
          k.gemm(V, cout, cout, r.data() + ti * V * cout, cout,
                 tw.data() + kk * cout * cout, cout, out, cout, true);
        }
      }
      pc.temporal[b] = tpre;
      x.resize(tpre.size());
      k.relu(tpre.size(), tpre.data(), x.data());
      lin = lout;
      cin = cout;
    }
    // global average pooling over frames and joints
    pc.pooled.assign(feat, 0.0);
    const double inv = 1.0 / static_cast<double>(lin * V);
    for (std::size_t t = 0; t < lin; ++t)
      for (std::size_t v = 0; v < V; ++v)
        for (std::size_t c = 0; c < feat; ++c)
          pc.pooled[c] += x[(t * V + v) * feat + c] * inv;
    for (std::size_t c = 0; c < feat; ++c)
      cache.mean_feature[c] += pc.pooled[c];
    cache.persons.push_back(std::move(pc));
  }
  const double pinv = 1.0 / static_cast<double>(cache.person_ids.size());
  for (double& f : cache.mean_feature) f *= pinv;

  const auto& fw = params_.value("fc.w").v;
  const auto& fb = params_.value("fc.b").v;
  std::vector<double> logits(cfg_.num_classes);
  for (std::size_t j = 0; j < cfg_.num_classes; ++j) {
    double z = fb[j];
    for (std::size_t c = 0; c < feat; ++c)
      z += fw[j * feat + c] * cache.mean_feature[c];
    logits[j] = z;
  }
  cache.valid = true;
  return logits;
}

void Backbone::backward(const SkeletonSequence& seq, const ForwardCache& cache,
                        const std::vector<double>& dlogits) {
  if (!cache.valid) throw DomainError("backbone backward: stale forward cache");
  if (dlogits.size() != cfg_.num_classes)
    throw ShapeError("backbone backward: bad upstream gradient size");
  (void)seq;
  const auto& k = kern::active();
  const std::size_t V = cfg_.joints;
  const std::size_t K = cfg_.temporal_kernel;
  const std::size_t pad = (K - 1) / 2;
  const std::size_t nblocks = cfg_.block_channels.size();
  const std::size_t feat = cfg_.block_channels.back();

  const auto& fw = params_.value("fc.w").v;
  auto& dfw = params_.grad("fc.w").v;
  auto& dfb = params_.grad("fc.b").v;
  std::vector<double> dfeat(feat, 0.0);
  for (std::size_t j = 0; j < cfg_.num_classes; ++j) {
    dfb[j] += dlogits[j];
    for (std::size_t c = 0; c < feat; ++c) {
      dfw[j * feat + c] += dlogits[j] * cache.mean_feature[c];
      dfeat[c] += fw[j * feat + c] * dlogits[j];
    }
  }
  const double pinv = 1.0 / static_cast<double>(cache.persons.size());

  // frame counts entering each block
  std::vector<std::size_t> lin_of(nblocks);
  {
    std::size_t len = cfg_.frames;
    for (std::size_t b = 0; b < nblocks; ++b) {
      lin_of[b] = len;
      len = conv_out_len(len, K, cfg_.temporal_strides[b]);
    }
  }

  for (const auto& pc : cache.persons) {
    const std::size_t l_last =
        conv_out_len(lin_of[nblocks - 1], K, cfg_.temporal_strides[nblocks - 1]);
    // GAP backward: gradient spread uniformly over frames and joints
    std::vector<double> dz(l_last * V * feat);
    const double inv = pinv / static_cast<double>(l_last * V);
    for (std::size_t i = 0; i < dz.size(); ++i)
      dz[i] = dfeat[i % feat] * inv;

    for (std::size_t b = nblocks; b-- > 0;) {
      const std::size_t cout = cfg_.block_channels[b];
      const std::size_t cin = b == 0 ? cfg_.input_channels : cfg_.block_channels[b - 1];
      const std::size_t stride = cfg_.temporal_strides[b];
      const std::size_t lin = lin_of[b];
      const std::size_t lout = conv_out_len(lin, K, stride);
      const std::string p = "block" + std::to_string(b) + ".";
      const auto& sw = params_.value(p + "spatial_w").v;
      const auto& ascale = params_.value(p + "affine_scale").v;
      const auto& tw = params_.value(p + "temporal_w").v;
      auto& dsw = params_.grad(p + "spatial_w").v;
      auto& dascale = params_.grad(p + "affine_scale").v;
      auto& dabias = params_.grad(p + "affine_bias").v;
      auto& dtw = params_.grad(p + "temporal_w").v;
      auto& dtb = params_.grad(p + "temporal_b").v;

      const auto& tpre = pc.temporal[b];
      const auto& u = pc.affine[b];
      const auto& s = pc.spatial[b];
      const auto& x = pc.block_in[b];

      // second ReLU
      k.relu_backward(dz.size(), tpre.data(), dz.data());
      for (std::size_t i = 0; i < dz.size(); ++i) dtb[i % cout] += dz[i];

      // recompute R = relu(U)
      std::vector<double> r(u.size());
      k.relu(u.size(), u.data(), r.data());
      // transposed temporal weights for the input gradient
      std::vector<double> twt(K * cout * cout);
      for (std::size_t kk = 0; kk < K; ++kk)
        for (std::size_t ci = 0; ci < cout; ++ci)
          for (std::size_t co = 0; co < cout; ++co)
            twt[(kk * cout + co) * cout + ci] = tw[(kk * cout + ci) * cout + co];

      std::vector<double> dr(lin * V * cout, 0.0);
      for (std::size_t to = 0; to < lout; ++to) {
        const double* dout = dz.data() + to * V * cout;
        for (std::size_t kk = 0; kk < K; ++kk) {
          const std::ptrdiff_t ti =
              static_cast<std::ptrdiff_t>(to * stride + kk) -
              static_cast<std::ptrdiff_t>(pad);
          if (ti < 0 || ti >= static_cast<std::ptrdiff_t>(lin)) continue;
          k.gemm_tn(cout, cout, V, r.data() + ti * V * cout, cout, dout, cout,
                    dtw.data() + kk * cout * cout, cout, true);
          k.gemm(V, cout, cout, dout, cout, twt.data() + kk * cout * cout, cout,
                 dr.data() + ti * V * cout, cout, true);
        }
      }

      // first ReLU, then the affine
      k.relu_backward(dr.size(), u.data(), dr.data());
      for (std::size_t i = 0; i < dr.size(); ++i) {
        const std::size_t c = i % cout;
        dascale[c] += s[i] * dr[i];
        dabias[c] += dr[i];
        dr[i] *= ascale[c];
      }

      // spatial backward: dP[t] = A_hat^T dS[t] (A_hat symmetric)
      std::vector<double> dproj(V * cout);
      std::vector<double> dx;
      const bool need_dx = b > 0;
      if (need_dx) dx.assign(lin * V * cin, 0.0);
      std::vector<double> swt(cout * cin);
      for (std::size_t ci = 0; ci < cin; ++ci)
        for (std::size_t co = 0; co < cout; ++co)
          swt[co * cin + ci] = sw[ci * cout + co];
      for (std::size_t t = 0; t < lin; ++t) {
        k.gemm(V, cout, V, adj_.a.data(), V, dr.data() + t * V * cout, cout,
               dproj.data(), cout, false);
        k.gemm_tn(cin, cout, V, x.data() + t * V * cin, cin, dproj.data(), cout,
                  dsw.data(), cout, true);
        if (need_dx)
          k.gemm(V, cin, cout, dproj.data(), cout, swt.data(), cin,
                 dx.data() + t * V * cin, cin, false);
      }
      dz = std::move(dx);
    }
  }
}

void Backbone::sgd_step(double lr, double momentum, double weight_decay,
                        bool nesterov) {
  for (std::size_t i = 0; i < params_.values.size(); ++i) {
    auto& p = params_.values[i].v;
    auto& g = params_.grads[i].v;
    auto& buf = params_.momentum[i].v;
    for (std::size_t j = 0; j < p.size(); ++j) {
      double d = g[j] + weight_decay * p[j];
      buf[j] = momentum * buf[j] + d;
      if (nesterov) d += momentum * buf[j];
      else d = buf[j];
      p[j] -= lr * d;
      g[j] = 0.0;
    }
  }
}

double cosine_lr(std::size_t epoch, std::size_t total_epochs, double base_lr) {
  if (total_epochs == 0 || epoch >= total_epochs)
    throw DomainError("cosine_lr: epoch out of range");
  return 0.5 * base_lr *
         (1.0 + std::cos(M_PI * static_cast<double>(epoch) /
                         static_cast<double>(total_epochs)));
}

}  // namespace brl
