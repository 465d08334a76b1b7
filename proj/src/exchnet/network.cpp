#include "popinfer/exchnet/network.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

namespace popinfer::exchnet {

namespace {

using Shape = std::vector<std::size_t>;

std::vector<Tensor> parameter_shapes(const Architecture& a) {
  const auto patch = static_cast<std::size_t>(a.patch);
  const auto c = static_cast<std::size_t>(a.input_channels);
  const auto f1 = static_cast<std::size_t>(a.conv1_filters);
  const auto f2 = static_cast<std::size_t>(a.conv2_filters);
  const auto flat = static_cast<std::size_t>(a.flat_features());
  const auto u1 = static_cast<std::size_t>(a.fc1_units);
  const auto u2 = static_cast<std::size_t>(a.fc2_units);
  const auto out = static_cast<std::size_t>(a.output_size());
  // Weights are laid out input-major so the inner loops run over outputs.
  return {Tensor{Shape{patch, c, f1}}, Tensor{Shape{f1}},  Tensor{Shape{patch, f1, f2}}, Tensor{Shape{f2}},
          Tensor{Shape{flat, u1}},     Tensor{Shape{u1}},  Tensor{Shape{u1, u2}},        Tensor{Shape{u2}},
          Tensor{Shape{u2, out}},      Tensor{Shape{out}}};
}

// Same-padded 1-D convolution along the SNP axis of every row:
// out[r, j, :] = bias + sum_t sum_c in[r, j + t - pad, c] * w[t, c, :].
void conv_forward(const double* in, int rows, int d, int cin, const double* w, const double* bias, int patch,
                  int cout, double* out) {
  const int pad = (patch - 1) / 2;
  for (int r = 0; r < rows; ++r) {
    const double* row_in = in + static_cast<std::size_t>(r) * d * cin;
    double* row_out = out + static_cast<std::size_t>(r) * d * cout;
    for (int j = 0; j < d; ++j) {
      double* o = row_out + static_cast<std::size_t>(j) * cout;
      std::copy(bias, bias + cout, o);
      for (int t = 0; t < patch; ++t) {
        const int src = j + t - pad;
        if (src < 0 || src >= d) continue;
        const double* x = row_in + static_cast<std::size_t>(src) * cin;
        const double* wt = w + static_cast<std::size_t>(t) * cin * cout;
        for (int c = 0; c < cin; ++c) {
          const double xv = x[c];
          if (xv == 0.0) continue;
          const double* wc = wt + static_cast<std::size_t>(c) * cout;
          for (int f = 0; f < cout; ++f) o[f] += xv * wc[f];
        }
      }
    }
  }
}

// Given d loss / d conv output (pre-activation), accumulates weight and bias
// gradients and, when din is non-null, adds the input gradient.
void conv_backward(const double* in, int rows, int d, int cin, const double* w, int patch, int cout,
                   const double* dout, double* dw, double* dbias, double* din) {
  const int pad = (patch - 1) / 2;
  for (int r = 0; r < rows; ++r) {
    const double* row_in = in + static_cast<std::size_t>(r) * d * cin;
    const double* row_dout = dout + static_cast<std::size_t>(r) * d * cout;
    double* row_din = din ? din + static_cast<std::size_t>(r) * d * cin : nullptr;
    for (int j = 0; j < d; ++j) {
      const double* g = row_dout + static_cast<std::size_t>(j) * cout;
      bool any = false;
      for (int f = 0; f < cout; ++f) {
        dbias[f] += g[f];
        any = any || g[f] != 0.0;
      }
      if (!any) continue;
      for (int t = 0; t < patch; ++t) {
        const int src = j + t - pad;
        if (src < 0 || src >= d) continue;
        const double* x = row_in + static_cast<std::size_t>(src) * cin;
        double* dx = row_din ? row_din + static_cast<std::size_t>(src) * cin : nullptr;
        const double* wt = w + static_cast<std::size_t>(t) * cin * cout;
        double* dwt = dw + static_cast<std::size_t>(t) * cin * cout;
        for (int c = 0; c < cin; ++c) {
          const double xv = x[c];
          double* dwc = dwt + static_cast<std::size_t>(c) * cout;
          if (xv != 0.0)
            for (int f = 0; f < cout; ++f) dwc[f] += xv * g[f];
          if (dx) {
            const double* wc = wt + static_cast<std::size_t>(c) * cout;
            double acc = 0.0;
            for (int f = 0; f < cout; ++f) acc += wc[f] * g[f];
            dx[c] += acc;
          }
        }
      }
    }
  }
}

// out[b, :] = bias + x[b, :] W for W of shape in x out.
void dense_forward(const double* x, int batch, int in, const double* w, const double* bias, int out, double* y) {
  for (int b = 0; b < batch; ++b) {
    double* yb = y + static_cast<std::size_t>(b) * out;
    std::copy(bias, bias + out, yb);
    const double* xb = x + static_cast<std::size_t>(b) * in;
    for (int k = 0; k < in; ++k) {
      const double xv = xb[k];
      if (xv == 0.0) continue;
      const double* wk = w + static_cast<std::size_t>(k) * out;
      for (int u = 0; u < out; ++u) yb[u] += xv * wk[u];
    }
  }
}

void dense_backward(const double* x, int batch, int in, const double* w, int out, const double* dy, double* dw,
                    double* dbias, double* dx) {
  for (int b = 0; b < batch; ++b) {
    const double* g = dy + static_cast<std::size_t>(b) * out;
    const double* xb = x + static_cast<std::size_t>(b) * in;
    double* dxb = dx + static_cast<std::size_t>(b) * in;
    for (int u = 0; u < out; ++u) dbias[u] += g[u];
    for (int k = 0; k < in; ++k) {
      const double* wk = w + static_cast<std::size_t>(k) * out;
      double* dwk = dw + static_cast<std::size_t>(k) * out;
      const double xv = xb[k];
      double acc = 0.0;
      for (int u = 0; u < out; ++u) {
        dwk[u] += xv * g[u];
        acc += wk[u] * g[u];
      }
      dxb[k] = acc;
    }
  }
}

void relu(std::vector<double>& v) {
  for (auto& x : v) x = x > 0.0 ? x : 0.0;
}

// Inverted dropout: returns the per-unit scale (0 or 1/(1-p)) and applies it.
std::vector<double> apply_dropout(std::vector<double>& v, double p, Rng& rng) {
  std::vector<double> mask(v.size());
  std::bernoulli_distribution keep(1.0 - p);
  const double scale = 1.0 / (1.0 - p);
  for (std::size_t i = 0; i < v.size(); ++i) {
    mask[i] = keep(rng) ? scale : 0.0;
    v[i] *= mask[i];
  }
  return mask;
}

// Selects, for each of f columns of an n-row block with row stride `stride`,
// the m largest entries (ties to the lower row) and writes their mean. The
// selection is summed in sorted order so the result does not depend on row
// order.
void pool_block(const double* block, int n, std::size_t stride, int f, int m, double* pooled,
                std::int32_t* selected) {
  std::vector<std::int32_t> idx(static_cast<std::size_t>(n));
  for (int c = 0; c < f; ++c) {
    std::iota(idx.begin(), idx.end(), 0);
    auto greater = [&](std::int32_t a, std::int32_t b) {
      const double va = block[a * stride + c];
      const double vb = block[b * stride + c];
      return va > vb || (va == vb && a < b);
    };
    if (m < n)
      std::partial_sort(idx.begin(), idx.begin() + m, idx.end(), greater);
    else
      std::sort(idx.begin(), idx.end(), greater);
    double sum = 0.0;
    for (int k = 0; k < m; ++k) {
      sum += block[idx[k] * stride + c];
      selected[static_cast<std::size_t>(c) * m + k] = idx[k];
    }
    pooled[c] = sum / m;
  }
}

int pool_size(Pooling p, int n) {
  switch (p) {
    case Pooling::TopDecileMean: return decile_size(n);
    case Pooling::Mean: return n;
    case Pooling::Max: return 1;
  }
  return 1;
}

}  // namespace

ExchNet::ExchNet(Architecture arch) : arch_{std::move(arch)} {
  arch_.validate();
  params_ = parameter_shapes(arch_);
}

ExchNet ExchNet::initialized(const Architecture& arch, std::uint64_t seed) {
  ExchNet net{arch};
  Rng rng{seed};
  auto& p = net.params_;
  for (std::size_t i = kConv1W; i < kNumParams; i += 2) {
    const auto& shape = p[i].shape;
    std::size_t fan_in = 1;
    for (std::size_t k = 0; k + 1 < shape.size(); ++k) fan_in *= shape[k];
    std::uniform_real_distribution<double> u(-std::sqrt(6.0 / fan_in), std::sqrt(6.0 / fan_in));
    for (auto& w : p[i].values) w = u(rng);
  }
  const double lo = arch.target_low;
  const double hi = arch.target_high;
  if (hi > lo) {
    auto& bias = p[kHeadB].values;
    if (arch.head == HeadKind::Gaussian) {
      const double sd = (hi - lo) / 2.0;
      bias[0] = (lo + hi) / 2.0;
      bias[1] = inverse_softplus(1.0 / (sd * sd));
    } else if (arch.head == HeadKind::Mixture) {
      const int k = arch.mixture_components;
      const double spacing = (hi - lo) / k;
      for (int j = 0; j < k; ++j) {
        bias[k + j] = lo + spacing * (j + 0.5);
        bias[2 * k + j] = inverse_softplus(1.0 / (spacing * spacing));
      }
    }
  }
  return net;
}

ForwardResult ExchNet::forward(const BatchView& batch, Rng* dropout_rng) const {
  const auto& a = arch_;
  if (batch.size < 1 || batch.rows < 1) throw ShapeMismatch("empty batch");
  if (batch.positions != a.positions || batch.channels != a.input_channels)
    throw ShapeMismatch("batch windows are " + std::to_string(batch.rows) + "x" + std::to_string(batch.positions) +
                        "x" + std::to_string(batch.channels) + ", network expects d=" +
                        std::to_string(a.positions) + " with " + std::to_string(a.input_channels) + " channels");
  const std::size_t per_window = static_cast<std::size_t>(batch.rows) * batch.positions * batch.channels;
  if (batch.data.size() != per_window * batch.size) throw ShapeMismatch("batch buffer has the wrong length");

  const int bsz = batch.size;
  const int n = batch.rows;
  const int d = a.positions;
  const int f1 = a.conv1_filters;
  const int f2 = a.conv2_filters;
  const int total_rows = bsz * n;
  const int m = pool_size(a.pooling, n);
  const int flat = a.flat_features();

  ForwardResult res;
  auto& c = res.cache;
  c.params_version = version_;
  c.batch = bsz;
  c.rows = n;
  c.pool_m = m;
  c.input.assign(batch.data.begin(), batch.data.end());

  c.conv1.resize(static_cast<std::size_t>(total_rows) * d * f1);
  conv_forward(c.input.data(), total_rows, d, a.input_channels, params_[kConv1W].data(), params_[kConv1B].data(),
               a.patch, f1, c.conv1.data());
  relu(c.conv1);
  c.conv2.resize(static_cast<std::size_t>(total_rows) * d * f2);
  conv_forward(c.conv1.data(), total_rows, d, f1, params_[kConv2W].data(), params_[kConv2B].data(), a.patch, f2,
               c.conv2.data());
  relu(c.conv2);

  c.pooled.resize(static_cast<std::size_t>(bsz) * flat);
  c.pool_rows.resize(static_cast<std::size_t>(bsz) * flat * m);
  const std::size_t row_stride = static_cast<std::size_t>(d) * f2;
  for (int b = 0; b < bsz; ++b)
    for (int j = 0; j < d; ++j) {
      const std::size_t cell = static_cast<std::size_t>(b) * flat + static_cast<std::size_t>(j) * f2;
      pool_block(c.conv2.data() + static_cast<std::size_t>(b) * n * row_stride + static_cast<std::size_t>(j) * f2,
                 n, row_stride, f2, m, c.pooled.data() + cell, c.pool_rows.data() + cell * m);
    }

  const bool drop = dropout_rng && a.dropout > 0.0;
  c.fc1.resize(static_cast<std::size_t>(bsz) * a.fc1_units);
  dense_forward(c.pooled.data(), bsz, flat, params_[kFc1W].data(), params_[kFc1B].data(), a.fc1_units, c.fc1.data());
  relu(c.fc1);
  if (drop) c.fc1_mask = apply_dropout(c.fc1, a.dropout, *dropout_rng);
  c.fc2.resize(static_cast<std::size_t>(bsz) * a.fc2_units);
  dense_forward(c.fc1.data(), bsz, a.fc1_units, params_[kFc2W].data(), params_[kFc2B].data(), a.fc2_units,
                c.fc2.data());
  relu(c.fc2);
  if (drop) c.fc2_mask = apply_dropout(c.fc2, a.dropout, *dropout_rng);

  const int out = a.output_size();
  c.head.resize(static_cast<std::size_t>(bsz) * out);
  dense_forward(c.fc2.data(), bsz, a.fc2_units, params_[kHeadW].data(), params_[kHeadB].data(), out, c.head.data());
  for (double v : c.head)
    if (!std::isfinite(v)) throw NonFiniteActivation{};

  res.posteriors.reserve(static_cast<std::size_t>(bsz));
  for (int b = 0; b < bsz; ++b)
    res.posteriors.push_back(
        make_posterior(a, std::span<const double>{c.head}.subspan(static_cast<std::size_t>(b) * out, out)));
  return res;
}

std::vector<Tensor> ExchNet::backward(const ForwardCache& c, std::span<const double> head_grads) const {
  if (c.params_version != version_) throw StaleCache{};
  const auto& a = arch_;
  const int bsz = c.batch;
  const int n = c.rows;
  const int d = a.positions;
  const int f1 = a.conv1_filters;
  const int f2 = a.conv2_filters;
  const int flat = a.flat_features();
  const int out = a.output_size();
  const int m = c.pool_m;
  if (head_grads.size() != static_cast<std::size_t>(bsz) * out) throw ShapeMismatch("head gradient size mismatch");

  auto grads = zeros_like(params_);

  std::vector<double> d_fc2(static_cast<std::size_t>(bsz) * a.fc2_units);
  dense_backward(c.fc2.data(), bsz, a.fc2_units, params_[kHeadW].data(), out, head_grads.data(),
                 grads[kHeadW].data(), grads[kHeadB].data(), d_fc2.data());
  for (std::size_t i = 0; i < d_fc2.size(); ++i)
    d_fc2[i] = c.fc2[i] > 0.0 ? d_fc2[i] * (c.fc2_mask.empty() ? 1.0 : c.fc2_mask[i]) : 0.0;

  std::vector<double> d_fc1(static_cast<std::size_t>(bsz) * a.fc1_units);
  dense_backward(c.fc1.data(), bsz, a.fc1_units, params_[kFc2W].data(), a.fc2_units, d_fc2.data(),
                 grads[kFc2W].data(), grads[kFc2B].data(), d_fc1.data());
  for (std::size_t i = 0; i < d_fc1.size(); ++i)
    d_fc1[i] = c.fc1[i] > 0.0 ? d_fc1[i] * (c.fc1_mask.empty() ? 1.0 : c.fc1_mask[i]) : 0.0;

  std::vector<double> d_pooled(static_cast<std::size_t>(bsz) * flat);
  dense_backward(c.pooled.data(), bsz, flat, params_[kFc1W].data(), a.fc1_units, d_fc1.data(), grads[kFc1W].data(),
                 grads[kFc1B].data(), d_pooled.data());

  // Route pooled gradients back to the selected rows, through the ReLU.
  std::vector<double> d_conv2(c.conv2.size(), 0.0);
  const std::size_t row_stride = static_cast<std::size_t>(d) * f2;
  for (int b = 0; b < bsz; ++b)
    for (int j = 0; j < d; ++j)
      for (int f = 0; f < f2; ++f) {
        const std::size_t cell = static_cast<std::size_t>(b) * flat + static_cast<std::size_t>(j) * f2 + f;
        const double g = d_pooled[cell] / m;
        for (int k = 0; k < m; ++k) {
          const std::size_t at = (static_cast<std::size_t>(b) * n + c.pool_rows[cell * m + k]) * row_stride +
                                 static_cast<std::size_t>(j) * f2 + f;
          if (c.conv2[at] > 0.0) d_conv2[at] += g;
        }
      }

  const int total_rows = bsz * n;
  std::vector<double> d_conv1(c.conv1.size(), 0.0);
  conv_backward(c.conv1.data(), total_rows, d, f1, params_[kConv2W].data(), a.patch, f2, d_conv2.data(),
                grads[kConv2W].data(), grads[kConv2B].data(), d_conv1.data());
  for (std::size_t i = 0; i < d_conv1.size(); ++i)
    if (!(c.conv1[i] > 0.0)) d_conv1[i] = 0.0;
  conv_backward(c.input.data(), total_rows, d, a.input_channels, params_[kConv1W].data(), a.patch, f1,
                d_conv1.data(), grads[kConv1W].data(), grads[kConv1B].data(), nullptr);
  return grads;
}

void ExchNet::apply_gradients(const std::vector<Tensor>& grads, const AdamConfig& cfg) {
  adam_step(params_, grads, adam_, cfg);
  ++version_;
}

std::vector<double> top_decile_mean_pool(std::span<const double> features, int n, int f) {
  if (features.size() != static_cast<std::size_t>(n) * f) throw ShapeMismatch("feature matrix is not n x f");
  const int m = decile_size(n);
  std::vector<double> pooled(static_cast<std::size_t>(f));
  std::vector<std::int32_t> selected(static_cast<std::size_t>(f) * m);
  pool_block(features.data(), n, static_cast<std::size_t>(f), f, m, pooled.data(), selected.data());
  return pooled;
}

bool same_activation_pattern(const ForwardCache& a, const ForwardCache& b) {
  auto same_sign = [](const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) return false;
    for (std::size_t i = 0; i < x.size(); ++i)
      if ((x[i] > 0.0) != (y[i] > 0.0)) return false;
    return true;
  };
  return a.pool_rows == b.pool_rows && same_sign(a.conv1, b.conv1) && same_sign(a.conv2, b.conv2) &&
         same_sign(a.fc1, b.fc1) && same_sign(a.fc2, b.fc2);
}

}  // namespace popinfer::exchnet
