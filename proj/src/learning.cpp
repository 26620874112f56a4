#include "spx/learning.hpp"

#include <algorithm>
#include <cmath>

namespace spx {

std::size_t Model::param_count(ModelKind kind, std::size_t d_in, std::size_t d_out,
                               std::size_t hidden) {
  switch (kind) {
    case ModelKind::linear_regression:
      return d_in + 1;  // scalar output
    case ModelKind::logistic_softmax:
      return d_out * d_in + d_out;
    case ModelKind::mlp_1hidden:
      return hidden * d_in + hidden + d_out * hidden + d_out;
  }
  return 0;
}

Model Model::make(ModelKind kind, std::size_t d_in, std::size_t d_out, std::size_t hidden) {
  check_arg(d_in >= 1, "model: d_in must be >= 1");
  if (kind == ModelKind::linear_regression) d_out = 1;
  check_arg(d_out >= 1, "model: d_out must be >= 1");
  if (kind == ModelKind::mlp_1hidden)
    check_arg(hidden >= 1, "model: mlp needs hidden >= 1");
  else
    hidden = 0;
  Model m;
  m.kind = kind;
  m.d_in = d_in;
  m.d_out = d_out;
  m.hidden = hidden;
  m.params.assign(param_count(kind, d_in, d_out, hidden), 0.0);
  return m;
}

ParamVector init_params(const Model& shape, Rng& rng) {
  ParamVector p(shape.params.size(), 0.0);
  auto xavier = [&](std::size_t offset, std::size_t fan_in, std::size_t fan_out) {
    const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    for (std::size_t i = 0; i < fan_in * fan_out; ++i) p[offset + i] = rng.uniform(-a, a);
    return offset + fan_in * fan_out + fan_out;  // biases stay zero
  };
  switch (shape.kind) {
    case ModelKind::linear_regression:
      xavier(0, shape.d_in, 1);
      break;
    case ModelKind::logistic_softmax:
      xavier(0, shape.d_in, shape.d_out);
      break;
    case ModelKind::mlp_1hidden: {
      const std::size_t next = xavier(0, shape.d_in, shape.hidden);
      xavier(next, shape.hidden, shape.d_out);
      break;
    }
  }
  return p;
}

namespace {

void softmax_inplace(std::vector<double>& logits) {
  const double mx = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double& v : logits) {
    v = std::exp(v - mx);
    sum += v;
  }
  for (double& v : logits) v /= sum;
}

}  // namespace

std::pair<double, ParamVector> loss_and_grad(const Model& m, const Batch& batch) {
  check_arg(batch.data != nullptr && !batch.rows.empty(), "loss_and_grad: empty batch");
  const LabeledDataset& ds = *batch.data;
  check_arg(ds.d_in == m.d_in, "loss_and_grad: feature dimension mismatch");
  check_arg(m.params.size() == Model::param_count(m.kind, m.d_in, m.d_out, m.hidden),
            "loss_and_grad: parameter vector has wrong length");

  const double inv_b = 1.0 / static_cast<double>(batch.rows.size());
  double loss = 0.0;
  ParamVector grad(m.params.size(), 0.0);

  switch (m.kind) {
    case ModelKind::linear_regression: {
      const double* w = m.params.data();
      const double b = m.params[m.d_in];
      for (uint32_t r : batch.rows) {
        auto x = ds.row(r);
        double pred = b;
        for (std::size_t k = 0; k < m.d_in; ++k) pred += w[k] * x[k];
        const double resid = pred - static_cast<double>(ds.labels[r]);
        loss += 0.5 * resid * resid;
        const double g = resid * inv_b;
        for (std::size_t k = 0; k < m.d_in; ++k) grad[k] += g * x[k];
        grad[m.d_in] += g;
      }
      break;
    }
    case ModelKind::logistic_softmax: {
      const double* w = m.params.data();
      const double* b = w + m.d_out * m.d_in;
      std::vector<double> p(m.d_out);
      for (uint32_t r : batch.rows) {
        auto x = ds.row(r);
        check_arg(ds.labels[r] < m.d_out, "loss_and_grad: label out of model range");
        for (std::size_t c = 0; c < m.d_out; ++c) {
          double z = b[c];
          const double* wc = w + c * m.d_in;
          for (std::size_t k = 0; k < m.d_in; ++k) z += wc[k] * x[k];
          p[c] = z;
        }
        softmax_inplace(p);
        loss += -std::log(std::max(p[ds.labels[r]], 1e-300));
        for (std::size_t c = 0; c < m.d_out; ++c) {
          const double g = (p[c] - (c == ds.labels[r] ? 1.0 : 0.0)) * inv_b;
          double* gw = grad.data() + c * m.d_in;
          for (std::size_t k = 0; k < m.d_in; ++k) gw[k] += g * x[k];
          grad[m.d_out * m.d_in + c] += g;
        }
      }
      break;
    }
    case ModelKind::mlp_1hidden: {
      const std::size_t h = m.hidden;
      const double* w1 = m.params.data();
      const double* b1 = w1 + h * m.d_in;
      const double* w2 = b1 + h;
      const double* b2 = w2 + m.d_out * h;
      double* gw1 = grad.data();
      double* gb1 = gw1 + h * m.d_in;
      double* gw2 = gb1 + h;
      double* gb2 = gw2 + m.d_out * h;
      std::vector<double> a(h), p(m.d_out), da(h);
      for (uint32_t r : batch.rows) {
        auto x = ds.row(r);
        check_arg(ds.labels[r] < m.d_out, "loss_and_grad: label out of model range");
        for (std::size_t j = 0; j < h; ++j) {
          double z = b1[j];
          const double* wj = w1 + j * m.d_in;
          for (std::size_t k = 0; k < m.d_in; ++k) z += wj[k] * x[k];
          a[j] = std::tanh(z);
        }
        for (std::size_t c = 0; c < m.d_out; ++c) {
          double z = b2[c];
          const double* wc = w2 + c * h;
          for (std::size_t j = 0; j < h; ++j) z += wc[j] * a[j];
          p[c] = z;
        }
        softmax_inplace(p);
        loss += -std::log(std::max(p[ds.labels[r]], 1e-300));

        std::fill(da.begin(), da.end(), 0.0);
        for (std::size_t c = 0; c < m.d_out; ++c) {
          const double g = (p[c] - (c == ds.labels[r] ? 1.0 : 0.0)) * inv_b;
          double* gwc = gw2 + c * h;
          const double* wc = w2 + c * h;
          for (std::size_t j = 0; j < h; ++j) {
            gwc[j] += g * a[j];
            da[j] += g * wc[j];
          }
          gb2[c] += g;
        }
        for (std::size_t j = 0; j < h; ++j) {
          const double dz = da[j] * (1.0 - a[j] * a[j]);
          double* gwj = gw1 + j * m.d_in;
          for (std::size_t k = 0; k < m.d_in; ++k) gwj[k] += dz * x[k];
          gb1[j] += dz;
        }
      }
      break;
    }
  }
  return {loss * inv_b, std::move(grad)};
}

void SgdConfig::validate() const {
  check_arg(gamma.initial > 0.0, "sgd: gamma must be > 0");
  for (const auto& [e, mult] : gamma.drops)
    check_arg(mult > 0.0, "sgd: lr multiplier must be > 0");
  check_arg(momentum >= 0.0 && momentum < 1.0, "sgd: momentum must be in [0,1)");
  check_arg(weight_decay >= 0.0, "sgd: weight_decay must be >= 0");
  check_arg(batch_size >= 1, "sgd: batch_size must be >= 1");
}

ParamVector sgd_step(const ParamVector& x, const ParamVector& grad, ParamVector& momentum_buf,
                     const SgdConfig& cfg, std::size_t epoch) {
  check_arg(x.size() == grad.size() && x.size() == momentum_buf.size(),
            "sgd_step: shape mismatch");
  const double gamma = cfg.gamma.at(epoch);
  ParamVector out(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double update = grad[i] + cfg.weight_decay * x[i];
    momentum_buf[i] = cfg.momentum * momentum_buf[i] + update;
    out[i] = x[i] - gamma * momentum_buf[i];
  }
  return out;
}

double evaluate(const Model& m, const LabeledDataset& test_set) {
  check_arg(test_set.size() > 0, "evaluate: empty test set");
  check_arg(test_set.d_in == m.d_in, "evaluate: feature dimension mismatch");

  if (m.kind == ModelKind::linear_regression) {
    const double* w = m.params.data();
    const double b = m.params[m.d_in];
    double se = 0.0;
    for (std::size_t i = 0; i < test_set.size(); ++i) {
      auto x = test_set.row(i);
      double pred = b;
      for (std::size_t k = 0; k < m.d_in; ++k) pred += w[k] * x[k];
      const double r = pred - static_cast<double>(test_set.labels[i]);
      se += r * r;
    }
    return se / static_cast<double>(test_set.size());
  }

  std::size_t correct = 0;
  std::vector<double> logits(m.d_out);
  for (std::size_t i = 0; i < test_set.size(); ++i) {
    auto x = test_set.row(i);
    if (m.kind == ModelKind::logistic_softmax) {
      const double* w = m.params.data();
      const double* b = w + m.d_out * m.d_in;
      for (std::size_t c = 0; c < m.d_out; ++c) {
        double z = b[c];
        const double* wc = w + c * m.d_in;
        for (std::size_t k = 0; k < m.d_in; ++k) z += wc[k] * x[k];
        logits[c] = z;
      }
    } else {
      const std::size_t h = m.hidden;
      const double* w1 = m.params.data();
      const double* b1 = w1 + h * m.d_in;
      const double* w2 = b1 + h;
      const double* b2 = w2 + m.d_out * h;
      std::vector<double> a(h);
      for (std::size_t j = 0; j < h; ++j) {
        double z = b1[j];
        const double* wj = w1 + j * m.d_in;
        for (std::size_t k = 0; k < m.d_in; ++k) z += wj[k] * x[k];
        a[j] = std::tanh(z);
      }
      for (std::size_t c = 0; c < m.d_out; ++c) {
        double z = b2[c];
        const double* wc = w2 + c * h;
        for (std::size_t j = 0; j < h; ++j) z += wc[j] * a[j];
        logits[c] = z;
      }
    }
    // argmax with ties to the lowest class id
    std::size_t best = 0;
    for (std::size_t c = 1; c < m.d_out; ++c)
      if (logits[c] > logits[best]) best = c;
    if (best == test_set.labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(test_set.size());
}

ModelKind model_kind_from_string(const std::string& s) {
  if (s == "linear_regression") return ModelKind::linear_regression;
  if (s == "logistic_softmax") return ModelKind::logistic_softmax;
  if (s == "mlp_1hidden") return ModelKind::mlp_1hidden;
  throw ValidationError("model: unknown kind '" + s + "'");
}

std::string to_string(ModelKind k) {
  switch (k) {
    case ModelKind::linear_regression:
      return "linear_regression";
    case ModelKind::logistic_softmax:
      return "logistic_softmax";
    case ModelKind::mlp_1hidden:
      return "mlp_1hidden";
  }
  return "?";
}

}  // namespace spx
