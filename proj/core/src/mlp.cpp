#include "qas/mlp.hpp"

#include <cmath>
#include <istream>
#include <ostream>
#include <stdexcept>

namespace qas {

namespace {

void write_matrix(std::ostream& out, const Eigen::MatrixXd& m) {
  const std::int64_t rows = m.rows(), cols = m.cols();
  out.write(reinterpret_cast<const char*>(&rows), sizeof rows);
  out.write(reinterpret_cast<const char*>(&cols), sizeof cols);
  out.write(reinterpret_cast<const char*>(m.data()),
            static_cast<std::streamsize>(sizeof(double) * m.size()));
}

Eigen::MatrixXd read_matrix(std::istream& in) {
  std::int64_t rows = 0, cols = 0;
  in.read(reinterpret_cast<char*>(&rows), sizeof rows);
  in.read(reinterpret_cast<char*>(&cols), sizeof cols);
  if (!in || rows < 0 || cols < 0) throw std::runtime_error("corrupt matrix header");
  Eigen::MatrixXd m(rows, cols);
  in.read(reinterpret_cast<char*>(m.data()),
          static_cast<std::streamsize>(sizeof(double) * m.size()));
  if (!in) throw std::runtime_error("corrupt matrix payload");
  return m;
}

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes, double dropout_p, double leaky_slope)
    : sizes_(std::move(layer_sizes)), dropout_p_(dropout_p), leaky_slope_(leaky_slope) {
  if (sizes_.size() < 2) throw std::invalid_argument("Mlp needs input and output layers");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("layer size must be positive");
  }
  if (dropout_p_ < 0.0 || dropout_p_ >= 1.0) {
    throw std::invalid_argument("dropout probability must be in [0, 1)");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    w_.emplace_back(Eigen::MatrixXd::Zero(sizes_[l + 1], sizes_[l]));
    b_.emplace_back(Eigen::VectorXd::Zero(sizes_[l + 1]));
  }
}

Mlp Mlp::random_init(std::vector<int> layer_sizes, double dropout_p, std::mt19937_64& rng,
                     double leaky_slope) {
  Mlp net(std::move(layer_sizes), dropout_p, leaky_slope);
  for (std::size_t l = 0; l < net.w_.size(); ++l) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(net.sizes_[l]));
    std::uniform_real_distribution<double> dist(-bound, bound);
    for (Eigen::Index j = 0; j < net.w_[l].size(); ++j) net.w_[l].data()[j] = dist(rng);
    for (Eigen::Index j = 0; j < net.b_[l].size(); ++j) net.b_[l](j) = dist(rng);
  }
  return net;
}

std::size_t Mlp::parameter_count() const {
  std::size_t n = 0;
  for (std::size_t l = 0; l < w_.size(); ++l) {
    n += static_cast<std::size_t>(w_[l].size()) + static_cast<std::size_t>(b_[l].size());
  }
  return n;
}

Eigen::MatrixXd Mlp::forward(const Eigen::MatrixXd& input, bool train_mode, std::mt19937_64* rng,
                             Cache* cache) const {
  if (input.rows() != sizes_.front()) throw std::invalid_argument("Mlp input size mismatch");
  if (train_mode && dropout_p_ > 0.0 && rng == nullptr) {
    throw std::invalid_argument("train-mode forward with dropout needs an rng");
  }
  const std::size_t layers = w_.size();
  Eigen::MatrixXd a = input;
  if (cache) {
    cache->activations.clear();
    cache->pre.clear();
    cache->dropout.clear();
    cache->activations.push_back(a);
  }
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (std::size_t l = 0; l < layers; ++l) {
    Eigen::MatrixXd z = (w_[l] * a).colwise() + b_[l];
    if (cache) cache->pre.push_back(z);
    if (l + 1 < layers) {
      a = z.unaryExpr([this](double v) { return v >= 0.0 ? v : leaky_slope_ * v; });
      if (train_mode && dropout_p_ > 0.0) {
        Eigen::MatrixXd mask(a.rows(), a.cols());
        const double keep = 1.0 - dropout_p_;
        for (Eigen::Index c = 0; c < mask.cols(); ++c) {
          for (Eigen::Index r = 0; r < mask.rows(); ++r) {
            mask(r, c) = unit(*rng) < keep ? 1.0 / keep : 0.0;
          }
        }
        a = a.cwiseProduct(mask);
        if (cache) cache->dropout.push_back(std::move(mask));
      } else if (cache) {
        cache->dropout.push_back(Eigen::MatrixXd::Ones(a.rows(), a.cols()));
      }
    } else {
      a = std::move(z);
    }
    if (cache) cache->activations.push_back(a);
  }
  return a;
}

Eigen::VectorXd Mlp::forward_one(const Eigen::VectorXd& input, bool train_mode,
                                 std::mt19937_64* rng) const {
  return forward(input, train_mode, rng, nullptr).col(0);
}

Mlp::Gradients Mlp::backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const {
  const std::size_t layers = w_.size();
  if (cache.activations.size() != layers + 1 || cache.pre.size() != layers) {
    throw std::invalid_argument("backward needs a cache from a cached forward pass");
  }
  Gradients g;
  g.w.resize(layers);
  g.b.resize(layers);
  Eigen::MatrixXd delta = output_grad;  // d loss / d z_L (linear output)
  for (std::size_t l = layers; l-- > 0;) {
    g.w[l] = delta * cache.activations[l].transpose();
    g.b[l] = delta.rowwise().sum();
    if (l == 0) break;
    Eigen::MatrixXd da = w_[l].transpose() * delta;
    da = da.cwiseProduct(cache.dropout[l - 1]);
    const Eigen::MatrixXd& z = cache.pre[l - 1];
    delta = da.binaryExpr(z, [this](double grad, double pre) {
      return pre >= 0.0 ? grad : leaky_slope_ * grad;
    });
  }
  return g;
}

void Mlp::save(std::ostream& out) const {
  const std::int64_t layer_count = static_cast<std::int64_t>(sizes_.size());
  out.write(reinterpret_cast<const char*>(&layer_count), sizeof layer_count);
  for (int s : sizes_) {
    const std::int64_t v = s;
    out.write(reinterpret_cast<const char*>(&v), sizeof v);
  }
  out.write(reinterpret_cast<const char*>(&dropout_p_), sizeof dropout_p_);
  out.write(reinterpret_cast<const char*>(&leaky_slope_), sizeof leaky_slope_);
  for (std::size_t l = 0; l < w_.size(); ++l) {
    write_matrix(out, w_[l]);
    write_matrix(out, b_[l]);
  }
}

Mlp Mlp::load(std::istream& in) {
  std::int64_t layer_count = 0;
  in.read(reinterpret_cast<char*>(&layer_count), sizeof layer_count);
  if (!in || layer_count < 2 || layer_count > 64) throw std::runtime_error("corrupt Mlp header");
  std::vector<int> sizes(static_cast<std::size_t>(layer_count));
  for (auto& s : sizes) {
    std::int64_t v = 0;
    in.read(reinterpret_cast<char*>(&v), sizeof v);
    s = static_cast<int>(v);
  }
  double dropout = 0.0, slope = 0.0;
  in.read(reinterpret_cast<char*>(&dropout), sizeof dropout);
  in.read(reinterpret_cast<char*>(&slope), sizeof slope);
  Mlp net(sizes, dropout, slope);
  for (std::size_t l = 0; l + 1 < sizes.size(); ++l) {
    net.w_[l] = read_matrix(in);
    net.b_[l] = read_matrix(in).col(0);
  }
  return net;
}

AdamState AdamState::like(const Mlp& net) {
  AdamState s;
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    s.mw.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    s.vw.push_back(Eigen::MatrixXd::Zero(net.weights()[l].rows(), net.weights()[l].cols()));
    s.mb.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
    s.vb.push_back(Eigen::VectorXd::Zero(net.biases()[l].size()));
  }
  return s;
}

void AdamState::save(std::ostream& out) const {
  out.write(reinterpret_cast<const char*>(&t), sizeof t);
  const std::int64_t layers = static_cast<std::int64_t>(mw.size());
  out.write(reinterpret_cast<const char*>(&layers), sizeof layers);
  for (std::size_t l = 0; l < mw.size(); ++l) {
    write_matrix(out, mw[l]);
    write_matrix(out, vw[l]);
    write_matrix(out, mb[l]);
    write_matrix(out, vb[l]);
  }
}

AdamState AdamState::load(std::istream& in) {
  AdamState s;
  in.read(reinterpret_cast<char*>(&s.t), sizeof s.t);
  std::int64_t layers = 0;
  in.read(reinterpret_cast<char*>(&layers), sizeof layers);
  if (!in || layers < 0 || layers > 64) throw std::runtime_error("corrupt Adam state");
  for (std::int64_t l = 0; l < layers; ++l) {
    s.mw.push_back(read_matrix(in));
    s.vw.push_back(read_matrix(in));
    s.mb.push_back(read_matrix(in).col(0));
    s.vb.push_back(read_matrix(in).col(0));
  }
  return s;
}

void adam_update(Mlp& net, const Mlp::Gradients& grads, AdamState& state, double learning_rate,
                 double beta1, double beta2, double eps) {
  state.t += 1;
  const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
  const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
  for (std::size_t l = 0; l < net.weights().size(); ++l) {
    state.mw[l] = beta1 * state.mw[l] + (1.0 - beta1) * grads.w[l];
    state.vw[l] = beta2 * state.vw[l] + (1.0 - beta2) * grads.w[l].cwiseProduct(grads.w[l]);
    net.weights()[l] -=
        learning_rate *
        (state.mw[l] / bc1)
            .cwiseQuotient((state.vw[l] / bc2).cwiseSqrt() +
                           Eigen::MatrixXd::Constant(state.vw[l].rows(), state.vw[l].cols(), eps));
    state.mb[l] = beta1 * state.mb[l] + (1.0 - beta1) * grads.b[l];
    state.vb[l] = beta2 * state.vb[l] + (1.0 - beta2) * grads.b[l].cwiseProduct(grads.b[l]);
    net.biases()[l] -=
        learning_rate *
        (state.mb[l] / bc1)
            .cwiseQuotient((state.vb[l] / bc2).cwiseSqrt() +
                           Eigen::VectorXd::Constant(state.vb[l].size(), eps));
  }
}

}  // namespace qas
