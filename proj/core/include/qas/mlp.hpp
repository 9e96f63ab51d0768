#pragma once

#include <Eigen/Dense>

#include <iosfwd>
#include <random>
#include <vector>

namespace qas {

/// Fully connected network: LeakyReLU(0.01) + dropout on hidden layers,
/// linear output. Columns of a batch matrix are samples.
class Mlp {
 public:
  Mlp(std::vector<int> layer_sizes, double dropout_p, double leaky_slope = 0.01);

  /// Uniform fan-in init: U(-1/sqrt(fan_in), 1/sqrt(fan_in)).
  static Mlp random_init(std::vector<int> layer_sizes, double dropout_p, std::mt19937_64& rng,
                         double leaky_slope = 0.01);

  int input_size() const { return sizes_.front(); }
  int output_size() const { return sizes_.back(); }
  const std::vector<int>& layer_sizes() const { return sizes_; }
  double dropout_p() const { return dropout_p_; }
  double leaky_slope() const { return leaky_slope_; }
  std::size_t parameter_count() const;

  struct Cache {
    std::vector<Eigen::MatrixXd> activations;  // a_0 = input .. a_L = output
    std::vector<Eigen::MatrixXd> pre;          // z_1 .. z_L
    std::vector<Eigen::MatrixXd> dropout;      // inverted-dropout masks per hidden layer
  };

  /// train_mode enables dropout (requires rng). Deterministic otherwise.
  Eigen::MatrixXd forward(const Eigen::MatrixXd& input, bool train_mode,
                          std::mt19937_64* rng = nullptr, Cache* cache = nullptr) const;
  Eigen::VectorXd forward_one(const Eigen::VectorXd& input, bool train_mode,
                              std::mt19937_64* rng = nullptr) const;

  struct Gradients {
    std::vector<Eigen::MatrixXd> w;
    std::vector<Eigen::VectorXd> b;
  };

  /// Backpropagates d(loss)/d(output) through a cached forward pass.
  Gradients backward(const Cache& cache, const Eigen::MatrixXd& output_grad) const;

  std::vector<Eigen::MatrixXd>& weights() { return w_; }
  const std::vector<Eigen::MatrixXd>& weights() const { return w_; }
  std::vector<Eigen::VectorXd>& biases() { return b_; }
  const std::vector<Eigen::VectorXd>& biases() const { return b_; }

  void save(std::ostream& out) const;
  static Mlp load(std::istream& in);

 private:
  std::vector<int> sizes_;
  double dropout_p_ = 0.0;
  double leaky_slope_ = 0.01;
  std::vector<Eigen::MatrixXd> w_;  // w_[l]: sizes_[l+1] x sizes_[l]
  std::vector<Eigen::VectorXd> b_;
};

/// Adam moment accumulators matching an Mlp's parameter shapes.
struct AdamState {
  std::vector<Eigen::MatrixXd> mw, vw;
  std::vector<Eigen::VectorXd> mb, vb;
  long t = 0;

  static AdamState like(const Mlp& net);
  void save(std::ostream& out) const;
  static AdamState load(std::istream& in);
};

void adam_update(Mlp& net, const Mlp::Gradients& grads, AdamState& state, double learning_rate,
                 double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

}  // namespace qas
