#pragma once

#include "mlsm/metrics.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace mlsm {

/// Weights of one gate: preactivation = w_x * x + w_h * h_prev + bias.
struct GateParams {
    Eigen::MatrixXd w_x;  // hidden x input
    Eigen::MatrixXd w_h;  // hidden x hidden
    Eigen::VectorXd bias;

    static GateParams zeros(std::size_t input, std::size_t hidden);
};

struct LstmParams {
    GateParams input;
    GateParams forget;
    GateParams output;
    GateParams candidate;

    static LstmParams zeros(std::size_t input, std::size_t hidden);
    std::size_t input_size() const noexcept { return static_cast<std::size_t>(input.w_x.cols()); }
    std::size_t hidden_size() const noexcept { return static_cast<std::size_t>(input.w_x.rows()); }
    void check_shapes() const;

    template <class F>
    void visit(F&& f) {
        for (GateParams* g : {&input, &forget, &output, &candidate}) {
            f(g->w_x);
            f(g->w_h);
            f(g->bias);
        }
    }
};

struct GruParams {
    GateParams update;
    GateParams reset;
    // w_h of the candidate multiplies h_prev before the reset gate is applied.
    GateParams candidate;

    static GruParams zeros(std::size_t input, std::size_t hidden);
    std::size_t input_size() const noexcept { return static_cast<std::size_t>(update.w_x.cols()); }
    std::size_t hidden_size() const noexcept { return static_cast<std::size_t>(update.w_x.rows()); }
    void check_shapes() const;

    template <class F>
    void visit(F&& f) {
        for (GateParams* g : {&update, &reset, &candidate}) {
            f(g->w_x);
            f(g->w_h);
            f(g->bias);
        }
    }
};

// ---------------------------------------------------------------------------
// Single cell steps

struct LstmCache {
    Eigen::VectorXd x, h_prev, c_prev;
    Eigen::VectorXd input_gate, forget_gate, output_gate, candidate;
    Eigen::VectorXd c, tanh_c, h;
};

struct GruCache {
    Eigen::VectorXd x, h_prev;
    Eigen::VectorXd update_gate, reset_gate, recurrent_candidate, candidate, h;
};

struct LstmState {
    Eigen::VectorXd h;
    Eigen::VectorXd c;
};

/// i, f, o = sigmoid(.), g = tanh(.), c = f*c_prev + i*g, h = o*tanh(c).
LstmState lstm_step(const LstmParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                    const Eigen::VectorXd& c_prev);
LstmCache lstm_forward(const LstmParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                       const Eigen::VectorXd& c_prev);

/// Backpropagates (dh, dc) through one step. Parameter gradients are added
/// into `grads`; gradients with respect to the step inputs are returned.
struct LstmStepGradients {
    Eigen::VectorXd dx, dh_prev, dc_prev;
};
LstmStepGradients lstm_backward(const LstmParams& params, const LstmCache& cache, const Eigen::VectorXd& dh,
                                const Eigen::VectorXd& dc, LstmParams& grads);

/// z, r = sigmoid(.), g = tanh(W_x x + r * (W_h h_prev) + b), h = (1-z)*h_prev + z*g.
Eigen::VectorXd gru_step(const GruParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev);
GruCache gru_forward(const GruParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev);

struct GruStepGradients {
    Eigen::VectorXd dx, dh_prev;
};
GruStepGradients gru_backward(const GruParams& params, const GruCache& cache, const Eigen::VectorXd& dh,
                              GruParams& grads);

/// Floating-point operations of one forward step (multiply and add counted
/// separately, one per activation evaluation).
std::size_t lstm_step_flops(std::size_t input, std::size_t hidden) noexcept;
std::size_t gru_step_flops(std::size_t input, std::size_t hidden) noexcept;

// ---------------------------------------------------------------------------
// Network

enum class CellKind { lstm, gru };
enum class Activation { relu, tanh };

std::string to_string(CellKind kind);
std::string to_string(Activation activation);

struct NetworkConfig {
    CellKind cell = CellKind::gru;
    std::vector<std::size_t> hidden_sizes{8};
    std::size_t dense_size = 0;  // 0: the output layer reads the last hidden state directly
    Activation activation = Activation::relu;
    std::size_t epochs = 200;
    std::size_t batch_size = 64;
    double learning_rate = 0.001;
    std::size_t window = 1;  // sequence length; tabular rows are length-1 sequences
    double train_fraction = 0.8;
    std::uint64_t seed = 0;

    void validate() const;
};

struct DenseLayer {
    Eigen::MatrixXd weights;
    Eigen::VectorXd bias;
};

/// Stacked recurrent layers, an optional activated dense layer and a linear
/// scalar output. Sequences are passed as input x length matrices, one
/// column per time step; the prediction is read after the last step.
class RecurrentNetwork {
public:
    RecurrentNetwork() = default;
    RecurrentNetwork(const NetworkConfig& config, std::size_t input_size);

    /// Same shapes, every parameter zero.
    RecurrentNetwork zeros_like() const;
    void initialize(std::uint64_t seed);

    double forward(const Eigen::MatrixXd& sequence) const;
    /// Adds d(weight * (f(x) - target)^2)/d(params) into `grads` and returns
    /// the squared error.
    double accumulate_gradient(const Eigen::MatrixXd& sequence, double target, double weight,
                               RecurrentNetwork& grads) const;

    std::vector<std::span<double>> parameter_blocks();
    std::vector<std::string> parameter_names() const;
    std::size_t parameter_count() const;

    const NetworkConfig& config() const noexcept { return config_; }
    std::size_t input_size() const noexcept { return input_size_; }
    std::vector<LstmParams>& lstm_layers() noexcept { return lstm_; }
    std::vector<GruParams>& gru_layers() noexcept { return gru_; }
    const std::vector<LstmParams>& lstm_layers() const noexcept { return lstm_; }
    const std::vector<GruParams>& gru_layers() const noexcept { return gru_; }

private:
    NetworkConfig config_;
    std::size_t input_size_ = 0;
    std::vector<LstmParams> lstm_;
    std::vector<GruParams> gru_;
    DenseLayer hidden_;
    DenseLayer output_;
};

/// Adam with bias correction; moments are kept per scalar parameter.
struct AdamState {
    std::vector<double> first_moment;
    std::vector<double> second_moment;
    std::size_t step = 0;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
    double learning_rate = 0.001;

    explicit AdamState(std::size_t n_params = 0, double lr = 0.001)
        : first_moment(n_params, 0.0), second_moment(n_params, 0.0), learning_rate(lr) {}

    void apply(std::vector<std::span<double>> params, const std::vector<std::span<double>>& grads);
};

/// Network plus the standardization fitted on the training split.
class RecurrentModel {
public:
    RecurrentModel() = default;
    RecurrentModel(RecurrentNetwork network, Eigen::RowVectorXd feature_mean, Eigen::RowVectorXd feature_scale,
                   double target_mean, double target_scale);

    /// One prediction per row t >= window - 1, using rows t-window+1..t.
    Eigen::VectorXd predict(const Eigen::MatrixXd& features) const;
    Eigen::MatrixXd sequence_at(const Eigen::MatrixXd& features, std::size_t end_row) const;

    const RecurrentNetwork& network() const noexcept { return network_; }
    RecurrentNetwork& network() noexcept { return network_; }
    double target_mean() const noexcept { return target_mean_; }
    double target_scale() const noexcept { return target_scale_; }

    void save(std::ostream& out) const;
    static RecurrentModel load(std::istream& in);

private:
    RecurrentNetwork network_;
    Eigen::RowVectorXd feature_mean_;
    Eigen::RowVectorXd feature_scale_;
    double target_mean_ = 0.0;
    double target_scale_ = 1.0;
};

struct EpochLoss {
    std::size_t epoch = 0;  // 1-based
    double train_mse = 0.0;
    double validation_mse = 0.0;
};

struct TrainResult {
    RecurrentModel model;
    std::vector<EpochLoss> history;
    std::vector<std::size_t> train_rows;       // target rows used for training
    std::vector<std::size_t> validation_rows;  // target rows held out
    RegressionErrors validation_errors;        // final model, original units
};

/// Seeded 80-20 shuffle split, then mini-batch Adam on MSE. MSEs in the
/// history are in target units.
TrainResult train(const NetworkConfig& config, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets);

void write_history_csv(std::ostream& out, const std::vector<EpochLoss>& history);

}  // namespace mlsm
