#include "mlsm/error.hpp"
#include "mlsm/format.hpp"
#include "mlsm/recurrent.hpp"
#include "mlsm/rng.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>

namespace mlsm {

std::string to_string(CellKind kind) { return kind == CellKind::lstm ? "lstm" : "gru"; }
std::string to_string(Activation activation) { return activation == Activation::relu ? "relu" : "tanh"; }

void NetworkConfig::validate() const {
    if (hidden_sizes.empty()) fail(ErrorCode::InvalidArgument, "at least one recurrent layer is required");
    for (auto h : hidden_sizes)
        if (h < 1) fail(ErrorCode::InvalidArgument, "hidden sizes must be >= 1");
    if (batch_size < 1) fail(ErrorCode::InvalidArgument, "batch_size must be >= 1");
    if (window < 1) fail(ErrorCode::InvalidArgument, "window must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        fail(ErrorCode::InvalidArgument, "learning_rate must be >= 0");
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        fail(ErrorCode::InvalidArgument, "train_fraction must lie in (0, 1)");
}

namespace {

template <class Tensor>
std::span<double> span_of(Tensor& t) {
    return {t.data(), static_cast<std::size_t>(t.size())};
}

double activate(Activation a, double v) { return a == Activation::relu ? std::max(v, 0.0) : std::tanh(v); }

double activate_derivative(Activation a, double pre) {
    if (a == Activation::relu) return pre > 0.0 ? 1.0 : 0.0;
    const double t = std::tanh(pre);
    return 1.0 - t * t;
}

struct ForwardTrace {
    std::vector<std::vector<LstmCache>> lstm;
    std::vector<std::vector<GruCache>> gru;
    Eigen::VectorXd last_hidden;
    Eigen::VectorXd dense_pre;
    Eigen::VectorXd dense_out;
    double output = 0.0;
};

}  // namespace

RecurrentNetwork::RecurrentNetwork(const NetworkConfig& config, std::size_t input_size)
    : config_(config), input_size_(input_size) {
    config_.validate();
    if (input_size < 1) fail(ErrorCode::InvalidArgument, "input size must be >= 1");
    std::size_t in = input_size;
    for (auto h : config_.hidden_sizes) {
        if (config_.cell == CellKind::lstm) lstm_.push_back(LstmParams::zeros(in, h));
        else gru_.push_back(GruParams::zeros(in, h));
        in = h;
    }
    if (config_.dense_size > 0) {
        hidden_.weights = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(config_.dense_size), static_cast<Eigen::Index>(in));
        hidden_.bias = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(config_.dense_size));
        in = config_.dense_size;
    }
    output_.weights = Eigen::MatrixXd::Zero(1, static_cast<Eigen::Index>(in));
    output_.bias = Eigen::VectorXd::Zero(1);
}

RecurrentNetwork RecurrentNetwork::zeros_like() const {
    RecurrentNetwork out = *this;
    for (auto block : out.parameter_blocks()) std::fill(block.begin(), block.end(), 0.0);
    return out;
}

std::vector<std::span<double>> RecurrentNetwork::parameter_blocks() {
    std::vector<std::span<double>> blocks;
    auto add = [&](auto& tensor) { blocks.push_back(span_of(tensor)); };
    for (auto& layer : lstm_) layer.visit(add);
    for (auto& layer : gru_) layer.visit(add);
    if (config_.dense_size > 0) {
        add(hidden_.weights);
        add(hidden_.bias);
    }
    add(output_.weights);
    add(output_.bias);
    return blocks;
}

std::vector<std::string> RecurrentNetwork::parameter_names() const {
    std::vector<std::string> names;
    const std::vector<std::string> lstm_gates{"input", "forget", "output", "candidate"};
    const std::vector<std::string> gru_gates{"update", "reset", "candidate"};
    const auto& gates = config_.cell == CellKind::lstm ? lstm_gates : gru_gates;
    for (std::size_t l = 0; l < config_.hidden_sizes.size(); ++l)
        for (const auto& gate : gates)
            for (const char* part : {"w_x", "w_h", "bias"})
                names.push_back("layer" + std::to_string(l) + "." + gate + "." + part);
    if (config_.dense_size > 0) {
        names.push_back("dense.weights");
        names.push_back("dense.bias");
    }
    names.push_back("output.weights");
    names.push_back("output.bias");
    return names;
}

std::size_t RecurrentNetwork::parameter_count() const {
    std::size_t total = 0;
    for (auto block : const_cast<RecurrentNetwork*>(this)->parameter_blocks()) total += block.size();
    return total;
}

void RecurrentNetwork::initialize(std::uint64_t seed) {
    std::mt19937_64 engine(substream_seed(seed, 1));
    auto fill = [&](auto& tensor, std::size_t fan_in) {
        const double bound = 1.0 / std::sqrt(static_cast<double>(std::max<std::size_t>(1, fan_in)));
        for (Eigen::Index i = 0; i < tensor.size(); ++i) tensor.data()[i] = (2.0 * uniform01(engine) - 1.0) * bound;
    };
    auto fill_gate = [&](GateParams& g) {
        fill(g.w_x, static_cast<std::size_t>(g.w_x.cols()));
        fill(g.w_h, static_cast<std::size_t>(g.w_h.cols()));
        fill(g.bias, static_cast<std::size_t>(g.w_h.cols()));
    };
    for (auto& layer : lstm_)
        for (GateParams* g : {&layer.input, &layer.forget, &layer.output, &layer.candidate}) fill_gate(*g);
    for (auto& layer : gru_)
        for (GateParams* g : {&layer.update, &layer.reset, &layer.candidate}) fill_gate(*g);
    if (config_.dense_size > 0) {
        fill(hidden_.weights, static_cast<std::size_t>(hidden_.weights.cols()));
        fill(hidden_.bias, static_cast<std::size_t>(hidden_.weights.cols()));
    }
    fill(output_.weights, static_cast<std::size_t>(output_.weights.cols()));
    fill(output_.bias, static_cast<std::size_t>(output_.weights.cols()));
}

namespace {

ForwardTrace run_forward(const NetworkConfig& config, const std::vector<LstmParams>& lstm,
                         const std::vector<GruParams>& gru, const DenseLayer& hidden, const DenseLayer& output,
                         const Eigen::MatrixXd& sequence) {
    ForwardTrace trace;
    const auto length = sequence.cols();
    std::vector<Eigen::VectorXd> inputs(static_cast<std::size_t>(length));
    for (Eigen::Index t = 0; t < length; ++t) inputs[static_cast<std::size_t>(t)] = sequence.col(t);

    for (const auto& layer : lstm) {
        const auto hid = static_cast<Eigen::Index>(layer.hidden_size());
        Eigen::VectorXd h = Eigen::VectorXd::Zero(hid);
        Eigen::VectorXd c = Eigen::VectorXd::Zero(hid);
        auto& caches = trace.lstm.emplace_back();
        for (auto& x : inputs) {
            caches.push_back(lstm_forward(layer, x, h, c));
            h = caches.back().h;
            c = caches.back().c;
            x = h;
        }
    }
    for (const auto& layer : gru) {
        Eigen::VectorXd h = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(layer.hidden_size()));
        auto& caches = trace.gru.emplace_back();
        for (auto& x : inputs) {
            caches.push_back(gru_forward(layer, x, h));
            h = caches.back().h;
            x = h;
        }
    }
    trace.last_hidden = inputs.back();
    Eigen::VectorXd head = trace.last_hidden;
    if (config.dense_size > 0) {
        trace.dense_pre = hidden.weights * head + hidden.bias;
        trace.dense_out = trace.dense_pre.unaryExpr([&](double v) { return activate(config.activation, v); });
        head = trace.dense_out;
    }
    trace.output = output.weights.row(0).dot(head) + output.bias(0);
    return trace;
}

}  // namespace

double RecurrentNetwork::forward(const Eigen::MatrixXd& sequence) const {
    if (static_cast<std::size_t>(sequence.rows()) != input_size_ || sequence.cols() < 1)
        fail(ErrorCode::ShapeMismatch, "sequence must be input_size x length with length >= 1");
    return run_forward(config_, lstm_, gru_, hidden_, output_, sequence).output;
}

double RecurrentNetwork::accumulate_gradient(const Eigen::MatrixXd& sequence, double target, double weight,
                                             RecurrentNetwork& grads) const {
    if (static_cast<std::size_t>(sequence.rows()) != input_size_ || sequence.cols() < 1)
        fail(ErrorCode::ShapeMismatch, "sequence must be input_size x length with length >= 1");
    const ForwardTrace trace = run_forward(config_, lstm_, gru_, hidden_, output_, sequence);
    const double error = trace.output - target;
    const double d_output = 2.0 * weight * error;

    const Eigen::VectorXd& head = config_.dense_size > 0 ? trace.dense_out : trace.last_hidden;
    grads.output_.weights.row(0) += d_output * head.transpose();
    grads.output_.bias(0) += d_output;
    Eigen::VectorXd d_head = output_.weights.row(0).transpose() * d_output;
    if (config_.dense_size > 0) {
        Eigen::VectorXd d_pre(d_head.size());
        for (Eigen::Index i = 0; i < d_head.size(); ++i)
            d_pre(i) = d_head(i) * activate_derivative(config_.activation, trace.dense_pre(i));
        grads.hidden_.weights.noalias() += d_pre * trace.last_hidden.transpose();
        grads.hidden_.bias += d_pre;
        d_head = hidden_.weights.transpose() * d_pre;
    }

    const auto length = static_cast<std::size_t>(sequence.cols());
    // Gradient with respect to each time step's output of the current layer.
    std::vector<Eigen::VectorXd> d_outputs(length);
    const std::size_t layers = config_.hidden_sizes.size();
    for (std::size_t l = layers; l-- > 0;) {
        const auto hid = static_cast<Eigen::Index>(config_.hidden_sizes[l]);
        if (l + 1 == layers) {
            for (auto& d : d_outputs) d = Eigen::VectorXd::Zero(hid);
            d_outputs.back() = d_head;
        }
        std::vector<Eigen::VectorXd> d_inputs(length);
        Eigen::VectorXd dh_next = Eigen::VectorXd::Zero(hid);
        if (config_.cell == CellKind::lstm) {
            Eigen::VectorXd dc_next = Eigen::VectorXd::Zero(hid);
            for (std::size_t t = length; t-- > 0;) {
                auto step = lstm_backward(lstm_[l], trace.lstm[l][t], d_outputs[t] + dh_next, dc_next, grads.lstm_[l]);
                d_inputs[t] = std::move(step.dx);
                dh_next = std::move(step.dh_prev);
                dc_next = std::move(step.dc_prev);
            }
        } else {
            for (std::size_t t = length; t-- > 0;) {
                auto step = gru_backward(gru_[l], trace.gru[l][t], d_outputs[t] + dh_next, grads.gru_[l]);
                d_inputs[t] = std::move(step.dx);
                dh_next = std::move(step.dh_prev);
            }
        }
        d_outputs = std::move(d_inputs);
    }
    return error * error;
}

void AdamState::apply(std::vector<std::span<double>> params, const std::vector<std::span<double>>& grads) {
    if (params.size() != grads.size()) fail(ErrorCode::ShapeMismatch, "parameter and gradient blocks differ");
    std::size_t total = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
        if (params[b].size() != grads[b].size()) fail(ErrorCode::ShapeMismatch, "parameter and gradient shapes differ");
        total += params[b].size();
    }
    if (first_moment.size() != total) fail(ErrorCode::ShapeMismatch, "optimizer state does not match parameters");

    ++step;
    const double correction1 = 1.0 - std::pow(beta1, static_cast<double>(step));
    const double correction2 = 1.0 - std::pow(beta2, static_cast<double>(step));
    std::size_t k = 0;
    for (std::size_t b = 0; b < params.size(); ++b) {
        for (std::size_t i = 0; i < params[b].size(); ++i, ++k) {
            const double g = grads[b][i];
            first_moment[k] = beta1 * first_moment[k] + (1.0 - beta1) * g;
            second_moment[k] = beta2 * second_moment[k] + (1.0 - beta2) * g * g;
            const double m_hat = first_moment[k] / correction1;
            const double v_hat = second_moment[k] / correction2;
            params[b][i] -= learning_rate * m_hat / (std::sqrt(v_hat) + epsilon);
        }
    }
}

// ---------------------------------------------------------------------------

RecurrentModel::RecurrentModel(RecurrentNetwork network, Eigen::RowVectorXd feature_mean,
                               Eigen::RowVectorXd feature_scale, double target_mean, double target_scale)
    : network_(std::move(network)), feature_mean_(std::move(feature_mean)), feature_scale_(std::move(feature_scale)),
      target_mean_(target_mean), target_scale_(target_scale) {}

Eigen::MatrixXd RecurrentModel::sequence_at(const Eigen::MatrixXd& features, std::size_t end_row) const {
    const auto window = static_cast<Eigen::Index>(network_.config().window);
    const auto end = static_cast<Eigen::Index>(end_row);
    Eigen::MatrixXd seq(features.cols(), window);
    for (Eigen::Index t = 0; t < window; ++t) {
        const Eigen::Index row = end - window + 1 + t;
        seq.col(t) = ((features.row(row) - feature_mean_).array() / feature_scale_.array()).transpose();
    }
    return seq;
}

Eigen::VectorXd RecurrentModel::predict(const Eigen::MatrixXd& features) const {
    if (static_cast<std::size_t>(features.cols()) != network_.input_size())
        fail(ErrorCode::ShapeMismatch, "feature count does not match the model input size");
    const auto window = static_cast<Eigen::Index>(network_.config().window);
    if (features.rows() < window) return {};
    Eigen::VectorXd out(features.rows() - window + 1);
    for (Eigen::Index t = window - 1; t < features.rows(); ++t)
        out(t - window + 1) = network_.forward(sequence_at(features, static_cast<std::size_t>(t))) * target_scale_ + target_mean_;
    return out;
}

void RecurrentModel::save(std::ostream& out) const {
    const auto& cfg = network_.config();
    out << "mlsm-recurrent 1\n";
    out << "cell " << to_string(cfg.cell) << '\n';
    out << "input " << network_.input_size() << '\n';
    out << "hidden";
    for (auto h : cfg.hidden_sizes) out << ' ' << h;
    out << '\n';
    out << "dense " << cfg.dense_size << '\n';
    out << "activation " << to_string(cfg.activation) << '\n';
    out << "window " << cfg.window << '\n';
    out << "feature_mean";
    for (Eigen::Index i = 0; i < feature_mean_.size(); ++i) out << ' ' << format_number(feature_mean_(i));
    out << "\nfeature_scale";
    for (Eigen::Index i = 0; i < feature_scale_.size(); ++i) out << ' ' << format_number(feature_scale_(i));
    out << "\ntarget " << format_number(target_mean_) << ' ' << format_number(target_scale_) << '\n';
    auto blocks = const_cast<RecurrentNetwork&>(network_).parameter_blocks();
    const auto names = network_.parameter_names();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        out << "tensor " << names[b] << ' ' << blocks[b].size() << '\n';
        for (std::size_t i = 0; i < blocks[b].size(); ++i) out << (i ? " " : "") << format_number(blocks[b][i]);
        out << '\n';
    }
    out << "end\n";
}

namespace {

void expect_key(std::istream& in, const std::string& key) {
    std::string word;
    if (!(in >> word) || word != key) fail(ErrorCode::FormatError, "model file: expected '" + key + "', got '" + word + "'");
}

double read_number(std::istream& in) {
    std::string word;
    if (!(in >> word)) fail(ErrorCode::FormatError, "model file: unexpected end of input");
    const auto v = parse_double(word);
    if (!v) fail(ErrorCode::FormatError, "model file: bad number '" + word + "'");
    return *v;
}

std::size_t read_count(std::istream& in) {
    const double v = read_number(in);
    if (!(v >= 0.0) || v != std::floor(v)) fail(ErrorCode::FormatError, "model file: bad count");
    return static_cast<std::size_t>(v);
}

}  // namespace

RecurrentModel RecurrentModel::load(std::istream& in) {
    expect_key(in, "mlsm-recurrent");
    if (read_count(in) != 1) fail(ErrorCode::FormatError, "model file: unsupported version");
    NetworkConfig cfg;
    std::string word;
    expect_key(in, "cell");
    in >> word;
    if (word == "lstm") cfg.cell = CellKind::lstm;
    else if (word == "gru") cfg.cell = CellKind::gru;
    else fail(ErrorCode::FormatError, "model file: unknown cell '" + word + "'");
    expect_key(in, "input");
    const std::size_t input = read_count(in);
    expect_key(in, "hidden");
    cfg.hidden_sizes.clear();
    std::string line;
    std::getline(in, line);
    std::istringstream hidden_line(line);
    while (hidden_line >> word) {
        const auto v = parse_double(word);
        if (!v || *v < 1) fail(ErrorCode::FormatError, "model file: bad hidden size");
        cfg.hidden_sizes.push_back(static_cast<std::size_t>(*v));
    }
    expect_key(in, "dense");
    cfg.dense_size = read_count(in);
    expect_key(in, "activation");
    in >> word;
    if (word == "relu") cfg.activation = Activation::relu;
    else if (word == "tanh") cfg.activation = Activation::tanh;
    else fail(ErrorCode::FormatError, "model file: unknown activation '" + word + "'");
    expect_key(in, "window");
    cfg.window = read_count(in);

    Eigen::RowVectorXd mean(static_cast<Eigen::Index>(input));
    Eigen::RowVectorXd scale(static_cast<Eigen::Index>(input));
    expect_key(in, "feature_mean");
    for (Eigen::Index i = 0; i < mean.size(); ++i) mean(i) = read_number(in);
    expect_key(in, "feature_scale");
    for (Eigen::Index i = 0; i < scale.size(); ++i) scale(i) = read_number(in);
    expect_key(in, "target");
    const double target_mean = read_number(in);
    const double target_scale = read_number(in);

    RecurrentNetwork network(cfg, input);
    auto blocks = network.parameter_blocks();
    const auto names = network.parameter_names();
    for (std::size_t b = 0; b < blocks.size(); ++b) {
        expect_key(in, "tensor");
        in >> word;
        if (word != names[b]) fail(ErrorCode::FormatError, "model file: expected tensor " + names[b] + ", got " + word);
        if (read_count(in) != blocks[b].size()) fail(ErrorCode::FormatError, "model file: wrong size for " + names[b]);
        for (auto& v : blocks[b]) v = read_number(in);
    }
    expect_key(in, "end");
    return RecurrentModel(std::move(network), std::move(mean), std::move(scale), target_mean, target_scale);
}

// ---------------------------------------------------------------------------

TrainResult train(const NetworkConfig& config, const Eigen::MatrixXd& features, const Eigen::VectorXd& targets) {
    config.validate();
    if (features.rows() != targets.size()) fail(ErrorCode::DimensionMismatch, "features and targets differ in length");
    if (features.rows() < 10) fail(ErrorCode::InsufficientData, "training needs at least 10 rows");
    if (features.cols() < 1) fail(ErrorCode::InsufficientData, "training needs at least one feature");
    const auto n_rows = static_cast<std::size_t>(features.rows());
    if (config.window + 1 > n_rows) fail(ErrorCode::InsufficientData, "window leaves fewer than 2 samples");
    if (!features.allFinite() || !targets.allFinite()) fail(ErrorCode::InvalidArgument, "training data must be finite");

    const std::size_t first_target = config.window - 1;
    const std::size_t n_samples = n_rows - first_target;
    const auto order = shuffled_indices(n_samples, config.seed);
    std::size_t n_train = static_cast<std::size_t>(std::ceil(config.train_fraction * static_cast<double>(n_samples)));
    n_train = std::clamp<std::size_t>(n_train, 1, n_samples - 1);

    TrainResult result;
    for (std::size_t k = 0; k < n_samples; ++k)
        (k < n_train ? result.train_rows : result.validation_rows).push_back(order[k] + first_target);

    Eigen::RowVectorXd mean = Eigen::RowVectorXd::Zero(features.cols());
    Eigen::RowVectorXd scale = Eigen::RowVectorXd::Zero(features.cols());
    double y_mean = 0.0;
    double y_var = 0.0;
    for (auto r : result.train_rows) {
        mean += features.row(static_cast<Eigen::Index>(r));
        y_mean += targets(static_cast<Eigen::Index>(r));
    }
    mean /= static_cast<double>(n_train);
    y_mean /= static_cast<double>(n_train);
    for (auto r : result.train_rows) {
        scale += (features.row(static_cast<Eigen::Index>(r)) - mean).array().square().matrix();
        const double dy = targets(static_cast<Eigen::Index>(r)) - y_mean;
        y_var += dy * dy;
    }
    scale = (scale / static_cast<double>(n_train)).array().sqrt();
    for (Eigen::Index i = 0; i < scale.size(); ++i)
        if (!(scale(i) > 0.0)) scale(i) = 1.0;
    double y_scale = std::sqrt(y_var / static_cast<double>(n_train));
    if (!(y_scale > 0.0)) y_scale = 1.0;

    RecurrentNetwork network(config, static_cast<std::size_t>(features.cols()));
    network.initialize(config.seed);
    RecurrentModel model(std::move(network), mean, scale, y_mean, y_scale);

    std::vector<Eigen::MatrixXd> sequences(n_rows);
    std::vector<double> scaled_targets(n_rows);
    for (std::size_t t = first_target; t < n_rows; ++t) {
        sequences[t] = model.sequence_at(features, t);
        scaled_targets[t] = (targets(static_cast<Eigen::Index>(t)) - y_mean) / y_scale;
    }

    auto mse_over = [&](const std::vector<std::size_t>& rows) {
        double total = 0.0;
        for (auto r : rows) {
            const double e = model.network().forward(sequences[r]) - scaled_targets[r];
            total += e * e;
        }
        return total / static_cast<double>(rows.size()) * y_scale * y_scale;
    };

    RecurrentNetwork& net = model.network();
    AdamState adam(net.parameter_count(), config.learning_rate);
    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        const auto permutation = shuffled_indices(n_train, substream_seed(config.seed, epoch));
        for (std::size_t start = 0; start < n_train; start += config.batch_size) {
            const std::size_t stop = std::min(n_train, start + config.batch_size);
            RecurrentNetwork grads = net.zeros_like();
            const double weight = 1.0 / static_cast<double>(stop - start);
            for (std::size_t k = start; k < stop; ++k) {
                const std::size_t row = result.train_rows[permutation[k]];
                net.accumulate_gradient(sequences[row], scaled_targets[row], weight, grads);
            }
            adam.apply(net.parameter_blocks(), grads.parameter_blocks());
        }
        EpochLoss loss{epoch, mse_over(result.train_rows), mse_over(result.validation_rows)};
        if (!std::isfinite(loss.train_mse) || !std::isfinite(loss.validation_mse)) {
            std::ostringstream msg;
            msg << "training diverged at epoch " << epoch << " (non-finite loss)";
            fail(ErrorCode::Diverged, msg.str());
        }
        result.history.push_back(loss);
    }

    std::vector<double> actual;
    std::vector<double> predicted;
    for (auto r : result.validation_rows) {
        actual.push_back(targets(static_cast<Eigen::Index>(r)));
        predicted.push_back(net.forward(sequences[r]) * y_scale + y_mean);
    }
    result.validation_errors = regression_errors(actual, predicted);
    result.model = std::move(model);
    return result;
}

void write_history_csv(std::ostream& out, const std::vector<EpochLoss>& history) {
    out << "epoch,train_mse,val_mse\n";
    for (const auto& h : history)
        out << h.epoch << ',' << format_number(h.train_mse) << ',' << format_number(h.validation_mse) << '\n';
}

}  // namespace mlsm
