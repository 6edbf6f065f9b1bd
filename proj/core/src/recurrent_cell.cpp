#include "mlsm/error.hpp"
#include "mlsm/recurrent.hpp"

#include <cmath>
#include <sstream>

namespace mlsm {
namespace {

Eigen::VectorXd sigmoid(const Eigen::VectorXd& z) {
    Eigen::VectorXd out(z.size());
    for (Eigen::Index i = 0; i < z.size(); ++i) {
        const double v = z(i);
        if (v >= 0.0) {
            out(i) = 1.0 / (1.0 + std::exp(-v));
        } else {
            const double e = std::exp(v);
            out(i) = e / (1.0 + e);
        }
    }
    return out;
}

Eigen::VectorXd preactivation(const GateParams& g, const Eigen::VectorXd& x, const Eigen::VectorXd& h) {
    return g.w_x * x + g.w_h * h + g.bias;
}

void check_gate(const GateParams& g, std::size_t input, std::size_t hidden, const char* name) {
    if (static_cast<std::size_t>(g.w_x.rows()) != hidden || static_cast<std::size_t>(g.w_x.cols()) != input ||
        static_cast<std::size_t>(g.w_h.rows()) != hidden || static_cast<std::size_t>(g.w_h.cols()) != hidden ||
        static_cast<std::size_t>(g.bias.size()) != hidden) {
        std::ostringstream msg;
        msg << name << " gate weights do not match input " << input << " / hidden " << hidden;
        fail(ErrorCode::ShapeMismatch, msg.str());
    }
}

void check_vector(const Eigen::VectorXd& v, std::size_t expected, const char* name) {
    if (static_cast<std::size_t>(v.size()) != expected) {
        std::ostringstream msg;
        msg << name << " has length " << v.size() << ", expected " << expected;
        fail(ErrorCode::ShapeMismatch, msg.str());
    }
}

void accumulate_gate(GateParams& grad, const Eigen::VectorXd& d_pre, const Eigen::VectorXd& x,
                     const Eigen::VectorXd& h_prev) {
    grad.w_x.noalias() += d_pre * x.transpose();
    grad.w_h.noalias() += d_pre * h_prev.transpose();
    grad.bias += d_pre;
}

}  // namespace

GateParams GateParams::zeros(std::size_t input, std::size_t hidden) {
    const auto h = static_cast<Eigen::Index>(hidden);
    return {Eigen::MatrixXd::Zero(h, static_cast<Eigen::Index>(input)), Eigen::MatrixXd::Zero(h, h),
            Eigen::VectorXd::Zero(h)};
}

LstmParams LstmParams::zeros(std::size_t input, std::size_t hidden) {
    return {GateParams::zeros(input, hidden), GateParams::zeros(input, hidden), GateParams::zeros(input, hidden),
            GateParams::zeros(input, hidden)};
}

void LstmParams::check_shapes() const {
    const auto in = input_size();
    const auto hid = hidden_size();
    check_gate(input, in, hid, "input");
    check_gate(forget, in, hid, "forget");
    check_gate(output, in, hid, "output");
    check_gate(candidate, in, hid, "candidate");
}

GruParams GruParams::zeros(std::size_t input, std::size_t hidden) {
    return {GateParams::zeros(input, hidden), GateParams::zeros(input, hidden), GateParams::zeros(input, hidden)};
}

void GruParams::check_shapes() const {
    const auto in = input_size();
    const auto hid = hidden_size();
    check_gate(update, in, hid, "update");
    check_gate(reset, in, hid, "reset");
    check_gate(candidate, in, hid, "candidate");
}

LstmCache lstm_forward(const LstmParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                       const Eigen::VectorXd& c_prev) {
    params.check_shapes();
    check_vector(x, params.input_size(), "x");
    check_vector(h_prev, params.hidden_size(), "h_prev");
    check_vector(c_prev, params.hidden_size(), "c_prev");

    LstmCache cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;
    cache.input_gate = sigmoid(preactivation(params.input, x, h_prev));
    cache.forget_gate = sigmoid(preactivation(params.forget, x, h_prev));
    cache.output_gate = sigmoid(preactivation(params.output, x, h_prev));
    cache.candidate = preactivation(params.candidate, x, h_prev).array().tanh();
    cache.c = cache.forget_gate.cwiseProduct(c_prev) + cache.input_gate.cwiseProduct(cache.candidate);
    cache.tanh_c = cache.c.array().tanh();
    cache.h = cache.output_gate.cwiseProduct(cache.tanh_c);
    return cache;
}

LstmState lstm_step(const LstmParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev,
                    const Eigen::VectorXd& c_prev) {
    auto cache = lstm_forward(params, x, h_prev, c_prev);
    return {std::move(cache.h), std::move(cache.c)};
}

LstmStepGradients lstm_backward(const LstmParams& params, const LstmCache& cache, const Eigen::VectorXd& dh,
                                const Eigen::VectorXd& dc, LstmParams& grads) {
    const auto& i = cache.input_gate;
    const auto& f = cache.forget_gate;
    const auto& o = cache.output_gate;
    const auto& g = cache.candidate;

    const Eigen::VectorXd d_out = dh.cwiseProduct(cache.tanh_c);
    const Eigen::VectorXd d_cell =
        dc + dh.cwiseProduct(o).cwiseProduct((1.0 - cache.tanh_c.array().square()).matrix());

    const Eigen::VectorXd pre_i = d_cell.cwiseProduct(g).array() * i.array() * (1.0 - i.array());
    const Eigen::VectorXd pre_f = d_cell.cwiseProduct(cache.c_prev).array() * f.array() * (1.0 - f.array());
    const Eigen::VectorXd pre_o = d_out.array() * o.array() * (1.0 - o.array());
    const Eigen::VectorXd pre_g = d_cell.cwiseProduct(i).array() * (1.0 - g.array().square());

    accumulate_gate(grads.input, pre_i, cache.x, cache.h_prev);
    accumulate_gate(grads.forget, pre_f, cache.x, cache.h_prev);
    accumulate_gate(grads.output, pre_o, cache.x, cache.h_prev);
    accumulate_gate(grads.candidate, pre_g, cache.x, cache.h_prev);

    LstmStepGradients out;
    out.dx = params.input.w_x.transpose() * pre_i + params.forget.w_x.transpose() * pre_f +
             params.output.w_x.transpose() * pre_o + params.candidate.w_x.transpose() * pre_g;
    out.dh_prev = params.input.w_h.transpose() * pre_i + params.forget.w_h.transpose() * pre_f +
                  params.output.w_h.transpose() * pre_o + params.candidate.w_h.transpose() * pre_g;
    out.dc_prev = d_cell.cwiseProduct(f);
    return out;
}

GruCache gru_forward(const GruParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev) {
    params.check_shapes();
    check_vector(x, params.input_size(), "x");
    check_vector(h_prev, params.hidden_size(), "h_prev");

    GruCache cache;
    cache.x = x;
    cache.h_prev = h_prev;
    cache.update_gate = sigmoid(preactivation(params.update, x, h_prev));
    cache.reset_gate = sigmoid(preactivation(params.reset, x, h_prev));
    cache.recurrent_candidate = params.candidate.w_h * h_prev;
    cache.candidate = (params.candidate.w_x * x + cache.reset_gate.cwiseProduct(cache.recurrent_candidate) +
                       params.candidate.bias)
                          .array()
                          .tanh();
    cache.h = (1.0 - cache.update_gate.array()) * h_prev.array() + cache.update_gate.array() * cache.candidate.array();
    return cache;
}

Eigen::VectorXd gru_step(const GruParams& params, const Eigen::VectorXd& x, const Eigen::VectorXd& h_prev) {
    return gru_forward(params, x, h_prev).h;
}

GruStepGradients gru_backward(const GruParams& params, const GruCache& cache, const Eigen::VectorXd& dh,
                              GruParams& grads) {
    const auto& z = cache.update_gate;
    const auto& r = cache.reset_gate;
    const auto& g = cache.candidate;

    const Eigen::VectorXd d_z = dh.cwiseProduct(g - cache.h_prev);
    const Eigen::VectorXd pre_g = dh.cwiseProduct(z).array() * (1.0 - g.array().square());
    const Eigen::VectorXd d_r = pre_g.cwiseProduct(cache.recurrent_candidate);
    const Eigen::VectorXd d_recurrent = pre_g.cwiseProduct(r);
    const Eigen::VectorXd pre_z = d_z.array() * z.array() * (1.0 - z.array());
    const Eigen::VectorXd pre_r = d_r.array() * r.array() * (1.0 - r.array());

    accumulate_gate(grads.update, pre_z, cache.x, cache.h_prev);
    accumulate_gate(grads.reset, pre_r, cache.x, cache.h_prev);
    grads.candidate.w_x.noalias() += pre_g * cache.x.transpose();
    grads.candidate.w_h.noalias() += d_recurrent * cache.h_prev.transpose();
    grads.candidate.bias += pre_g;

    GruStepGradients out;
    out.dx = params.update.w_x.transpose() * pre_z + params.reset.w_x.transpose() * pre_r +
             params.candidate.w_x.transpose() * pre_g;
    out.dh_prev = dh.cwiseProduct((1.0 - z.array()).matrix()) + params.update.w_h.transpose() * pre_z +
                  params.reset.w_h.transpose() * pre_r + params.candidate.w_h.transpose() * d_recurrent;
    return out;
}

std::size_t lstm_step_flops(std::size_t input, std::size_t hidden) noexcept {
    const std::size_t gate = 2 * hidden * input + 2 * hidden * hidden + 2 * hidden + hidden;  // matvecs, 2 adds, activation
    return 4 * gate + 3 * hidden /* c */ + 2 * hidden /* tanh(c), h */;
}

std::size_t gru_step_flops(std::size_t input, std::size_t hidden) noexcept {
    const std::size_t gate = 2 * hidden * input + 2 * hidden * hidden + 2 * hidden + hidden;
    return 3 * gate + hidden /* reset product */ + 4 * hidden /* interpolation */;
}

}  // namespace mlsm
