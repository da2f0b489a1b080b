#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "iic/core/types.hpp"
#include "iic/decomp/reconstruct.hpp"

namespace iic::nn {

enum class Arch { FCN, LSTM, TransformerEncoder };

std::string_view arch_name(Arch a);
std::optional<Arch> arch_from_name(std::string_view name);

struct ModelSpec {
    Arch arch = Arch::FCN;
    int hidden_size = 32;
    /// FCN: hidden ReLU layers (0 gives a purely affine model);
    /// LSTM: stacked recurrent layers; transformer: encoder blocks.
    int num_layers = 1;
    int num_heads = 4; // transformer only; must divide hidden_size
    int input_length = 0;
    int input_channels = 0;
    int num_classes = 2;
    std::uint64_t seed = 0;

    bool operator==(const ModelSpec&) const = default;
};

/// Throws InvalidConfig on nonsensical sizes.
void validate_spec(const ModelSpec& spec);

struct ModelOutput {
    std::vector<double> logits;
    std::vector<double> probs; // softmax(logits); sums to 1 within 1e-9
};

/// Scalar objective over the model output, with its gradient supplied
/// against probs and/or logits (either may be absent).
struct OutputObjective {
    std::function<double(const ModelOutput&)> value;
    std::function<std::vector<double>(const ModelOutput&)> grad_probs;
    std::function<std::vector<double>(const ModelOutput&)> grad_logits;
};

/// Cross entropy -log p[label], evaluated stably from logits.
OutputObjective cross_entropy_objective(int label);

namespace detail {

struct FcnParams {
    std::vector<Eigen::MatrixXd> W; // W[0]: H x (t*C); later: H x H
    std::vector<Eigen::VectorXd> b;
    Eigen::MatrixXd Wout;
    Eigen::VectorXd bout;

    template <class Self, class F> static void visit(Self& s, F&& f) {
        for (std::size_t i = 0; i < s.W.size(); ++i) {
            f("fc" + std::to_string(i) + ".W", s.W[i]);
            f("fc" + std::to_string(i) + ".b", s.b[i]);
        }
        f("head.W", s.Wout);
        f("head.b", s.bout);
    }
};

struct LstmParams {
    struct Layer {
        Eigen::MatrixXd Wx; // 4H x in  (gate row order: input, forget, cell, output)
        Eigen::MatrixXd Wh; // 4H x H
        Eigen::VectorXd b;  // 4H
    };
    std::vector<Layer> layers;
    Eigen::MatrixXd Wout; // K x H (reads the last hidden state)
    Eigen::VectorXd bout;

    template <class Self, class F> static void visit(Self& s, F&& f) {
        for (std::size_t i = 0; i < s.layers.size(); ++i) {
            const std::string p = "lstm" + std::to_string(i);
            f(p + ".Wx", s.layers[i].Wx);
            f(p + ".Wh", s.layers[i].Wh);
            f(p + ".b", s.layers[i].b);
        }
        f("head.W", s.Wout);
        f("head.b", s.bout);
    }
};

struct TransformerParams {
    Eigen::MatrixXd We; // H x C token embedding
    Eigen::VectorXd be;
    struct Block {
        Eigen::MatrixXd Wq, Wk, Wv, Wo; // H x H
        Eigen::VectorXd bq, bk, bv, bo;
        Eigen::VectorXd ln1_g, ln1_b; // post-attention LayerNorm
        Eigen::MatrixXd Wf1; // F x H, F = 2H, GELU
        Eigen::VectorXd bf1;
        Eigen::MatrixXd Wf2; // H x F
        Eigen::VectorXd bf2;
        Eigen::VectorXd ln2_g, ln2_b; // post-FFN LayerNorm
    };
    std::vector<Block> blocks;
    Eigen::MatrixXd Wout; // K x H over the time-mean-pooled encoding
    Eigen::VectorXd bout;

    template <class Self, class F> static void visit(Self& s, F&& f) {
        f("embed.W", s.We);
        f("embed.b", s.be);
        for (std::size_t i = 0; i < s.blocks.size(); ++i) {
            const std::string p = "block" + std::to_string(i);
            auto& blk = s.blocks[i];
            f(p + ".attn.Wq", blk.Wq);
            f(p + ".attn.bq", blk.bq);
            f(p + ".attn.Wk", blk.Wk);
            f(p + ".attn.bk", blk.bk);
            f(p + ".attn.Wv", blk.Wv);
            f(p + ".attn.bv", blk.bv);
            f(p + ".attn.Wo", blk.Wo);
            f(p + ".attn.bo", blk.bo);
            f(p + ".ln1.g", blk.ln1_g);
            f(p + ".ln1.b", blk.ln1_b);
            f(p + ".ffn.W1", blk.Wf1);
            f(p + ".ffn.b1", blk.bf1);
            f(p + ".ffn.W2", blk.Wf2);
            f(p + ".ffn.b2", blk.bf2);
            f(p + ".ln2.g", blk.ln2_g);
            f(p + ".ln2.b", blk.ln2_b);
        }
        f("head.W", s.Wout);
        f("head.b", s.bout);
    }
};

using Params = std::variant<FcnParams, LstmParams, TransformerParams>;

} // namespace detail

/// A differentiable classifier over t x C input matrices (row per timestep,
/// column per modality in enum order). All math is float64 Eigen; forward
/// and reverse passes are hand-written, single-threaded, and deterministic.
class Model {
  public:
    /// Random initialization from spec.seed (uniform +-1/sqrt(fan_in)).
    static Model init(const ModelSpec& spec);
    static Model from_parameters(const ModelSpec& spec, std::span<const double> flat);

    const ModelSpec& spec() const { return spec_; }

    /// Per-channel affine applied before the network: column c becomes
    /// (x_c - shift[c]) / scale[c]. Identity after init/from_parameters;
    /// training fits it to the train split so channels on different
    /// physical scales compete on equal footing. Gradients returned by
    /// objective_backward stay in raw input units. Throws InvalidConfig on
    /// size mismatch or non-positive scale.
    void set_input_scaling(const Eigen::VectorXd& shift, const Eigen::VectorXd& scale);
    const Eigen::VectorXd& input_shift() const { return in_shift_; }
    const Eigen::VectorXd& input_scale() const { return in_scale_; }

    /// x: input_length x input_channels. Throws ShapeMismatch otherwise.
    ModelOutput forward(const Eigen::MatrixXd& x) const;

    /// Reverse-mode pass of `obj` through the network. Returns the objective
    /// value; if `input_grad` is non-null it receives d obj/d x (t x C); if
    /// `param_grad` is non-null the flat parameter gradient is ADDED to it
    /// (callers zero it between batches).
    double objective_backward(const Eigen::MatrixXd& x, const OutputObjective& obj,
                              Eigen::MatrixXd* input_grad, std::vector<double>* param_grad) const;

    /// Smallest |preactivation| among ReLU units for this input (FCN only;
    /// +inf for smooth architectures). Finite-difference tests use it to
    /// keep probes away from kinks.
    double min_relu_margin(const Eigen::MatrixXd& x) const;

    std::size_t parameter_count() const;
    std::vector<double> parameters() const;
    void set_parameters(std::span<const double> flat);

    /// Visits (name, tensor) pairs in the canonical order used by the flat
    /// layout and the checkpoint format.
    template <class F> void visit_tensors(F&& f) const {
        std::visit([&](const auto& p) {
            std::decay_t<decltype(p)>::visit(p, std::forward<F>(f));
        }, params_);
    }

  private:
    Model(ModelSpec spec, detail::Params params)
        : spec_(std::move(spec)), params_(std::move(params)),
          in_shift_(Eigen::VectorXd::Zero(spec_.input_channels)),
          in_scale_(Eigen::VectorXd::Ones(spec_.input_channels)) {}

    Eigen::MatrixXd scaled_input(const Eigen::MatrixXd& x) const;

    ModelSpec spec_;
    detail::Params params_;
    Eigen::VectorXd in_shift_, in_scale_;
};

/// Window adapters: channels become matrix columns in modality enum order.
Eigen::MatrixXd window_to_matrix(const core::MultimodalWindow& w);
decomp::WindowGrad matrix_to_window_grad(const Eigen::MatrixXd& g,
                                         const std::vector<core::Modality>& order);

/// Forward/gradient entry points over domain windows (shape-checked).
ModelOutput forward(const Model& model, const core::MultimodalWindow& window);
decomp::WindowGrad input_gradient(const Model& model, const core::MultimodalWindow& window,
                                  const OutputObjective& objective);

} // namespace iic::nn
