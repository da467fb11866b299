#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "lrtc/nn/autograd.hpp"
#include "lrtc/nn/optim.hpp"

namespace lrtc::nn {

inline Tensor xavier(std::size_t in, std::size_t out, Rng &rng) {
    return Tensor::uniform({in, out}, std::sqrt(6.0 / static_cast<double>(in + out)), rng);
}

struct Linear {
    Var weight;  // in x out
    Var bias;    // 1 x out

    Var operator()(const Var &x) const { return add_row(matmul(x, weight), bias); }

    static Linear create(ParamStore &ps, const std::string &name, std::size_t in, std::size_t out, Rng &rng) {
        return {ps.add(name + ".w", xavier(in, out, rng)), ps.add(name + ".b", Tensor::matrix(1, out))};
    }

    static Linear bind(const ParamStore &ps, const std::string &name) {
        return {ps.get(name + ".w"), ps.get(name + ".b")};
    }
};

struct LayerNorm {
    Var gain;
    Var bias;

    Var operator()(const Var &x) const { return layer_norm(x, gain, bias); }

    static LayerNorm create(ParamStore &ps, const std::string &name, std::size_t dim) {
        return {ps.add(name + ".g", Tensor::matrix(1, dim, 1.0)), ps.add(name + ".b", Tensor::matrix(1, dim))};
    }
};

/// Single-direction LSTM over the rows of an L x in matrix.
class Lstm {
   public:
    Lstm() = default;

    static Lstm create(ParamStore &ps, const std::string &name, std::size_t in, std::size_t hidden, Rng &rng) {
        Lstm l;
        l.hidden_ = hidden;
        l.input_ = Linear::create(ps, name + ".x", in, 4 * hidden, rng);
        l.recurrent_ = ps.add(name + ".h", xavier(hidden, 4 * hidden, rng));
        // Forget-gate bias starts at 1.
        Tensor &b = l.input_.bias.mutable_value();
        for (std::size_t j = hidden; j < 2 * hidden; ++j) b[j] = 1.0;
        return l;
    }

    /// Hidden state per position (1 x hidden each), in input order.
    std::vector<Var> run(const Var &x, bool reverse) const {
        const std::size_t len = x.rows();
        const Var gates_x = input_(x);
        std::vector<Var> hs(len);
        Var h = constant(Tensor::matrix(1, hidden_));
        Var c = constant(Tensor::matrix(1, hidden_));
        for (std::size_t s = 0; s < len; ++s) {
            const std::size_t t = reverse ? len - 1 - s : s;
            Var gates = add(slice_rows(gates_x, t, 1), matmul(h, recurrent_));
            Var i = sigmoid(slice_cols(gates, 0, hidden_));
            Var f = sigmoid(slice_cols(gates, hidden_, hidden_));
            Var g = tanh(slice_cols(gates, 2 * hidden_, hidden_));
            Var o = sigmoid(slice_cols(gates, 3 * hidden_, hidden_));
            c = add(mul(f, c), mul(i, g));
            h = mul(o, tanh(c));
            hs[t] = h;
        }
        return hs;
    }

    std::size_t hidden() const { return hidden_; }

   private:
    std::size_t hidden_ = 0;
    Linear input_;
    Var recurrent_;
};

struct BiLstmOutput {
    Var states;        // L x 2H, [forward | backward] per row
    Var forward;       // L x H
    Var backward;      // L x H
    Var final_states;  // 1 x 2H: last forward state, first backward state
};

class BiLstm {
   public:
    static BiLstm create(ParamStore &ps, const std::string &name, std::size_t in, std::size_t hidden, Rng &rng) {
        BiLstm b;
        b.fwd_ = Lstm::create(ps, name + ".fwd", in, hidden, rng);
        b.bwd_ = Lstm::create(ps, name + ".bwd", in, hidden, rng);
        return b;
    }

    BiLstmOutput operator()(const Var &x) const {
        auto f = fwd_.run(x, false);
        auto b = bwd_.run(x, true);
        BiLstmOutput out;
        out.forward = concat_rows(f);
        out.backward = concat_rows(b);
        out.states = concat_cols({out.forward, out.backward});
        out.final_states = concat_cols({f.back(), b.front()});
        return out;
    }

   private:
    Lstm fwd_;
    Lstm bwd_;
};

/// Post-norm transformer block: self-attention and a GELU feed-forward
/// sublayer, each wrapped in residual + layer normalization.
class TransformerBlock {
   public:
    static TransformerBlock create(ParamStore &ps, const std::string &name, std::size_t dim, std::size_t heads,
                                   std::size_t ff_dim, Rng &rng) {
        if (heads == 0 || dim % heads != 0) {
            throw ConfigError("embedding dim " + std::to_string(dim) + " not divisible by " + std::to_string(heads) +
                              " heads");
        }
        TransformerBlock b;
        b.heads_ = heads;
        b.dim_ = dim;
        b.q_ = Linear::create(ps, name + ".attn.q", dim, dim, rng);
        b.k_ = Linear::create(ps, name + ".attn.k", dim, dim, rng);
        b.v_ = Linear::create(ps, name + ".attn.v", dim, dim, rng);
        b.o_ = Linear::create(ps, name + ".attn.o", dim, dim, rng);
        b.ln1_ = LayerNorm::create(ps, name + ".ln1", dim);
        b.ff1_ = Linear::create(ps, name + ".ff1", dim, ff_dim, rng);
        b.ff2_ = Linear::create(ps, name + ".ff2", ff_dim, dim, rng);
        b.ln2_ = LayerNorm::create(ps, name + ".ln2", dim);
        return b;
    }

    /// `key_mask[j]` = 0 hides position j from every query. When
    /// `attention` is given, each head's L x L weights are appended to it.
    Var operator()(const Var &x, const std::vector<char> &key_mask, double dropout_p, Rng *rng,
                   std::vector<Tensor> *attention = nullptr) const {
        const bool training = rng != nullptr && dropout_p > 0.0;
        const std::size_t head_dim = dim_ / heads_;
        const Var q = q_(x), k = k_(x), v = v_(x);
        std::vector<Var> contexts;
        for (std::size_t h = 0; h < heads_; ++h) {
            Var qh = slice_cols(q, h * head_dim, head_dim);
            Var kh = slice_cols(k, h * head_dim, head_dim);
            Var vh = slice_cols(v, h * head_dim, head_dim);
            Var scores = scale(matmul(qh, transpose(kh)), 1.0 / std::sqrt(static_cast<double>(head_dim)));
            Var probs = masked_softmax(scores, key_mask);
            if (attention) attention->push_back(probs.value());
            if (training) probs = dropout(probs, dropout_p, *rng, true);
            contexts.push_back(matmul(probs, vh));
        }
        Var attn = o_(heads_ == 1 ? contexts.front() : concat_cols(contexts));
        if (training) attn = dropout(attn, dropout_p, *rng, true);
        Var x1 = ln1_(add(x, attn));
        Var ff = ff2_(gelu(ff1_(x1)));
        if (training) ff = dropout(ff, dropout_p, *rng, true);
        return ln2_(add(x1, ff));
    }

   private:
    std::size_t heads_ = 1;
    std::size_t dim_ = 0;
    Linear q_, k_, v_, o_;
    LayerNorm ln1_;
    Linear ff1_, ff2_;
    LayerNorm ln2_;
};

}  // namespace lrtc::nn
