#include "iic/nn/model.hpp"

#include <cmath>
#include <limits>
#include <random>

#include "iic/errors.hpp"

namespace iic::nn {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

constexpr double kLnEps = 1e-5;
constexpr int kFfnMult = 2;

VectorXd softmax(const VectorXd& z) {
    const double zmax = z.maxCoeff();
    VectorXd e = (z.array() - zmax).exp();
    return e / e.sum();
}

double log_sum_exp(const VectorXd& z) {
    const double zmax = z.maxCoeff();
    return zmax + std::log((z.array() - zmax).exp().sum());
}

double gelu(double x) {
    constexpr double c = 0.7978845608028654; // sqrt(2/pi)
    const double u = c * (x + 0.044715 * x * x * x);
    return 0.5 * x * (1.0 + std::tanh(u));
}

double gelu_grad(double x) {
    constexpr double c = 0.7978845608028654;
    const double u = c * (x + 0.044715 * x * x * x);
    const double th = std::tanh(u);
    const double du = c * (1.0 + 3.0 * 0.044715 * x * x);
    return 0.5 * (1.0 + th) + 0.5 * x * (1.0 - th * th) * du;
}

struct RngFiller {
    std::mt19937_64 rng;

    explicit RngFiller(std::uint64_t seed) : rng(seed) {}

    template <class M> void fill(M& m, double bound) {
        std::uniform_real_distribution<double> d(-bound, bound);
        for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = d(rng);
    }
};

VectorXd flatten_timestep_major(const MatrixXd& x) {
    // [t0: c0..cC-1, t1: ...] so each timestep's channels stay adjacent
    VectorXd v(x.size());
    const auto c = x.cols();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < c; ++j) v[i * c + j] = x(i, j);
    }
    return v;
}

void unflatten_timestep_major(const VectorXd& v, MatrixXd& x) {
    const auto c = x.cols();
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        for (Eigen::Index j = 0; j < c; ++j) x(i, j) = v[i * c + j];
    }
}

/// Sinusoidal positional encoding row for position `pos`.
VectorXd positional_encoding(int pos, int h) {
    VectorXd pe(h);
    for (int j = 0; j < h; j += 2) {
        const double freq = std::pow(10000.0, -static_cast<double>(j) / h);
        pe[j] = std::sin(pos * freq);
        if (j + 1 < h) pe[j + 1] = std::cos(pos * freq);
    }
    return pe;
}

ModelOutput make_output(const VectorXd& logits) {
    ModelOutput out;
    out.logits.assign(logits.data(), logits.data() + logits.size());
    VectorXd p = softmax(logits);
    out.probs.assign(p.data(), p.data() + p.size());
    return out;
}

/// Combines the objective's probs/logits gradients into d obj/d logits.
VectorXd dlogits_from_objective(const ModelOutput& out, const OutputObjective& obj) {
    const auto k = static_cast<Eigen::Index>(out.logits.size());
    VectorXd dz = VectorXd::Zero(k);
    if (obj.grad_logits) {
        auto gl = obj.grad_logits(out);
        if (static_cast<Eigen::Index>(gl.size()) != k) {
            throw ShapeMismatch("objective grad_logits has wrong length");
        }
        for (Eigen::Index i = 0; i < k; ++i) dz[i] += gl[i];
    }
    if (obj.grad_probs) {
        auto gp = obj.grad_probs(out);
        if (static_cast<Eigen::Index>(gp.size()) != k) {
            throw ShapeMismatch("objective grad_probs has wrong length");
        }
        // softmax VJP: dz = p .* (gp - <gp, p>)
        Eigen::Map<const VectorXd> g(gp.data(), k);
        Eigen::Map<const VectorXd> p(out.probs.data(), k);
        const double dot = g.dot(p);
        dz.array() += p.array() * (g.array() - dot);
    }
    return dz;
}

// ---------------------------------------------------------------- FCN

struct FcnTape {
    std::vector<VectorXd> h; // h[0] = flattened input, h[l] = relu(a[l-1])
    std::vector<VectorXd> a; // preactivations
    VectorXd logits;
};

FcnTape fcn_forward(const detail::FcnParams& p, const MatrixXd& x) {
    FcnTape tape;
    tape.h.push_back(flatten_timestep_major(x));
    for (std::size_t l = 0; l < p.W.size(); ++l) {
        VectorXd a = p.W[l] * tape.h.back() + p.b[l];
        tape.a.push_back(a);
        tape.h.push_back(a.cwiseMax(0.0));
    }
    tape.logits = p.Wout * tape.h.back() + p.bout;
    return tape;
}

void fcn_backward(const detail::FcnParams& p, const FcnTape& tape, const VectorXd& dlogits,
                  MatrixXd* dx, detail::FcnParams* grads) {
    if (grads) {
        grads->Wout += dlogits * tape.h.back().transpose();
        grads->bout += dlogits;
    }
    VectorXd dh = p.Wout.transpose() * dlogits;
    for (std::size_t l = p.W.size(); l-- > 0;) {
        VectorXd da = (tape.a[l].array() > 0.0).select(dh, VectorXd::Zero(dh.size()));
        if (grads) {
            grads->W[l] += da * tape.h[l].transpose();
            grads->b[l] += da;
        }
        dh = p.W[l].transpose() * da;
    }
    if (dx) unflatten_timestep_major(dh, *dx);
}

// ---------------------------------------------------------------- LSTM

struct LstmStep {
    VectorXd in, i, f, g, o, c, tanh_c, h;
};

struct LstmTape {
    std::vector<std::vector<LstmStep>> layers; // [layer][step]
    VectorXd logits;
};

LstmTape lstm_forward(const detail::LstmParams& p, const MatrixXd& x) {
    const auto t = x.rows();
    const auto hdim = p.Wout.cols();
    LstmTape tape;
    tape.layers.resize(p.layers.size());

    for (std::size_t l = 0; l < p.layers.size(); ++l) {
        const auto& lay = p.layers[l];
        auto& steps = tape.layers[l];
        steps.resize(static_cast<std::size_t>(t));
        VectorXd h = VectorXd::Zero(hdim);
        VectorXd c = VectorXd::Zero(hdim);
        for (Eigen::Index s = 0; s < t; ++s) {
            auto& st = steps[static_cast<std::size_t>(s)];
            st.in = l == 0 ? VectorXd(x.row(s).transpose())
                           : tape.layers[l - 1][static_cast<std::size_t>(s)].h;
            VectorXd z = lay.Wx * st.in + lay.Wh * h + lay.b;
            st.i = (1.0 / (1.0 + (-z.segment(0, hdim).array()).exp())).matrix();
            st.f = (1.0 / (1.0 + (-z.segment(hdim, hdim).array()).exp())).matrix();
            st.g = z.segment(2 * hdim, hdim).array().tanh().matrix();
            st.o = (1.0 / (1.0 + (-z.segment(3 * hdim, hdim).array()).exp())).matrix();
            st.c = st.f.cwiseProduct(c) + st.i.cwiseProduct(st.g);
            st.tanh_c = st.c.array().tanh().matrix();
            st.h = st.o.cwiseProduct(st.tanh_c);
            h = st.h;
            c = st.c;
        }
    }
    tape.logits = p.Wout * tape.layers.back().back().h + p.bout;
    return tape;
}

void lstm_backward(const detail::LstmParams& p, const LstmTape& tape, const VectorXd& dlogits,
                   MatrixXd* dx, detail::LstmParams* grads) {
    const auto t = static_cast<Eigen::Index>(tape.layers[0].size());
    const auto hdim = p.Wout.cols();

    if (grads) {
        grads->Wout += dlogits * tape.layers.back().back().h.transpose();
        grads->bout += dlogits;
    }

    // dh arriving at each (layer, step) from above; the head feeds only the
    // top layer's final step
    std::vector<std::vector<VectorXd>> dh_in(p.layers.size());
    for (auto& v : dh_in) v.assign(static_cast<std::size_t>(t), VectorXd::Zero(hdim));
    dh_in.back().back() = p.Wout.transpose() * dlogits;

    for (std::size_t l = p.layers.size(); l-- > 0;) {
        const auto& lay = p.layers[l];
        const auto& steps = tape.layers[l];
        VectorXd dh_next = VectorXd::Zero(hdim); // via Wh from step s+1
        VectorXd dc = VectorXd::Zero(hdim);
        for (Eigen::Index s = t - 1; s >= 0; --s) {
            const auto& st = steps[static_cast<std::size_t>(s)];
            VectorXd dh = dh_in[l][static_cast<std::size_t>(s)] + dh_next;
            dc += dh.cwiseProduct(st.o)
                      .cwiseProduct((1.0 - st.tanh_c.array().square()).matrix());
            VectorXd dzo = dh.cwiseProduct(st.tanh_c)
                               .cwiseProduct(st.o.cwiseProduct((1.0 - st.o.array()).matrix()));
            VectorXd dzi = dc.cwiseProduct(st.g).cwiseProduct(
                st.i.cwiseProduct((1.0 - st.i.array()).matrix()));
            VectorXd dzg =
                dc.cwiseProduct(st.i).cwiseProduct((1.0 - st.g.array().square()).matrix());
            const VectorXd c_prev =
                s == 0 ? VectorXd(VectorXd::Zero(hdim)) : steps[static_cast<std::size_t>(s - 1)].c;
            VectorXd dzf = dc.cwiseProduct(c_prev).cwiseProduct(
                st.f.cwiseProduct((1.0 - st.f.array()).matrix()));

            VectorXd dz(4 * hdim);
            dz << dzi, dzf, dzg, dzo;

            if (grads) {
                auto& glay = grads->layers[l];
                glay.Wx += dz * st.in.transpose();
                if (s > 0) glay.Wh += dz * steps[static_cast<std::size_t>(s - 1)].h.transpose();
                glay.b += dz;
            }
            VectorXd din = lay.Wx.transpose() * dz;
            if (l == 0) {
                if (dx) dx->row(s) += din.transpose();
            } else {
                dh_in[l - 1][static_cast<std::size_t>(s)] += din;
            }
            dh_next = lay.Wh.transpose() * dz;
            dc = dc.cwiseProduct(st.f);
        }
    }
}

// ---------------------------------------------------------------- Transformer

struct LnCache {
    MatrixXd xhat;     // normalized rows
    VectorXd inv_std;  // per row
};

MatrixXd layer_norm(const MatrixXd& x, const VectorXd& g, const VectorXd& b, LnCache& cache) {
    const auto n = x.cols();
    MatrixXd y(x.rows(), n);
    cache.xhat.resize(x.rows(), n);
    cache.inv_std.resize(x.rows());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double mu = x.row(r).mean();
        const double var = (x.row(r).array() - mu).square().mean();
        const double inv = 1.0 / std::sqrt(var + kLnEps);
        cache.inv_std[r] = inv;
        cache.xhat.row(r) = (x.row(r).array() - mu) * inv;
        y.row(r) = cache.xhat.row(r).array() * g.transpose().array() + b.transpose().array();
    }
    return y;
}

MatrixXd layer_norm_backward(const MatrixXd& dy, const VectorXd& g, const LnCache& cache,
                             VectorXd* dg, VectorXd* db) {
    const auto n = dy.cols();
    MatrixXd dxm(dy.rows(), n);
    for (Eigen::Index r = 0; r < dy.rows(); ++r) {
        Eigen::RowVectorXd gd = dy.row(r).array() * g.transpose().array();
        const double m1 = gd.mean();
        const double m2 = (gd.array() * cache.xhat.row(r).array()).mean();
        dxm.row(r) =
            (gd.array() - m1 - cache.xhat.row(r).array() * m2) * cache.inv_std[r];
        if (dg) *dg += (dy.row(r).array() * cache.xhat.row(r).array()).matrix().transpose();
        if (db) *db += dy.row(r).transpose();
    }
    return dxm;
}

struct BlockTape {
    MatrixXd x;                  // block input
    MatrixXd q, k, v;            // t x H
    std::vector<MatrixXd> attn;  // per head, t x t softmax rows
    MatrixXd concat;             // t x H
    MatrixXd attn_out;
    LnCache ln1;
    MatrixXd x1;                 // after LN1
    MatrixXd u1;                 // FFN preactivation, t x F
    MatrixXd f1;                 // gelu(u1)
    LnCache ln2;
    MatrixXd x2;                 // block output
};

struct TransformerTape {
    MatrixXd embedded; // t x H, with positional encoding added
    std::vector<BlockTape> blocks;
    VectorXd pooled;
    VectorXd logits;
};

TransformerTape transformer_forward(const detail::TransformerParams& p, const MatrixXd& x,
                                    int num_heads) {
    const auto t = x.rows();
    const auto h = p.We.rows();
    const auto dk = h / num_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    TransformerTape tape;
    tape.embedded = x * p.We.transpose();
    tape.embedded.rowwise() += p.be.transpose();
    for (Eigen::Index s = 0; s < t; ++s) {
        tape.embedded.row(s) += positional_encoding(static_cast<int>(s), static_cast<int>(h))
                                    .transpose();
    }

    MatrixXd cur = tape.embedded;
    tape.blocks.resize(p.blocks.size());
    for (std::size_t bi = 0; bi < p.blocks.size(); ++bi) {
        const auto& blk = p.blocks[bi];
        auto& bt = tape.blocks[bi];
        bt.x = cur;
        bt.q = cur * blk.Wq.transpose();
        bt.q.rowwise() += blk.bq.transpose();
        bt.k = cur * blk.Wk.transpose();
        bt.k.rowwise() += blk.bk.transpose();
        bt.v = cur * blk.Wv.transpose();
        bt.v.rowwise() += blk.bv.transpose();

        bt.concat.resize(t, h);
        bt.attn.resize(static_cast<std::size_t>(num_heads));
        for (int a = 0; a < num_heads; ++a) {
            auto qa = bt.q.middleCols(a * dk, dk);
            auto ka = bt.k.middleCols(a * dk, dk);
            auto va = bt.v.middleCols(a * dk, dk);
            MatrixXd scores = qa * ka.transpose() * scale;
            MatrixXd& attn = bt.attn[static_cast<std::size_t>(a)];
            attn.resize(t, t);
            for (Eigen::Index r = 0; r < t; ++r) {
                const double mx = scores.row(r).maxCoeff();
                Eigen::RowVectorXd e = (scores.row(r).array() - mx).exp();
                attn.row(r) = e / e.sum();
            }
            bt.concat.middleCols(a * dk, dk) = attn * va;
        }
        bt.attn_out = bt.concat * blk.Wo.transpose();
        bt.attn_out.rowwise() += blk.bo.transpose();

        bt.x1 = layer_norm(bt.x + bt.attn_out, blk.ln1_g, blk.ln1_b, bt.ln1);

        bt.u1 = bt.x1 * blk.Wf1.transpose();
        bt.u1.rowwise() += blk.bf1.transpose();
        bt.f1 = bt.u1.unaryExpr([](double u) { return gelu(u); });
        MatrixXd f2 = bt.f1 * blk.Wf2.transpose();
        f2.rowwise() += blk.bf2.transpose();

        bt.x2 = layer_norm(bt.x1 + f2, blk.ln2_g, blk.ln2_b, bt.ln2);
        cur = bt.x2;
    }

    tape.pooled = cur.colwise().mean().transpose();
    tape.logits = p.Wout * tape.pooled + p.bout;
    return tape;
}

void transformer_backward(const detail::TransformerParams& p, const TransformerTape& tape,
                          const MatrixXd& x, const VectorXd& dlogits, int num_heads,
                          MatrixXd* dx, detail::TransformerParams* grads) {
    const auto t = tape.embedded.rows();
    const auto h = p.We.rows();
    const auto dk = h / num_heads;
    const double scale = 1.0 / std::sqrt(static_cast<double>(dk));

    if (grads) {
        grads->Wout += dlogits * tape.pooled.transpose();
        grads->bout += dlogits;
    }
    VectorXd dpooled = p.Wout.transpose() * dlogits;
    MatrixXd dcur = MatrixXd::Zero(t, h);
    dcur.rowwise() += (dpooled / static_cast<double>(t)).transpose();

    for (std::size_t bi = p.blocks.size(); bi-- > 0;) {
        const auto& blk = p.blocks[bi];
        const auto& bt = tape.blocks[bi];
        auto* gblk = grads ? &grads->blocks[bi] : nullptr;

        MatrixXd dr2 = layer_norm_backward(dcur, blk.ln2_g, bt.ln2, gblk ? &gblk->ln2_g : nullptr,
                                           gblk ? &gblk->ln2_b : nullptr);
        MatrixXd dx1 = dr2;
        const MatrixXd& df2 = dr2;
        if (gblk) {
            gblk->Wf2 += df2.transpose() * bt.f1;
            gblk->bf2 += df2.colwise().sum().transpose();
        }
        MatrixXd df1 = df2 * blk.Wf2;
        MatrixXd du1 = df1.cwiseProduct(bt.u1.unaryExpr([](double u) { return gelu_grad(u); }));
        if (gblk) {
            gblk->Wf1 += du1.transpose() * bt.x1;
            gblk->bf1 += du1.colwise().sum().transpose();
        }
        dx1 += du1 * blk.Wf1;

        MatrixXd dr1 = layer_norm_backward(dx1, blk.ln1_g, bt.ln1, gblk ? &gblk->ln1_g : nullptr,
                                           gblk ? &gblk->ln1_b : nullptr);
        MatrixXd dxin = dr1;
        const MatrixXd& dattn_out = dr1;
        if (gblk) {
            gblk->Wo += dattn_out.transpose() * bt.concat;
            gblk->bo += dattn_out.colwise().sum().transpose();
        }
        MatrixXd dconcat = dattn_out * blk.Wo;

        MatrixXd dq = MatrixXd::Zero(t, h), dkm = MatrixXd::Zero(t, h),
                 dv = MatrixXd::Zero(t, h);
        for (int a = 0; a < num_heads; ++a) {
            auto qa = bt.q.middleCols(a * dk, dk);
            auto ka = bt.k.middleCols(a * dk, dk);
            auto va = bt.v.middleCols(a * dk, dk);
            const MatrixXd& attn = bt.attn[static_cast<std::size_t>(a)];
            MatrixXd doa = dconcat.middleCols(a * dk, dk);
            MatrixXd dattn = doa * va.transpose();
            dv.middleCols(a * dk, dk) = attn.transpose() * doa;
            // row-softmax VJP
            MatrixXd dscores(t, t);
            for (Eigen::Index r = 0; r < t; ++r) {
                const double dot = dattn.row(r).dot(attn.row(r));
                dscores.row(r) = attn.row(r).array() * (dattn.row(r).array() - dot);
            }
            dq.middleCols(a * dk, dk) = dscores * ka * scale;
            dkm.middleCols(a * dk, dk) = dscores.transpose() * qa * scale;
        }
        if (gblk) {
            gblk->Wq += dq.transpose() * bt.x;
            gblk->bq += dq.colwise().sum().transpose();
            gblk->Wk += dkm.transpose() * bt.x;
            gblk->bk += dkm.colwise().sum().transpose();
            gblk->Wv += dv.transpose() * bt.x;
            gblk->bv += dv.colwise().sum().transpose();
        }
        dxin += dq * blk.Wq + dkm * blk.Wk + dv * blk.Wv;
        dcur = dxin;
    }

    // embedding: E = x We^T + be + PE (PE constant)
    if (grads) {
        grads->We += dcur.transpose() * x;
        grads->be += dcur.colwise().sum().transpose();
    }
    if (dx) *dx += dcur * p.We;
}

// ---------------------------------------------------------------- init

detail::Params init_params(const ModelSpec& spec) {
    RngFiller rng(spec.seed);
    const int h = spec.hidden_size;
    const int c = spec.input_channels;
    const int t = spec.input_length;
    const int k = spec.num_classes;

    switch (spec.arch) {
    case Arch::FCN: {
        detail::FcnParams p;
        const int d = t * c;
        int in = d;
        for (int l = 0; l < spec.num_layers; ++l) {
            const double a = 1.0 / std::sqrt(static_cast<double>(in));
            p.W.emplace_back(h, in);
            p.b.emplace_back(h);
            rng.fill(p.W.back(), a);
            rng.fill(p.b.back(), a);
            in = h;
        }
        const double a = 1.0 / std::sqrt(static_cast<double>(in));
        p.Wout.resize(k, in);
        p.bout.resize(k);
        rng.fill(p.Wout, a);
        rng.fill(p.bout, a);
        return p;
    }
    case Arch::LSTM: {
        detail::LstmParams p;
        const double a = 1.0 / std::sqrt(static_cast<double>(h));
        int in = c;
        for (int l = 0; l < spec.num_layers; ++l) {
            detail::LstmParams::Layer lay;
            lay.Wx.resize(4 * h, in);
            lay.Wh.resize(4 * h, h);
            lay.b.resize(4 * h);
            rng.fill(lay.Wx, a);
            rng.fill(lay.Wh, a);
            rng.fill(lay.b, a);
            p.layers.push_back(std::move(lay));
            in = h;
        }
        p.Wout.resize(k, h);
        p.bout.resize(k);
        rng.fill(p.Wout, a);
        rng.fill(p.bout, a);
        return p;
    }
    case Arch::TransformerEncoder: {
        detail::TransformerParams p;
        const int f = kFfnMult * h;
        const double ac = 1.0 / std::sqrt(static_cast<double>(c));
        const double ah = 1.0 / std::sqrt(static_cast<double>(h));
        const double af = 1.0 / std::sqrt(static_cast<double>(f));
        p.We.resize(h, c);
        p.be.resize(h);
        rng.fill(p.We, ac);
        rng.fill(p.be, ac);
        for (int l = 0; l < spec.num_layers; ++l) {
            detail::TransformerParams::Block blk;
            for (auto* m : {&blk.Wq, &blk.Wk, &blk.Wv, &blk.Wo}) {
                m->resize(h, h);
                rng.fill(*m, ah);
            }
            for (auto* v : {&blk.bq, &blk.bk, &blk.bv, &blk.bo}) {
                v->resize(h);
                rng.fill(*v, ah);
            }
            blk.ln1_g = VectorXd::Ones(h);
            blk.ln1_b = VectorXd::Zero(h);
            blk.Wf1.resize(f, h);
            blk.bf1.resize(f);
            rng.fill(blk.Wf1, ah);
            rng.fill(blk.bf1, ah);
            blk.Wf2.resize(h, f);
            blk.bf2.resize(h);
            rng.fill(blk.Wf2, af);
            rng.fill(blk.bf2, af);
            blk.ln2_g = VectorXd::Ones(h);
            blk.ln2_b = VectorXd::Zero(h);
            p.blocks.push_back(std::move(blk));
        }
        p.Wout.resize(k, h);
        p.bout.resize(k);
        rng.fill(p.Wout, ah);
        rng.fill(p.bout, ah);
        return p;
    }
    }
    throw InvalidConfig("unknown architecture");
}

template <class P> P zero_like(const P& p) {
    P z = p;
    P::visit(z, [](const std::string&, auto& m) { m.setZero(); });
    return z;
}

template <class P> void add_flat(const P& grads, std::vector<double>* out) {
    std::size_t off = 0;
    P::visit(grads, [&](const std::string&, const auto& m) {
        for (Eigen::Index i = 0; i < m.size(); ++i) out->at(off + static_cast<std::size_t>(i)) += m.data()[i];
        off += static_cast<std::size_t>(m.size());
    });
    if (off != out->size()) throw ShapeMismatch("parameter gradient buffer has wrong length");
}

} // namespace

std::string_view arch_name(Arch a) {
    switch (a) {
    case Arch::FCN: return "fcn";
    case Arch::LSTM: return "lstm";
    case Arch::TransformerEncoder: return "transformer";
    }
    return "?";
}

std::optional<Arch> arch_from_name(std::string_view name) {
    if (name == "fcn") return Arch::FCN;
    if (name == "lstm") return Arch::LSTM;
    if (name == "transformer") return Arch::TransformerEncoder;
    return std::nullopt;
}

void validate_spec(const ModelSpec& spec) {
    if (spec.hidden_size < 1) throw InvalidConfig("hidden_size must be >= 1");
    if (spec.num_layers < 0 || (spec.arch != Arch::FCN && spec.num_layers < 1)) {
        throw InvalidConfig("num_layers must be >= 1 (FCN also allows 0 for an affine model)");
    }
    if (spec.arch == Arch::TransformerEncoder) {
        if (spec.num_heads < 1 || spec.hidden_size % spec.num_heads != 0) {
            throw InvalidConfig("num_heads must be >= 1 and divide hidden_size");
        }
    }
    if (spec.input_length < 1 || spec.input_channels < 1) {
        throw InvalidConfig("input_length and input_channels must be >= 1");
    }
    if (spec.num_classes < 2) throw InvalidConfig("num_classes must be >= 2");
}

OutputObjective cross_entropy_objective(int label) {
    OutputObjective obj;
    obj.value = [label](const ModelOutput& out) {
        Eigen::Map<const VectorXd> z(out.logits.data(),
                                     static_cast<Eigen::Index>(out.logits.size()));
        return log_sum_exp(z) - z[label];
    };
    obj.grad_logits = [label](const ModelOutput& out) {
        std::vector<double> g = out.probs;
        g[static_cast<std::size_t>(label)] -= 1.0;
        return g;
    };
    return obj;
}

Model Model::init(const ModelSpec& spec) {
    validate_spec(spec);
    return Model(spec, init_params(spec));
}

Model Model::from_parameters(const ModelSpec& spec, std::span<const double> flat) {
    Model m = init(spec);
    m.set_parameters(flat);
    return m;
}

void Model::set_input_scaling(const Eigen::VectorXd& shift, const Eigen::VectorXd& scale) {
    if (shift.size() != spec_.input_channels || scale.size() != spec_.input_channels) {
        throw InvalidConfig("input scaling needs one shift/scale pair per channel");
    }
    for (Eigen::Index c = 0; c < scale.size(); ++c) {
        if (!std::isfinite(shift[c]) || !std::isfinite(scale[c]) || scale[c] <= 0.0) {
            throw InvalidConfig("input scaling entries must be finite with scale > 0");
        }
    }
    in_shift_ = shift;
    in_scale_ = scale;
}

Eigen::MatrixXd Model::scaled_input(const Eigen::MatrixXd& x) const {
    Eigen::MatrixXd xs(x.rows(), x.cols());
    for (Eigen::Index c = 0; c < x.cols(); ++c) {
        xs.col(c) = (x.col(c).array() - in_shift_[c]) / in_scale_[c];
    }
    return xs;
}

ModelOutput Model::forward(const Eigen::MatrixXd& x) const {
    if (x.rows() != spec_.input_length || x.cols() != spec_.input_channels) {
        throw ShapeMismatch("input is " + std::to_string(x.rows()) + "x" +
                            std::to_string(x.cols()) + ", model expects " +
                            std::to_string(spec_.input_length) + "x" +
                            std::to_string(spec_.input_channels));
    }
    const Eigen::MatrixXd xs = scaled_input(x);
    if (const auto* p = std::get_if<detail::FcnParams>(&params_)) {
        return make_output(fcn_forward(*p, xs).logits);
    }
    if (const auto* p = std::get_if<detail::LstmParams>(&params_)) {
        return make_output(lstm_forward(*p, xs).logits);
    }
    const auto& p = std::get<detail::TransformerParams>(params_);
    return make_output(transformer_forward(p, xs, spec_.num_heads).logits);
}

double Model::objective_backward(const Eigen::MatrixXd& x, const OutputObjective& obj,
                                 Eigen::MatrixXd* input_grad,
                                 std::vector<double>* param_grad) const {
    if (x.rows() != spec_.input_length || x.cols() != spec_.input_channels) {
        throw ShapeMismatch("input shape does not match model spec");
    }
    if (!obj.value) throw InvalidConfig("objective has no value function");
    if (input_grad) input_grad->setZero(x.rows(), x.cols());
    const Eigen::MatrixXd xs = scaled_input(x);

    const auto unscale_grad = [&] {
        if (!input_grad) return;
        for (Eigen::Index c = 0; c < input_grad->cols(); ++c) {
            input_grad->col(c) /= in_scale_[c];
        }
    };

    if (const auto* p = std::get_if<detail::FcnParams>(&params_)) {
        auto tape = fcn_forward(*p, xs);
        auto out = make_output(tape.logits);
        VectorXd dlogits = dlogits_from_objective(out, obj);
        if (input_grad || param_grad) {
            auto grads = zero_like(*p);
            fcn_backward(*p, tape, dlogits, input_grad, param_grad ? &grads : nullptr);
            if (param_grad) add_flat(grads, param_grad);
            unscale_grad();
        }
        return obj.value(out);
    }
    if (const auto* p = std::get_if<detail::LstmParams>(&params_)) {
        auto tape = lstm_forward(*p, xs);
        auto out = make_output(tape.logits);
        VectorXd dlogits = dlogits_from_objective(out, obj);
        if (input_grad || param_grad) {
            auto grads = zero_like(*p);
            lstm_backward(*p, tape, dlogits, input_grad, param_grad ? &grads : nullptr);
            if (param_grad) add_flat(grads, param_grad);
            unscale_grad();
        }
        return obj.value(out);
    }
    const auto& p = std::get<detail::TransformerParams>(params_);
    auto tape = transformer_forward(p, xs, spec_.num_heads);
    auto out = make_output(tape.logits);
    VectorXd dlogits = dlogits_from_objective(out, obj);
    if (input_grad || param_grad) {
        auto grads = zero_like(p);
        transformer_backward(p, tape, xs, dlogits, spec_.num_heads, input_grad,
                             param_grad ? &grads : nullptr);
        if (param_grad) add_flat(grads, param_grad);
        unscale_grad();
    }
    return obj.value(out);
}

double Model::min_relu_margin(const Eigen::MatrixXd& x) const {
    if (const auto* p = std::get_if<detail::FcnParams>(&params_)) {
        auto tape = fcn_forward(*p, scaled_input(x));
        double margin = std::numeric_limits<double>::infinity();
        for (const auto& a : tape.a) {
            if (a.size() > 0) margin = std::min(margin, a.cwiseAbs().minCoeff());
        }
        return margin;
    }
    return std::numeric_limits<double>::infinity();
}

std::size_t Model::parameter_count() const {
    std::size_t n = 0;
    visit_tensors([&](const std::string&, const auto& m) {
        n += static_cast<std::size_t>(m.size());
    });
    return n;
}

std::vector<double> Model::parameters() const {
    std::vector<double> flat;
    flat.reserve(parameter_count());
    visit_tensors([&](const std::string&, const auto& m) {
        flat.insert(flat.end(), m.data(), m.data() + m.size());
    });
    return flat;
}

void Model::set_parameters(std::span<const double> flat) {
    if (flat.size() != parameter_count()) {
        throw ShapeMismatch("parameter vector has length " + std::to_string(flat.size()) +
                            ", model has " + std::to_string(parameter_count()));
    }
    std::size_t off = 0;
    std::visit(
        [&](auto& p) {
            std::decay_t<decltype(p)>::visit(p, [&](const std::string&, auto& m) {
                for (Eigen::Index i = 0; i < m.size(); ++i) {
                    m.data()[i] = flat[off + static_cast<std::size_t>(i)];
                }
                off += static_cast<std::size_t>(m.size());
            });
        },
        params_);
}

Eigen::MatrixXd window_to_matrix(const core::MultimodalWindow& w) {
    const auto mods = w.modalities();
    const auto t = static_cast<Eigen::Index>(w.length());
    Eigen::MatrixXd x(t, static_cast<Eigen::Index>(mods.size()));
    for (std::size_t c = 0; c < mods.size(); ++c) {
        const auto& s = w.channels.at(mods[c]);
        for (Eigen::Index i = 0; i < t; ++i) x(i, static_cast<Eigen::Index>(c)) = s[static_cast<std::size_t>(i)];
    }
    return x;
}

decomp::WindowGrad matrix_to_window_grad(const Eigen::MatrixXd& g,
                                         const std::vector<core::Modality>& order) {
    if (g.cols() != static_cast<Eigen::Index>(order.size())) {
        throw ShapeMismatch("gradient matrix has " + std::to_string(g.cols()) +
                            " columns for " + std::to_string(order.size()) + " modalities");
    }
    decomp::WindowGrad out;
    for (std::size_t c = 0; c < order.size(); ++c) {
        core::Samples s(static_cast<std::size_t>(g.rows()));
        for (Eigen::Index i = 0; i < g.rows(); ++i) s[static_cast<std::size_t>(i)] = g(i, static_cast<Eigen::Index>(c));
        out[order[c]] = std::move(s);
    }
    return out;
}

ModelOutput forward(const Model& model, const core::MultimodalWindow& window) {
    return model.forward(window_to_matrix(window));
}

decomp::WindowGrad input_gradient(const Model& model, const core::MultimodalWindow& window,
                                  const OutputObjective& objective) {
    Eigen::MatrixXd g;
    model.objective_backward(window_to_matrix(window), objective, &g, nullptr);
    return matrix_to_window_grad(g, window.modalities());
}

} // namespace iic::nn
