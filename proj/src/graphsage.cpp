#include "v2x/graphsage.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "v2x/errors.hpp"

namespace v2x::sage {

SageNet SageNet::make(std::size_t feature_dim, std::size_t embed_dim, Rng& rng) {
    auto dense = [&rng](std::size_t in, std::size_t out) {
        return nn::make_dense(in, out, nn::Activation::relu, rng);
    };
    SageNet net;
    auto l1a = dense(feature_dim, feature_dim);
    auto l1u = dense(feature_dim, feature_dim);
    auto l2a = dense(feature_dim, feature_dim);
    auto l2u = dense(feature_dim, embed_dim);
    net.layer1 = SageLayer{std::move(l1a.w), std::move(l1a.b), std::move(l1u.w), std::move(l1u.b),
                           nn::Activation::relu, nn::Activation::relu};
    net.layer2 = SageLayer{std::move(l2a.w), std::move(l2a.b), std::move(l2u.w), std::move(l2u.b),
                           nn::Activation::relu, nn::Activation::identity};
    return net;
}

Vec aggregate(const SageLayer& layer, std::span<const Vec* const> neighbor_features,
              std::span<const double> edge_weights) {
    if (neighbor_features.empty()) throw StructuralError("aggregate: empty sample");
    if (neighbor_features.size() != edge_weights.size())
        throw StructuralError("aggregate: weights do not match samples");
    const std::size_t dim = layer.w_agg.cols;
    Vec mean(dim, 0.0);
    const double inv = 1.0 / static_cast<double>(neighbor_features.size());
    for (std::size_t k = 0; k < neighbor_features.size(); ++k) {
        const Vec& x = *neighbor_features[k];
        if (x.size() != dim) throw StructuralError("aggregate: feature size mismatch");
        axpy(edge_weights[k] * inv, x, mean);
    }
    Vec z(layer.w_agg.rows, 0.0);
    matvec(layer.w_agg, mean, z);
    for (std::size_t i = 0; i < z.size(); ++i) z[i] = nn::activate(layer.agg_act, z[i] + layer.b_agg[i]);
    return z;
}

Vec update(const SageLayer& layer, std::span<const double> z, std::span<const double> x) {
    if (z.size() != x.size()) throw StructuralError("update: z and x differ in size");
    Vec combined(z.size());
    for (std::size_t i = 0; i < z.size(); ++i) combined[i] = z[i] + x[i];
    Vec h(layer.w_upd.rows, 0.0);
    matvec(layer.w_upd, combined, h);
    for (std::size_t i = 0; i < h.size(); ++i) h[i] = nn::activate(layer.upd_act, h[i] + layer.b_upd[i]);
    return h;
}

namespace {

LayerNodeCache layer_forward(const SageLayer& layer, const std::vector<const Vec*>& feats,
                             const std::vector<double>& weights, const Vec& own) {
    LayerNodeCache c;
    const std::size_t dim = layer.w_agg.cols;
    c.mean.assign(dim, 0.0);
    const double inv = 1.0 / static_cast<double>(feats.size());
    for (std::size_t k = 0; k < feats.size(); ++k) axpy(weights[k] * inv, *feats[k], c.mean);
    c.pre_agg.assign(layer.w_agg.rows, 0.0);
    matvec(layer.w_agg, c.mean, c.pre_agg);
    for (std::size_t i = 0; i < c.pre_agg.size(); ++i) c.pre_agg[i] += layer.b_agg[i];
    c.z.resize(c.pre_agg.size());
    for (std::size_t i = 0; i < c.z.size(); ++i) c.z[i] = nn::activate(layer.agg_act, c.pre_agg[i]);
    c.combined.resize(c.z.size());
    for (std::size_t i = 0; i < c.z.size(); ++i) c.combined[i] = c.z[i] + own[i];
    c.pre_upd.assign(layer.w_upd.rows, 0.0);
    matvec(layer.w_upd, c.combined, c.pre_upd);
    for (std::size_t i = 0; i < c.pre_upd.size(); ++i) c.pre_upd[i] += layer.b_upd[i];
    c.h.resize(c.pre_upd.size());
    for (std::size_t i = 0; i < c.h.size(); ++i) c.h[i] = nn::activate(layer.upd_act, c.pre_upd[i]);
    return c;
}

// Backward through one layer for seed dL/dh. Returns dL/dmean (for neighbor
// features) and dL/down via out parameters; accumulates parameter grads.
void layer_backward(const SageLayer& layer, const LayerNodeCache& c, std::span<const double> dh,
                    Matrix& dw_agg, Vec& db_agg, Matrix& dw_upd, Vec& db_upd, Vec& dmean, Vec& dcombined) {
    Vec dpre_upd(dh.size());
    for (std::size_t i = 0; i < dh.size(); ++i)
        dpre_upd[i] = dh[i] * nn::activate_grad(layer.upd_act, c.pre_upd[i]);
    outer_accumulate(dpre_upd, c.combined, dw_upd);
    axpy(1.0, dpre_upd, db_upd);
    dcombined.assign(layer.w_upd.cols, 0.0);
    matvec_transposed(layer.w_upd, dpre_upd, dcombined);

    Vec dpre_agg(c.pre_agg.size());
    for (std::size_t i = 0; i < dpre_agg.size(); ++i)
        dpre_agg[i] = dcombined[i] * nn::activate_grad(layer.agg_act, c.pre_agg[i]);
    outer_accumulate(dpre_agg, c.mean, dw_agg);
    axpy(1.0, dpre_agg, db_agg);
    dmean.assign(layer.w_agg.cols, 0.0);
    matvec_transposed(layer.w_agg, dpre_agg, dmean);
}

}  // namespace

EmbedCache embed_cached(const SageNet& net, const GraphTopology& topo,
                        const SampledNeighborhood& samples, std::span<const Vec> features) {
    if (samples.second.size() != samples.first.size())
        throw StructuralError("embed_cached: samples must cover two layers");
    EmbedCache cache;
    cache.samples = samples;
    cache.inner.reserve(samples.first.size());

    for (std::size_t k = 0; k < samples.first.size(); ++k) {
        const int u = samples.first[k];
        std::vector<const Vec*> feats;
        std::vector<double> weights;
        feats.reserve(samples.second[k].size());
        for (int n : samples.second[k]) {
            feats.push_back(&features[n]);
            weights.push_back(topo.edge_weight(n, u));
        }
        cache.inner.push_back(layer_forward(net.layer1, feats, weights, features[u]));
    }

    std::vector<const Vec*> inner_h;
    std::vector<double> weights;
    inner_h.reserve(samples.first.size());
    for (std::size_t k = 0; k < samples.first.size(); ++k) {
        inner_h.push_back(&cache.inner[k].h);
        weights.push_back(topo.edge_weight(samples.first[k], samples.root));
    }
    cache.outer = layer_forward(net.layer2, inner_h, weights, features[samples.root]);
    return cache;
}

Vec embed_node(const SageNet& net, const GraphTopology& topo, int node,
               std::span<const Vec> features, int fanout, Rng& rng) {
    auto samples = sample_neighborhood(topo, node, 2, fanout, rng);
    return embed_cached(net, topo, samples, features).embedding();
}

SageGradients SageGradients::zeros_like(const SageNet& net) {
    SageGradients g;
    g.dw_agg1 = Matrix(net.layer1.w_agg.rows, net.layer1.w_agg.cols);
    g.dw_upd1 = Matrix(net.layer1.w_upd.rows, net.layer1.w_upd.cols);
    g.dw_agg2 = Matrix(net.layer2.w_agg.rows, net.layer2.w_agg.cols);
    g.dw_upd2 = Matrix(net.layer2.w_upd.rows, net.layer2.w_upd.cols);
    g.db_agg1.assign(net.layer1.b_agg.size(), 0.0);
    g.db_upd1.assign(net.layer1.b_upd.size(), 0.0);
    g.db_agg2.assign(net.layer2.b_agg.size(), 0.0);
    g.db_upd2.assign(net.layer2.b_upd.size(), 0.0);
    return g;
}

void embed_backward(const SageNet& net, const GraphTopology& topo, const EmbedCache& cache,
                    std::span<const Vec> features, std::span<const double> embedding_grad,
                    SageGradients& acc) {
    (void)features;
    const auto& samples = cache.samples;
    Vec dmean_outer, dcombined_outer;
    layer_backward(net.layer2, cache.outer, embedding_grad, acc.dw_agg2, acc.db_agg2, acc.dw_upd2,
                   acc.db_upd2, dmean_outer, dcombined_outer);

    const double inv = 1.0 / static_cast<double>(samples.first.size());
    Vec dh_u(net.layer1.w_upd.rows);
    Vec dmean_inner, dcombined_inner;
    for (std::size_t k = 0; k < samples.first.size(); ++k) {
        const double scale = topo.edge_weight(samples.first[k], samples.root) * inv;
        for (std::size_t i = 0; i < dh_u.size(); ++i) dh_u[i] = dmean_outer[i] * scale;
        layer_backward(net.layer1, cache.inner[k], dh_u, acc.dw_agg1, acc.db_agg1, acc.dw_upd1,
                       acc.db_upd1, dmean_inner, dcombined_inner);
    }
}

void sgd_step(SageNet& net, const SageGradients& grads, const nn::LrSchedule& schedule, long step) {
    const double eta = schedule.rate(step);
    auto apply = [eta](Matrix& w, const Matrix& dw, Vec& b, const Vec& db) {
        for (std::size_t k = 0; k < w.a.size(); ++k) {
            if (!std::isfinite(dw.a[k])) throw NumericalError("sage sgd_step: non-finite gradient");
            w.a[k] -= eta * dw.a[k];
        }
        for (std::size_t k = 0; k < b.size(); ++k) {
            if (!std::isfinite(db[k])) throw NumericalError("sage sgd_step: non-finite gradient");
            b[k] -= eta * db[k];
        }
    };
    apply(net.layer1.w_agg, grads.dw_agg1, net.layer1.b_agg, grads.db_agg1);
    apply(net.layer1.w_upd, grads.dw_upd1, net.layer1.b_upd, grads.db_upd1);
    apply(net.layer2.w_agg, grads.dw_agg2, net.layer2.b_agg, grads.db_agg2);
    apply(net.layer2.w_upd, grads.dw_upd2, net.layer2.b_upd, grads.db_upd2);
}

void RewardMatrix::record(const LinkLabel& node, int subchannel, double reward, long iteration) {
    if (subchannel < 0 || subchannel >= m_) throw StructuralError("RewardMatrix::record: bad subchannel");
    auto [it, inserted] = rows_.try_emplace(node);
    if (inserted) {
        it->second.reward.assign(m_, 0.0);
        it->second.stamp.assign(m_, 0);
    }
    it->second.reward[subchannel] = reward;
    it->second.stamp[subchannel] = iteration;
}

const RewardMatrix::Row* RewardMatrix::find(const LinkLabel& node) const {
    auto it = rows_.find(node);
    return it == rows_.end() ? nullptr : &it->second;
}

void RewardMatrix::prune_absent(const GraphTopology& topo) {
    for (auto it = rows_.begin(); it != rows_.end();) {
        if (topo.node_index(it->first) < 0)
            it = rows_.erase(it);
        else
            ++it;
    }
}

Vec smoothed_labels(std::span<const double> h_old, std::span<const double> reward_row, double kappa) {
    if (kappa < 0.0 || kappa > 1.0) throw ConfigError("smoothed_labels: kappa must be in [0, 1]");
    if (h_old.size() != reward_row.size()) throw StructuralError("smoothed_labels: size mismatch");
    Vec y(h_old.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = kappa * h_old[i] + (1.0 - kappa) * reward_row[i];
    return y;
}

SageTrainer::SageTrainer(const SimConfig& cfg, Rng init_rng) : cfg_(cfg) {
    if (cfg.sage_kappa < 0.0 || cfg.sage_kappa > 1.0) throw ConfigError("sage_kappa must be in [0, 1]");
    live_ = SageNet::make(cfg.feature_dim(), cfg.embed_dim, init_rng);
    if (cfg.m != cfg.embed_dim) {
        head_ = nn::make_dense(cfg.embed_dim, cfg.m, nn::Activation::identity, init_rng);
        lagged_head_ = head_;
    }
    lagged_ = live_;
    schedule_ = nn::LrSchedule{cfg.sage_lr_initial, cfg.lr_floor, cfg.lr_decay, cfg.lr_decay_every};
}

Vec SageTrainer::project_labels(const SageNet& net, const std::optional<nn::DenseLayer>& head,
                                const Vec& h) const {
    (void)net;
    if (!head) return h;
    Vec out(head->w.rows, 0.0);
    matvec(head->w, h, out);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += head->b[i];
    return out;
}

double SageTrainer::train_step(const GraphTopology& topo, std::span<const Vec> features,
                               std::span<const int> batch, const RewardMatrix& rewards, long iteration,
                               Rng& sample_rng) {
    if (batch.empty()) return 0.0;
    auto grads = SageGradients::zeros_like(live_);
    nn::Gradients head_grads;
    if (head_) {
        head_grads.dw.emplace_back(head_->w.rows, head_->w.cols);
        head_grads.db.emplace_back(head_->b.size(), 0.0);
    }
    double loss = 0.0;
    const double inv_batch = 1.0 / static_cast<double>(batch.size());

    for (int node : batch) {
        const auto* row = rewards.find(topo.nodes.at(node));
        if (!row) throw StructuralError("sage train_step: batch node has no reward row");

        auto samples = sample_neighborhood(topo, node, 2, cfg_.sample_fanout, sample_rng);
        auto cache = embed_cached(live_, topo, samples, features);
        const Vec h_old = embed_cached(lagged_, topo, samples, features).embedding();
        const Vec pred = project_labels(live_, head_, cache.embedding());
        const Vec old_proj = project_labels(lagged_, lagged_head_, h_old);
        const Vec targets = smoothed_labels(old_proj, row->reward, cfg_.sage_kappa);

        Vec dpred(pred.size(), 0.0);
        for (std::size_t c = 0; c < pred.size(); ++c) {
            const bool fresh = iteration - row->stamp[c] <= cfg_.sage_stale_after;
            if (!fresh) continue;
            const double err = pred[c] - targets[c];
            loss += err * err;
            dpred[c] = 2.0 * err * inv_batch;
        }

        if (head_) {
            outer_accumulate(dpred, cache.embedding(), head_grads.dw[0]);
            axpy(1.0, dpred, head_grads.db[0]);
            Vec dh(head_->w.cols, 0.0);
            matvec_transposed(head_->w, dpred, dh);
            embed_backward(live_, topo, cache, features, dh, grads);
        } else {
            embed_backward(live_, topo, cache, features, dpred, grads);
        }
    }

    sgd_step(live_, grads, schedule_, updates_);
    if (head_) {
        const double eta = schedule_.rate(updates_);
        for (std::size_t k = 0; k < head_->w.a.size(); ++k) head_->w.a[k] -= eta * head_grads.dw[0].a[k];
        for (std::size_t k = 0; k < head_->b.size(); ++k) head_->b[k] -= eta * head_grads.db[0][k];
    }
    ++updates_;
    if (cfg_.sage_sync_period > 0 && updates_ % cfg_.sage_sync_period == 0) {
        lagged_ = live_;
        lagged_head_ = head_;
    }
    return loss * inv_batch;
}

namespace {

std::vector<nn::NamedArray> sage_to_arrays(const std::string& prefix, const SageNet& net) {
    auto layer_arrays = [&](const std::string& lp, const SageLayer& l) {
        std::vector<nn::NamedArray> out;
        out.push_back({lp + ".w_agg", {l.w_agg.rows, l.w_agg.cols}, l.w_agg.a});
        out.push_back({lp + ".b_agg", {l.b_agg.size()}, l.b_agg});
        out.push_back({lp + ".w_upd", {l.w_upd.rows, l.w_upd.cols}, l.w_upd.a});
        out.push_back({lp + ".b_upd", {l.b_upd.size()}, l.b_upd});
        out.push_back({lp + ".acts",
                       {2},
                       {l.agg_act == nn::Activation::relu ? 1.0 : 0.0,
                        l.upd_act == nn::Activation::relu ? 1.0 : 0.0}});
        return out;
    };
    std::vector<nn::NamedArray> arrays;
    for (auto& a : layer_arrays(prefix + ".layer1", net.layer1)) arrays.push_back(std::move(a));
    for (auto& a : layer_arrays(prefix + ".layer2", net.layer2)) arrays.push_back(std::move(a));
    return arrays;
}

SageNet sage_from_arrays(const std::string& prefix, const std::vector<nn::NamedArray>& arrays) {
    auto find = [&](const std::string& name) -> const nn::NamedArray& {
        for (const auto& arr : arrays)
            if (arr.name == name) return arr;
        throw MissingArtifactError("checkpoint missing array: " + name);
    };
    auto layer_from = [&](const std::string& lp) {
        SageLayer l;
        const auto& wa = find(lp + ".w_agg");
        l.w_agg = Matrix(wa.dims.at(0), wa.dims.at(1));
        l.w_agg.a = wa.data;
        l.b_agg = find(lp + ".b_agg").data;
        const auto& wu = find(lp + ".w_upd");
        l.w_upd = Matrix(wu.dims.at(0), wu.dims.at(1));
        l.w_upd.a = wu.data;
        l.b_upd = find(lp + ".b_upd").data;
        const auto& acts = find(lp + ".acts");
        l.agg_act = acts.data.at(0) != 0.0 ? nn::Activation::relu : nn::Activation::identity;
        l.upd_act = acts.data.at(1) != 0.0 ? nn::Activation::relu : nn::Activation::identity;
        return l;
    };
    SageNet net;
    net.layer1 = layer_from(prefix + ".layer1");
    net.layer2 = layer_from(prefix + ".layer2");
    return net;
}

}  // namespace

void SageTrainer::save(const std::string& dir, std::uint64_t seed) const {
    std::filesystem::create_directories(dir);
    for (auto [net, name] : {std::pair<const SageNet*, const char*>{&live_, "sage.live"},
                             {&lagged_, "sage.lagged"}}) {
        auto arrays = sage_to_arrays("sage", *net);
        arrays.push_back({"meta.seed", {1}, {static_cast<double>(seed)}});
        arrays.push_back({"meta.updates", {1}, {static_cast<double>(updates_)}});
        if (head_) {
            const auto& h = name == std::string("sage.live") ? *head_ : *lagged_head_;
            arrays.push_back({"head.w", {h.w.rows, h.w.cols}, h.w.a});
            arrays.push_back({"head.b", {h.b.size()}, h.b});
        }
        nn::save_arrays(dir + "/" + name, arrays);
    }
}

void SageTrainer::load(const std::string& dir) {
    auto live_arrays = nn::load_arrays(dir + "/sage.live");
    auto lagged_arrays = nn::load_arrays(dir + "/sage.lagged");
    live_ = sage_from_arrays("sage", live_arrays);
    lagged_ = sage_from_arrays("sage", lagged_arrays);
    auto maybe_head = [&](const std::vector<nn::NamedArray>& arrays) -> std::optional<nn::DenseLayer> {
        for (const auto& arr : arrays)
            if (arr.name == "head.w") {
                nn::DenseLayer head;
                head.w = Matrix(arr.dims.at(0), arr.dims.at(1));
                head.w.a = arr.data;
                for (const auto& b : arrays)
                    if (b.name == "head.b") head.b = b.data;
                head.act = nn::Activation::identity;
                return head;
            }
        return std::nullopt;
    };
    head_ = maybe_head(live_arrays);
    lagged_head_ = maybe_head(lagged_arrays);
    for (const auto& arr : live_arrays)
        if (arr.name == "meta.updates") updates_ = static_cast<long>(arr.data.at(0));
}

ComplexityProbe::ComplexityProbe(int d_in, int d_out, Rng& rng) {
    auto layer = nn::make_dense(d_in, d_out, nn::Activation::relu, rng);
    w_ = std::move(layer.w);
    b_ = std::move(layer.b);
}

Vec ComplexityProbe::aggregate_node(const GraphTopology& topo, int node, std::span<const Vec> features,
                                    GraphMode mode) {
    Vec acc(w_.rows, 0.0);
    Vec projected(w_.rows, 0.0);
    std::size_t count = 0;
    auto fold = [&](int u) {
        matvec(w_, features[u], projected);
        multiplies_ += static_cast<std::uint64_t>(w_.rows) * w_.cols;
        axpy(topo.edge_weight(u, node), projected, acc);
        ++count;
    };
    if (mode == GraphMode::complete) {
        for (int u = 0; u < topo.node_count(); ++u)
            if (u != node) fold(u);
    } else {
        for (int u : topo.neighbors.at(node)) fold(u);
    }
    if (count == 0) return Vec(w_.rows, 0.0);
    const double inv = 1.0 / static_cast<double>(count);
    for (std::size_t i = 0; i < acc.size(); ++i)
        acc[i] = nn::activate(nn::Activation::relu, acc[i] * inv + b_[i]);
    return acc;
}

void ComplexityProbe::aggregate_all(const GraphTopology& topo, std::span<const Vec> features,
                                    GraphMode mode) {
    for (int v = 0; v < topo.node_count(); ++v) aggregate_node(topo, v, features, mode);
}

}  // namespace v2x::sage
