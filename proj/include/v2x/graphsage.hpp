#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "v2x/config.hpp"
#include "v2x/link_graph.hpp"
#include "v2x/nn.hpp"

namespace v2x::sage {

/// One aggregation layer: weighted-mean aggregate over sampled neighbors,
/// then sum-combine update with the node's own input.
struct SageLayer {
    Matrix w_agg;  // dim x dim
    Vec b_agg;
    Matrix w_upd;  // out x dim
    Vec b_upd;
    nn::Activation agg_act = nn::Activation::relu;
    nn::Activation upd_act = nn::Activation::relu;
};

struct SageNet {
    SageLayer layer1;  // feat -> feat
    SageLayer layer2;  // feat -> embed, linear output so embeddings can track signed labels
    std::size_t feature_dim() const { return layer1.w_agg.cols; }
    std::size_t embed_dim() const { return layer2.w_upd.rows; }

    static SageNet make(std::size_t feature_dim, std::size_t embed_dim, Rng& rng);
};

/// z = act(W_agg * (sum_u x_u * delta_u) / n + b_agg)
Vec aggregate(const SageLayer& layer, std::span<const Vec* const> neighbor_features,
              std::span<const double> edge_weights);

/// h = act(W_upd * (z + x) + b_upd)
Vec update(const SageLayer& layer, std::span<const double> z, std::span<const double> x);

struct LayerNodeCache {
    Vec mean;     // weighted neighbor mean
    Vec pre_agg;  // W_agg mean + b_agg
    Vec z;
    Vec combined;  // z + x
    Vec pre_upd;   // W_upd combined + b_upd
    Vec h;
};

struct EmbedCache {
    SampledNeighborhood samples;
    std::vector<LayerNodeCache> inner;  // one per first-layer sample
    LayerNodeCache outer;
    const Vec& embedding() const { return outer.h; }
};

/// Two-layer embedding over a fixed neighbor sample (deterministic given samples).
EmbedCache embed_cached(const SageNet& net, const GraphTopology& topo,
                        const SampledNeighborhood& samples, std::span<const Vec> features);

/// Convenience path: draw samples, return only the embedding.
Vec embed_node(const SageNet& net, const GraphTopology& topo, int node,
               std::span<const Vec> features, int fanout, Rng& rng);

struct SageGradients {
    Matrix dw_agg1, dw_upd1, dw_agg2, dw_upd2;
    Vec db_agg1, db_upd1, db_agg2, db_upd2;

    static SageGradients zeros_like(const SageNet& net);
};

/// Accumulates dLoss/dParams for seed dLoss/dEmbedding over the cached pass.
void embed_backward(const SageNet& net, const GraphTopology& topo, const EmbedCache& cache,
                    std::span<const Vec> features, std::span<const double> embedding_grad,
                    SageGradients& acc);

void sgd_step(SageNet& net, const SageGradients& grads, const nn::LrSchedule& schedule, long step);

/// Per-node, per-subchannel store of the latest reward observed for a
/// transmission on that subchannel, with the recording iteration.
class RewardMatrix {
public:
    struct Row {
        Vec reward;
        std::vector<long> stamp;
    };

    explicit RewardMatrix(int subchannels) : m_(subchannels) {}

    void record(const LinkLabel& node, int subchannel, double reward, long iteration);
    const Row* find(const LinkLabel& node) const;
    /// Drops rows whose label no longer exists in the topology.
    void prune_absent(const GraphTopology& topo);
    int subchannels() const { return m_; }
    std::size_t size() const { return rows_.size(); }

private:
    int m_;
    std::map<LinkLabel, Row> rows_;
};

/// Smoothed training target: kappa * old + (1 - kappa) * label, componentwise.
Vec smoothed_labels(std::span<const double> h_old, std::span<const double> reward_row, double kappa);

/// Trains the live network toward reward-smoothed labels produced with a
/// lagged parameter copy; syncs the lagged copy on a fixed period.
class SageTrainer {
public:
    SageTrainer(const SimConfig& cfg, Rng init_rng);

    const SageNet& live() const { return live_; }
    const SageNet& lagged() const { return lagged_; }
    long updates() const { return updates_; }

    /// One gradient step on a batch of node indices; returns the batch loss
    /// (stale label components are masked out). Requires a RewardMatrix row
    /// for every batch node.
    double train_step(const GraphTopology& topo, std::span<const Vec> features,
                      std::span<const int> batch, const RewardMatrix& rewards, long iteration,
                      Rng& sample_rng);

    void save(const std::string& dir, std::uint64_t seed) const;
    void load(const std::string& dir);

private:
    Vec project_labels(const SageNet& net, const std::optional<nn::DenseLayer>& head, const Vec& h) const;

    SimConfig cfg_;
    SageNet live_;
    SageNet lagged_;
    std::optional<nn::DenseLayer> head_;         // embed_dim -> m when they differ
    std::optional<nn::DenseLayer> lagged_head_;
    nn::LrSchedule schedule_;
    long updates_ = 0;
};

/// Single-layer full-neighborhood aggregation used by the complexity
/// comparison: every neighbor feature is individually projected d_in -> d_out
/// before the weighted mean. The counter tracks exactly the projection
/// multiplies executed.
class ComplexityProbe {
public:
    ComplexityProbe(int d_in, int d_out, Rng& rng);

    Vec aggregate_node(const GraphTopology& topo, int node, std::span<const Vec> features,
                       GraphMode mode);
    void aggregate_all(const GraphTopology& topo, std::span<const Vec> features, GraphMode mode);

    std::uint64_t projection_multiplies() const { return multiplies_; }
    void reset_counter() { multiplies_ = 0; }

private:
    Matrix w_;
    Vec b_;
    std::uint64_t multiplies_ = 0;
};

}  // namespace v2x::sage
