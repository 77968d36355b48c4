#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "v2x/config.hpp"
#include "v2x/ddqn.hpp"
#include "v2x/environment.hpp"
#include "v2x/graphsage.hpp"

namespace v2x::run {

enum class Policy { gnn, dqn, random };

std::string policy_name(Policy p);

struct RunPlan {
    Policy policy = Policy::gnn;
    std::string out_dir;
    std::string checkpoint_dir;  // read by tests, written by train
    bool timing = false;         // real decision latency in CSVs (breaks byte-replay)
    bool write_outputs = true;
};

struct ActionRecord {
    int link = 0;
    long slot = 0;
    int subchannel = 0;
    int power_level = 0;
    double reward = 0.0;
};

/// Shared per-slot engine: rotating decision batches, environment stepping,
/// replay/label collection, and metric extraction. Training and every test
/// mode drive the same engine; only the policy differs.
class Engine {
public:
    Engine(const SimConfig& cfg, Policy policy, std::uint64_t seed, bool dynamic,
           ddqn::Agent* agent, sage::SageTrainer* sage);

    void reset(int vehicle_count);

    struct SlotOutput {
        double v2i_sum_rate_bps = 0.0;
        int vehicle_count = 0;
        double latency_us = 0.0;
        std::size_t deciders = 0;
        double mean_reward = 0.0;
        bool period_completed = false;
        double period_success_rate = 0.0;
        std::optional<double> sage_loss;  // set when a burst ran this slot
        std::vector<ActionRecord> decisions;
    };

    /// One small-scale slot. `learn` enables replay collection plus DDQN and
    /// GraphSAGE updates; `reset_period` > 0 re-seats the whole environment on
    /// that cadence (training only).
    SlotOutput step(double epsilon, bool learn, bool timing, long reset_period = 0);

    long slot() const { return slot_; }
    Environment& env() { return env_; }
    const AllocationMatrix& alloc() const { return alloc_; }
    double last_period_success() const { return last_period_success_; }

private:
    void period_boundary();
    void carry_actions(const std::vector<LinkLabel>& old_nodes, const AllocationMatrix& old_alloc);
    const Vec& node_features(int node);
    void invalidate_features();
    Vec neighbor_counts(int node, const std::vector<int>& actions,
                        const std::vector<bool>& active) const;
    Vec agent_state_vec(int node, const std::vector<int>& action_snapshot,
                        const std::vector<bool>& active_snapshot);

    SimConfig cfg_;
    Policy policy_;
    Environment env_;
    ddqn::Agent* agent_;
    sage::SageTrainer* sage_;
    sage::RewardMatrix rewards_;
    ddqn::ReplayBuffer replay_;
    ddqn::StateScaling scaling_;
    Rng policy_rng_;
    Rng sample_rng_;
    Rng learn_rng_;
    AllocationMatrix alloc_;
    std::vector<Vec> features_;
    std::vector<char> features_ready_;
    long slot_ = 0;
    int slot_in_period_ = 0;
    long slots_since_reset_ = 0;
    int vehicle_target_ = 0;
    double last_period_success_ = 0.0;
};

struct TrainSummary {
    long iterations = 0;
    double mean_tail_reward = 0.0;  // mean deciding-agent reward, last 10% of run
    std::string checkpoint_dir;
};

TrainSummary train(const SimConfig& cfg, const RunPlan& plan);

struct StaticCountSummary {
    int vehicles = 0;
    double v2i_mean_bps = 0.0;
    double v2i_se_bps = 0.0;
    double success_mean = 0.0;
    double success_se = 0.0;
    long slots = 0;
};

struct StaticTestSummary {
    std::vector<StaticCountSummary> per_count;
    std::vector<ActionRecord> actions;
};

StaticTestSummary test_static(const SimConfig& cfg, const RunPlan& plan);

struct SegmentSummary {
    int segment = 0;
    std::string metric;
    double min = 0, q1 = 0, median = 0, q3 = 0, max = 0;
};

struct DynamicTestSummary {
    long steps = 0;
    std::vector<SegmentSummary> segments;
    double final_segment_success_mean = 0.0;
    int final_vehicle_count = 0;
};

DynamicTestSummary test_dynamic(const SimConfig& cfg, const RunPlan& plan);

struct StrategyTable {
    double bin_width_s = 0.01;
    std::vector<std::vector<double>> share;  // [bin][power level]
    std::vector<long> decisions;             // per bin

    int bins() const { return static_cast<int>(decisions.size()); }
};

/// Bins decisions by remaining transmission time (derived from the slot
/// index) and reports the share of each power level per bin.
StrategyTable strategy_histogram(const std::vector<ActionRecord>& logs, const SimConfig& cfg);

std::vector<ActionRecord> load_action_log(const std::string& path);

}  // namespace v2x::run
