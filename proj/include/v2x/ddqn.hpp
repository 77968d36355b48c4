#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "v2x/config.hpp"
#include "v2x/nn.hpp"
#include "v2x/rng.hpp"

namespace v2x::ddqn {

/// Scaling applied when flattening an AgentState into the network input.
struct StateScaling {
    double gain_db_divisor = 60.0;
    double deadline_s = 0.1;
    double count_divisor = 5.0;  // neighbor sampling fanout
};

/// Composite state of one link agent at one slot.
struct AgentState {
    Vec embedding;        // graph feature, embed_dim
    Vec observation;      // raw 3m channel observation in dB
    Vec neighbor_counts;  // per subchannel, neighbors holding it last slot
    double remaining_ratio = 1.0;  // remaining bits / payload
    double remaining_time_s = 0.0;

    std::size_t dim() const { return embedding.size() + observation.size() + neighbor_counts.size() + 2; }
    Vec to_vector(const StateScaling& scaling) const;
};

/// Builds and validates an agent state from its parts. Throws StructuralError
/// on any dimension mismatch.
AgentState assemble_state(Vec embedding, Vec observation, Vec neighbor_counts, double remaining_ratio,
                          double remaining_time_s, int m, int embed_dim);

/// Single integer jointly encoding subchannel and power level.
struct CompositeAction {
    int index = 0;
    int subchannel(int m) const { return index % m; }
    int power_level(int m) const { return index / m; }
    static CompositeAction compose(int subchannel, int power_level, int m) {
        return CompositeAction{power_level * m + subchannel};
    }
};

struct Experience {
    Vec state;
    int action = 0;
    double reward = 0.0;
    Vec next_state;
};

class ReplayBuffer {
public:
    explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {}

    void push(Experience e);
    std::size_t size() const { return data_.size(); }
    const Experience& at(std::size_t i) const { return data_[i]; }
    std::vector<const Experience*> sample(std::size_t batch, Rng& rng) const;

private:
    std::size_t capacity_;
    std::size_t next_ = 0;
    std::vector<Experience> data_;
};

enum class TargetRule { double_q, single_q };

/// Q-network pair (online + target) with epsilon-greedy action selection and
/// minibatch TD updates. The plain-DQN baseline uses the same machinery with
/// TargetRule::single_q.
class Agent {
public:
    Agent(const SimConfig& cfg, Rng init_rng, TargetRule rule = TargetRule::double_q);

    int action_count() const { return action_count_; }
    const nn::Mlp& online() const { return online_; }
    const nn::Mlp& target() const { return target_; }
    long learn_steps() const { return learn_steps_; }

    /// Epsilon-greedy over the online Q-values; argmax ties break low.
    CompositeAction select_action(std::span<const double> state_vec, double epsilon, Rng& rng) const;

    /// Bootstrapped target for one experience: the online network picks the
    /// argmax action, the target network values it.
    double compute_target(const Experience& e, double beta) const;

    /// One minibatch gradient step; returns the batch loss, or a negative
    /// value when the buffer is still smaller than the batch.
    double learn_step(const ReplayBuffer& buffer, int batch_size, Rng& rng);

    void save(const std::string& dir, std::uint64_t seed) const;
    void load(const std::string& dir);

private:
    int action_count_;
    double beta_;
    int target_sync_every_;
    TargetRule rule_;
    nn::Mlp online_;
    nn::Mlp target_;
    nn::LrSchedule schedule_;
    long learn_steps_ = 0;
};

/// Linear anneal from eps_start to eps_end over the first anneal_frac of
/// the run, then constant.
double epsilon_at(long iteration, long total_iterations, const SimConfig& cfg);

}  // namespace v2x::ddqn
