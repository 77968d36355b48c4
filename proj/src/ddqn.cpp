#include "v2x/ddqn.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>

#include "v2x/errors.hpp"

namespace v2x::ddqn {

Vec AgentState::to_vector(const StateScaling& scaling) const {
    Vec out;
    out.reserve(dim());
    for (double v : embedding) out.push_back(v);
    for (double v : observation) out.push_back(v / scaling.gain_db_divisor);
    for (double v : neighbor_counts) out.push_back(v / scaling.count_divisor);
    out.push_back(remaining_ratio);
    out.push_back(remaining_time_s / scaling.deadline_s);
    return out;
}

AgentState assemble_state(Vec embedding, Vec observation, Vec neighbor_counts, double remaining_ratio,
                          double remaining_time_s, int m, int embed_dim) {
    if (static_cast<int>(embedding.size()) != embed_dim)
        throw StructuralError("assemble_state: embedding dimension mismatch");
    if (static_cast<int>(observation.size()) != 3 * m)
        throw StructuralError("assemble_state: observation must have length 3m");
    if (static_cast<int>(neighbor_counts.size()) != m)
        throw StructuralError("assemble_state: neighbor counts must have length m");
    AgentState s;
    s.embedding = std::move(embedding);
    s.observation = std::move(observation);
    s.neighbor_counts = std::move(neighbor_counts);
    s.remaining_ratio = remaining_ratio;
    s.remaining_time_s = remaining_time_s;
    return s;
}

void ReplayBuffer::push(Experience e) {
    if (data_.size() < capacity_) {
        data_.push_back(std::move(e));
    } else {
        data_[next_] = std::move(e);
        next_ = (next_ + 1) % capacity_;
    }
}

std::vector<const Experience*> ReplayBuffer::sample(std::size_t batch, Rng& rng) const {
    std::vector<const Experience*> out;
    out.reserve(batch);
    for (std::size_t i = 0; i < batch; ++i)
        out.push_back(&data_[rng.uniform_index(data_.size())]);
    return out;
}

Agent::Agent(const SimConfig& cfg, Rng init_rng, TargetRule rule)
    : action_count_(cfg.action_count()),
      beta_(cfg.discount_beta),
      target_sync_every_(cfg.target_sync_every),
      rule_(rule) {
    const std::size_t in = static_cast<std::size_t>(cfg.embed_dim) + 3 * cfg.m + cfg.m + 2;
    online_ = nn::Mlp::make({in, 500, 250, 120, static_cast<std::size_t>(action_count_)}, init_rng);
    target_ = online_;
    schedule_ = nn::LrSchedule{cfg.q_lr_initial, cfg.lr_floor, cfg.lr_decay, cfg.lr_decay_every};
}

namespace {
int argmax_low_tie(std::span<const double> q) {
    int best = 0;
    for (int i = 1; i < static_cast<int>(q.size()); ++i)
        if (q[i] > q[best]) best = i;
    return best;
}
}  // namespace

CompositeAction Agent::select_action(std::span<const double> state_vec, double epsilon, Rng& rng) const {
    if (epsilon > 0.0 && rng.uniform() < epsilon)
        return CompositeAction{rng.uniform_int(action_count_)};
    const Vec q = nn::forward(online_, state_vec);
    return CompositeAction{argmax_low_tie(q)};
}

double Agent::compute_target(const Experience& e, double beta) const {
    const Vec q_next_online = nn::forward(online_, e.next_state);
    const Vec q_next_target = nn::forward(target_, e.next_state);
    const int a_star = rule_ == TargetRule::double_q ? argmax_low_tie(q_next_online)
                                                     : argmax_low_tie(q_next_target);
    return e.reward + beta * q_next_target[a_star];
}

double Agent::learn_step(const ReplayBuffer& buffer, int batch_size, Rng& rng) {
    if (buffer.size() < static_cast<std::size_t>(batch_size)) return -1.0;
    auto batch = buffer.sample(batch_size, rng);
    auto grads = nn::Gradients::zeros_like(online_);
    const double inv_batch = 1.0 / static_cast<double>(batch_size);
    double loss = 0.0;
    Vec seed(static_cast<std::size_t>(action_count_));
    for (const Experience* e : batch) {
        const double y = compute_target(*e, beta_);
        auto cache = nn::forward_cached(online_, e->state);
        const double err = cache.output[e->action] - y;
        loss += err * err;
        std::fill(seed.begin(), seed.end(), 0.0);
        seed[e->action] = 2.0 * err * inv_batch;
        nn::backward(online_, cache, seed, grads);
    }
    nn::sgd_step(online_, grads, schedule_, learn_steps_);
    ++learn_steps_;
    if (target_sync_every_ > 0 && learn_steps_ % target_sync_every_ == 0) target_ = online_;
    return loss * inv_batch;
}

void Agent::save(const std::string& dir, std::uint64_t seed) const {
    std::filesystem::create_directories(dir);
    for (auto [net, name] : {std::pair<const nn::Mlp*, const char*>{&online_, "q.online"},
                             {&target_, "q.target"}}) {
        auto arrays = nn::mlp_to_arrays("q", *net);
        arrays.push_back({"meta.seed", {1}, {static_cast<double>(seed)}});
        arrays.push_back({"meta.learn_steps", {1}, {static_cast<double>(learn_steps_)}});
        arrays.push_back({"meta.single_q", {1}, {rule_ == TargetRule::single_q ? 1.0 : 0.0}});
        nn::save_arrays(dir + "/" + name, arrays);
    }
}

void Agent::load(const std::string& dir) {
    auto online_arrays = nn::load_arrays(dir + "/q.online");
    auto target_arrays = nn::load_arrays(dir + "/q.target");
    online_ = nn::mlp_from_arrays("q", online_arrays);
    target_ = nn::mlp_from_arrays("q", target_arrays);
    action_count_ = static_cast<int>(online_.output_dim());
    for (const auto& arr : online_arrays) {
        if (arr.name == "meta.learn_steps") learn_steps_ = static_cast<long>(arr.data.at(0));
        if (arr.name == "meta.single_q") rule_ = arr.data.at(0) != 0.0 ? TargetRule::single_q : TargetRule::double_q;
    }
}

double epsilon_at(long iteration, long total_iterations, const SimConfig& cfg) {
    const double anneal = cfg.eps_anneal_frac * static_cast<double>(total_iterations);
    if (anneal <= 0.0) return cfg.eps_end;
    const double t = static_cast<double>(iteration) / anneal;
    if (t >= 1.0) return cfg.eps_end;
    return cfg.eps_start + (cfg.eps_end - cfg.eps_start) * t;
}

}  // namespace v2x::ddqn
