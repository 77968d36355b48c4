#include "v2x/environment.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "v2x/channel.hpp"
#include "v2x/errors.hpp"

namespace v2x {
namespace {
double se_from_sinr(double sinr) { return std::log2(1.0 + sinr); }
}  // namespace

Vec observation_to_features(const ChannelObservation& obs, double divisor) {
    Vec x;
    x.reserve(obs.gain_db.size() * 3);
    for (double v : obs.gain_db) x.push_back(v / divisor);
    for (double v : obs.tx_bs_gain_db) x.push_back(v / divisor);
    for (double v : obs.interference_prev_db) x.push_back(v / divisor);
    return x;
}

Environment::Environment(const SimConfig& cfg, std::uint64_t seed, bool dynamic_mode)
    : cfg_(cfg),
      dynamic_(dynamic_mode),
      grid_(cfg),
      mobility_rng_(Rng::stream(seed, 0x6d6f62)),
      channel_rng_(Rng::stream(seed, 0x636861)) {
    cfg_.validate();
    noise_mw_ = channel::db_to_linear(cfg_.noise_dbm);
    payload_bits_ = cfg_.payload_bytes * 8.0;
    slots_per_period_ = cfg_.slots_per_period();
}

int Environment::vehicle_index(int id) const {
    for (int i = 0; i < static_cast<int>(vehicles_.size()); ++i)
        if (vehicles_[i].id == id) return i;
    throw StructuralError("unknown vehicle id " + std::to_string(id));
}

void Environment::init(int vehicle_count) {
    if (vehicle_count < 4) throw ConfigError("environment needs at least 4 vehicles");
    vehicles_.clear();
    next_vehicle_id_ = 0;
    for (int i = 0; i < vehicle_count; ++i)
        vehicles_.push_back(spawn_vehicle(next_vehicle_id_++, grid_, cfg_, mobility_rng_));
    cue_positions_.clear();
    for (int i = 0; i < cfg_.m; ++i) {
        const int lane = mobility_rng_.uniform_int(static_cast<int>(grid_.lanes().size()));
        cue_positions_.push_back(
            grid_.position_on_lane(lane, mobility_rng_.uniform(-grid_.half_length(), grid_.half_length())));
    }
    arrival_p_ = 0.0;
    interference_prev_.clear();
    rebuild_topology();
}

void Environment::rebuild_topology() {
    assign_destinations(vehicles_, cfg_, mobility_rng_);

    // Carry observation history and transmission state over by link label.
    std::map<LinkLabel, Vec> prev_interference;
    for (int j = 0; j < topology_.node_count() && !interference_prev_.empty(); ++j) {
        prev_interference[topology_.nodes[j]] =
            Vec(interference_prev_.begin() + j * cfg_.m, interference_prev_.begin() + (j + 1) * cfg_.m);
    }

    topology_ = build_graph(vehicles_);
    resample_slow_channels();
    resample_fast_fading();
    reset_link_states();

    interference_prev_.assign(static_cast<std::size_t>(topology_.node_count()) * cfg_.m, noise_mw_);
    for (int j = 0; j < topology_.node_count(); ++j) {
        auto it = prev_interference.find(topology_.nodes[j]);
        if (it == prev_interference.end()) continue;
        std::copy(it->second.begin(), it->second.end(), interference_prev_.begin() + j * cfg_.m);
    }
}

void Environment::reset_link_states() {
    link_states_.assign(topology_.node_count(), {});
    for (auto& st : link_states_) {
        st.remaining_bits = payload_bits_;
        st.remaining_slots = slots_per_period_;
        st.active = true;
    }
}

void Environment::resample_slow_channels() {
    const int s = static_cast<int>(vehicles_.size());
    const int m = cfg_.m;
    tables_.s = s;
    tables_.m = m;
    tables_.slow_veh_veh.assign(static_cast<std::size_t>(s) * s, 0.0);
    tables_.slow_veh_bs.assign(s, 0.0);
    tables_.slow_cue_bs.assign(m, 0.0);
    tables_.slow_cue_veh.assign(static_cast<std::size_t>(m) * s, 0.0);

    const double veh_rx_offset = 2.0 * cfg_.veh_ant_gain_db - cfg_.veh_noise_figure_db;
    const double bs_rx_offset = cfg_.veh_ant_gain_db + cfg_.bs_ant_gain_db - cfg_.bs_noise_figure_db;

    for (int t = 0; t < s; ++t) {
        for (int r = 0; r < s; ++r) {
            const double pl = channel::v2v_path_loss_db(vehicles_[t].x - vehicles_[r].x,
                                                        vehicles_[t].y - vehicles_[r].y, cfg_.carrier_ghz,
                                                        cfg_.veh_ant_height_m);
            const double shadow = cfg_.v2v_shadow_db * channel_rng_.gaussian();
            tables_.slow_veh_veh[t * s + r] = channel::db_to_linear(-pl - shadow + veh_rx_offset);
        }
        const double pl_bs = channel::v2i_path_loss_db(std::hypot(vehicles_[t].x, vehicles_[t].y),
                                                       cfg_.bs_ant_height_m, cfg_.veh_ant_height_m);
        const double shadow_bs = cfg_.v2i_shadow_db * channel_rng_.gaussian();
        tables_.slow_veh_bs[t] = channel::db_to_linear(-pl_bs - shadow_bs + bs_rx_offset);
    }
    for (int i = 0; i < m; ++i) {
        const auto& cp = cue_positions_[i];
        const double pl_bs = channel::v2i_path_loss_db(std::hypot(cp[0], cp[1]), cfg_.bs_ant_height_m,
                                                       cfg_.veh_ant_height_m);
        const double shadow_bs = cfg_.v2i_shadow_db * channel_rng_.gaussian();
        tables_.slow_cue_bs[i] = channel::db_to_linear(-pl_bs - shadow_bs + bs_rx_offset);
        for (int r = 0; r < s; ++r) {
            const double pl = channel::v2v_path_loss_db(cp[0] - vehicles_[r].x, cp[1] - vehicles_[r].y,
                                                        cfg_.carrier_ghz, cfg_.veh_ant_height_m);
            const double shadow = cfg_.v2v_shadow_db * channel_rng_.gaussian();
            tables_.slow_cue_veh[i * s + r] = channel::db_to_linear(-pl - shadow + veh_rx_offset);
        }
    }
}

void Environment::resample_fast_fading() {
    const int s = tables_.s;
    const int m = tables_.m;
    tables_.fade_veh_veh.resize(static_cast<std::size_t>(s) * s * m);
    tables_.fade_veh_bs.resize(static_cast<std::size_t>(s) * m);
    tables_.fade_cue_bs.resize(m);
    tables_.fade_cue_veh.resize(static_cast<std::size_t>(m) * s);
    for (double& f : tables_.fade_veh_veh) f = channel_rng_.exponential();
    for (double& f : tables_.fade_veh_bs) f = channel_rng_.exponential();
    for (double& f : tables_.fade_cue_bs) f = channel_rng_.exponential();
    for (double& f : tables_.fade_cue_veh) f = channel_rng_.exponential();
}

void Environment::step_large_scale() {
    if (vehicles_.empty()) return;
    for (auto it = vehicles_.begin(); it != vehicles_.end();) {
        const bool inside = advance_vehicle(*it, grid_, cfg_, cfg_.delta_large_s, mobility_rng_);
        if (inside) {
            ++it;
            continue;
        }
        if (dynamic_) {
            it = vehicles_.erase(it);
        } else {
            *it = spawn_vehicle_at_entry(it->id, grid_, cfg_, mobility_rng_);
            ++it;
        }
    }
    if (dynamic_) {
        while (static_cast<int>(vehicles_.size()) < 4)
            vehicles_.push_back(spawn_vehicle_at_entry(next_vehicle_id_++, grid_, cfg_, mobility_rng_));
    }
    rebuild_topology();
}

void Environment::dynamic_arrivals() {
    if (!dynamic_) throw ConfigError("dynamic_arrivals requires dynamic mode");
    if (mobility_rng_.uniform() < arrival_p_) {
        vehicles_.push_back(spawn_vehicle_at_entry(next_vehicle_id_++, grid_, cfg_, mobility_rng_));
        arrival_p_ = 0.0;
    } else {
        arrival_p_ += cfg_.arrival_p_inc;
    }
}

double Environment::cue_sinr(const AllocationMatrix& alloc, int i) const {
    const double p_cue = channel::db_to_linear(cfg_.cue_power_dbm);
    const double signal = p_cue * tables_.cue_bs(i);
    double interference = 0.0;
    for (int j = 0; j < topology_.node_count(); ++j) {
        if (!link_states_[j].active || alloc[j].subchannel != i) continue;
        const double p = channel::db_to_linear(cfg_.power_levels_dbm.at(alloc[j].power_level));
        interference += p * tables_.veh_bs(vehicle_index(topology_.nodes[j].tx), i);
    }
    return signal / (noise_mw_ + interference);
}

double Environment::vue_sinr(const AllocationMatrix& alloc, int j) const {
    const auto& label = topology_.nodes.at(j);
    const int tx = vehicle_index(label.tx);
    const int rx = vehicle_index(label.rx);
    const int ch = alloc.at(j).subchannel;
    const double p = channel::db_to_linear(cfg_.power_levels_dbm.at(alloc[j].power_level));
    const double signal = p * tables_.veh_veh(tx, rx, ch);

    const double p_cue = channel::db_to_linear(cfg_.cue_power_dbm);
    const double g_v2i = p_cue * tables_.cue_veh(ch, rx);

    double g_v2v = 0.0;
    for (int k = 0; k < topology_.node_count(); ++k) {
        if (k == j || !link_states_[k].active || alloc[k].subchannel != ch) continue;
        const double pk = channel::db_to_linear(cfg_.power_levels_dbm.at(alloc[k].power_level));
        g_v2v += pk * tables_.veh_veh(vehicle_index(topology_.nodes[k].tx), rx, ch);
    }
    return signal / (noise_mw_ + g_v2i + g_v2v);
}

SlotResult Environment::step_small_scale(const AllocationMatrix& alloc) {
    const int links = topology_.node_count();
    if (static_cast<int>(alloc.size()) != links)
        throw ConfigError("step_small_scale: allocation covers " + std::to_string(alloc.size()) +
                          " links, environment has " + std::to_string(links));
    if (!fading_frozen_) resample_fast_fading();

    const int m = cfg_.m;
    SlotResult out;
    out.rewards.assign(links, 0.0);
    out.rewarded.assign(links, false);
    out.vue_se.assign(links, 0.0);
    out.cue_sinr.assign(m, 0.0);
    out.v2v_interference_received.assign(m, 0.0);
    out.v2v_interference_contributed.assign(m, 0.0);

    // Per-link transmit power and vehicle rows, resolved once.
    std::vector<int> tx_row(links), rx_row(links);
    std::vector<double> p_tx(links, 0.0);
    for (int j = 0; j < links; ++j) {
        tx_row[j] = vehicle_index(topology_.nodes[j].tx);
        rx_row[j] = vehicle_index(topology_.nodes[j].rx);
        p_tx[j] = channel::db_to_linear(cfg_.power_levels_dbm.at(alloc[j].power_level));
    }

    double sum_se_c = 0.0;
    for (int i = 0; i < m; ++i) {
        const double sinr = cue_sinr(alloc, i);
        out.cue_sinr[i] = sinr;
        const double se = se_from_sinr(sinr);
        sum_se_c += se;
        out.v2i_sum_rate_bps += cfg_.bandwidth_hz * se;
    }

    // Receiver-side VUE SINRs and their interference bookkeeping.
    double sum_se_v = 0.0;
    std::vector<double> capacity_bps(links, 0.0);
    for (int j = 0; j < links; ++j) {
        if (!link_states_[j].active) continue;
        const int ch = alloc[j].subchannel;
        const double signal = p_tx[j] * tables_.veh_veh(tx_row[j], rx_row[j], ch);
        const double g_v2i = channel::db_to_linear(cfg_.cue_power_dbm) * tables_.cue_veh(ch, rx_row[j]);
        double g_v2v = 0.0;
        for (int k = 0; k < links; ++k) {
            if (k == j || !link_states_[k].active || alloc[k].subchannel != ch) continue;
            g_v2v += p_tx[k] * tables_.veh_veh(tx_row[k], rx_row[j], ch);
        }
        out.v2v_interference_received[ch] += g_v2v;
        const double sinr = signal / (noise_mw_ + g_v2i + g_v2v);
        const double se = se_from_sinr(sinr);
        out.vue_se[j] = se;
        sum_se_v += se;
        capacity_bps[j] = cfg_.bandwidth_hz * se;
    }

    // Transmitter-side recount of the same co-channel energy.
    for (int k = 0; k < links; ++k) {
        if (!link_states_[k].active) continue;
        const int ch = alloc[k].subchannel;
        for (int j = 0; j < links; ++j) {
            if (j == k || !link_states_[j].active || alloc[j].subchannel != ch) continue;
            out.v2v_interference_contributed[ch] += p_tx[k] * tables_.veh_veh(tx_row[k], rx_row[j], ch);
        }
    }

    // Rewards use the slot-start deadline state; then the clock advances.
    for (int j = 0; j < links; ++j) {
        auto& st = link_states_[j];
        const bool active_at_start = st.active;
        if (active_at_start) {
            const double elapsed_s = static_cast<double>(slots_per_period_ - st.remaining_slots) *
                                     cfg_.delta_small_s;
            out.rewards[j] = cfg_.lambda_c * sum_se_c + (1.0 - cfg_.lambda_c) * sum_se_v -
                             cfg_.lambda_p * elapsed_s;
            out.rewarded[j] = true;

            st.remaining_bits -= capacity_bps[j] * cfg_.delta_small_s;
            if (st.remaining_bits <= 0.0) {
                st.remaining_bits = 0.0;
                st.succeeded = true;
                out.newly_succeeded.push_back(j);
            }
        }
        if (st.remaining_slots > 0) --st.remaining_slots;
        if (active_at_start && !st.succeeded && st.remaining_slots == 0 && st.remaining_bits > 0.0) {
            st.failed = true;
            out.rewards[j] -= cfg_.fail_penalty;
            out.newly_failed.push_back(j);
        }
        st.active = st.remaining_bits > 0.0 && st.remaining_slots > 0;
    }

    // Interference measured this slot, per link and subchannel, for the next
    // observation: every co-channel transmission received at the link's
    // receiver except its own signal, plus noise.
    const int s = tables_.s;
    Vec rx_total(static_cast<std::size_t>(s) * m, 0.0);
    const double p_cue = channel::db_to_linear(cfg_.cue_power_dbm);
    for (int r = 0; r < s; ++r)
        for (int ch = 0; ch < m; ++ch) rx_total[r * m + ch] = p_cue * tables_.cue_veh(ch, r);
    for (int k = 0; k < links; ++k) {
        if (!out.rewarded[k]) continue;  // transmitted this slot
        const int ch = alloc[k].subchannel;
        for (int r = 0; r < s; ++r) rx_total[r * m + ch] += p_tx[k] * tables_.veh_veh(tx_row[k], r, ch);
    }
    interference_prev_.assign(static_cast<std::size_t>(links) * m, 0.0);
    for (int j = 0; j < links; ++j) {
        for (int ch = 0; ch < m; ++ch) {
            double v = rx_total[rx_row[j] * m + ch];
            if (out.rewarded[j] && alloc[j].subchannel == ch)
                v -= p_tx[j] * tables_.veh_veh(tx_row[j], rx_row[j], ch);
            interference_prev_[j * m + ch] = v + noise_mw_;
        }
    }
    return out;
}

ChannelObservation Environment::observe(int link) const {
    const auto& label = topology_.nodes.at(link);
    const int tx = vehicle_index(label.tx);
    const int rx = vehicle_index(label.rx);
    const int m = cfg_.m;
    ChannelObservation obs;
    obs.gain_db.resize(m);
    obs.tx_bs_gain_db.resize(m);
    obs.interference_prev_db.resize(m);
    for (int ch = 0; ch < m; ++ch) {
        obs.gain_db[ch] = channel::linear_to_db(tables_.veh_veh(tx, rx, ch));
        obs.tx_bs_gain_db[ch] = channel::linear_to_db(tables_.veh_bs(tx, ch));
        obs.interference_prev_db[ch] = channel::linear_to_db(interference_prev_[link * m + ch]);
    }
    return obs;
}

int Environment::succeeded_count() const {
    int n = 0;
    for (const auto& st : link_states_) n += st.succeeded ? 1 : 0;
    return n;
}

int Environment::failed_count() const {
    int n = 0;
    for (const auto& st : link_states_) n += st.failed ? 1 : 0;
    return n;
}

}  // namespace v2x
