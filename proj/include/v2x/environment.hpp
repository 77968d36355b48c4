#pragma once

#include <cstdint>
#include <vector>

#include "v2x/config.hpp"
#include "v2x/link_graph.hpp"
#include "v2x/linalg.hpp"
#include "v2x/mobility.hpp"
#include "v2x/rng.hpp"

namespace v2x {

struct AllocationEntry {
    int subchannel = 0;
    int power_level = 0;
};

/// One entry per V2V link, in topology node order.
using AllocationMatrix = std::vector<AllocationEntry>;

/// Local observation of one link: own channel gain, own-transmitter-to-BS
/// gain, and previous-slot received interference, per subchannel, in dB.
struct ChannelObservation {
    Vec gain_db;
    Vec tx_bs_gain_db;
    Vec interference_prev_db;
};

/// Concatenates an observation into the 3m node feature vector, scaling the
/// dB values by 1/divisor.
Vec observation_to_features(const ChannelObservation& obs, double divisor);

struct LinkTransmissionState {
    double remaining_bits = 0.0;
    int remaining_slots = 0;  // deadline bookkeeping is slot-exact
    bool active = false;
    bool succeeded = false;
    bool failed = false;
};

struct SlotResult {
    Vec rewards;                 // per link, valid where rewarded[j]
    std::vector<bool> rewarded;  // link was active at slot start
    Vec cue_sinr;                // linear, per subchannel
    double v2i_sum_rate_bps = 0.0;
    Vec vue_se;                  // spectral efficiency per link, 0 when silent
    std::vector<int> newly_succeeded;
    std::vector<int> newly_failed;
    // V2V-to-V2V co-channel energy, accumulated receiver-side and
    // transmitter-side independently; the two must agree.
    Vec v2v_interference_received;     // per subchannel
    Vec v2v_interference_contributed;  // per subchannel
};

/// Linear channel gain tables for the current large-scale epoch. Slow parts
/// (path loss + shadowing + antenna gains − receiver noise figure) change per
/// large-scale step; fast fading multipliers change per slot. Tests may
/// mutate these directly.
struct ChannelTables {
    int s = 0;  // vehicles
    int m = 0;  // subchannels / CUEs
    Vec slow_veh_veh;   // s*s
    Vec slow_veh_bs;    // s
    Vec slow_cue_bs;    // m
    Vec slow_cue_veh;   // m*s
    Vec fade_veh_veh;   // s*s*m
    Vec fade_veh_bs;    // s*m
    Vec fade_cue_bs;    // m
    Vec fade_cue_veh;   // m*s

    double veh_veh(int tx, int rx, int ch) const {
        return slow_veh_veh[tx * s + rx] * fade_veh_veh[(tx * s + rx) * m + ch];
    }
    double veh_bs(int tx, int ch) const { return slow_veh_bs[tx] * fade_veh_bs[tx * m + ch]; }
    double cue_bs(int i) const { return slow_cue_bs[i] * fade_cue_bs[i]; }
    double cue_veh(int i, int rx) const { return slow_cue_veh[i * s + rx] * fade_cue_veh[i * s + rx]; }
};

/// Discrete-time intersection environment: mobility on the large timescale,
/// fading/SINR/payload bookkeeping on the small timescale. Stepping is
/// strictly sequential; observations taken between steps see a consistent
/// snapshot.
class Environment {
public:
    Environment(const SimConfig& cfg, std::uint64_t seed, bool dynamic_mode = false);

    /// Places vehicles and CUEs, assigns destinations, builds the first graph.
    void init(int vehicle_count);

    /// Advances positions by delta_large (turns, exits), resamples slow
    /// channels, reassigns destinations, rebuilds the graph, starts a new
    /// payload period. No-op on an empty environment.
    void step_large_scale();

    /// Dynamic mode only; call at a large-scale boundary before
    /// step_large_scale. With probability p adds one vehicle at a random lane
    /// entry (p resets to 0), otherwise p grows by arrival_p_inc.
    void dynamic_arrivals();

    /// One fast-fading slot under the given allocation.
    SlotResult step_small_scale(const AllocationMatrix& alloc);

    /// SINR of CUE i under the allocation, linear scale.
    double cue_sinr(const AllocationMatrix& alloc, int i) const;
    /// SINR of link j under the allocation, linear scale.
    double vue_sinr(const AllocationMatrix& alloc, int j) const;

    ChannelObservation observe(int link) const;

    const std::vector<Vehicle>& vehicles() const { return vehicles_; }
    const GraphTopology& topology() const { return topology_; }
    int link_count() const { return topology_.node_count(); }
    const LinkTransmissionState& link_state(int j) const { return link_states_.at(j); }
    double remaining_time_s(int j) const { return link_states_.at(j).remaining_slots * cfg_.delta_small_s; }
    double remaining_ratio(int j) const { return link_states_.at(j).remaining_bits / payload_bits_; }
    int slots_per_period() const { return slots_per_period_; }
    int used_slots(int j) const { return slots_per_period_ - link_states_.at(j).remaining_slots; }
    int succeeded_count() const;
    int failed_count() const;
    double arrival_probability() const { return arrival_p_; }
    bool dynamic_mode() const { return dynamic_; }
    const SimConfig& config() const { return cfg_; }
    double noise_mw() const { return noise_mw_; }
    double payload_bits() const { return payload_bits_; }

    ChannelTables& channel() { return tables_; }
    const ChannelTables& channel() const { return tables_; }
    /// Stops per-slot fading resampling (test hook).
    void freeze_fading(bool freeze) { fading_frozen_ = freeze; }

private:
    void rebuild_topology();
    void resample_slow_channels();
    void resample_fast_fading();
    void reset_link_states();
    int vehicle_index(int id) const;

    SimConfig cfg_;
    bool dynamic_;
    LaneGrid grid_;
    Rng mobility_rng_;
    Rng channel_rng_;
    std::vector<Vehicle> vehicles_;
    std::vector<std::array<double, 2>> cue_positions_;
    GraphTopology topology_;
    std::vector<LinkTransmissionState> link_states_;
    ChannelTables tables_;
    Vec interference_prev_;  // link-major [j*m + ch], linear, includes noise
    double noise_mw_ = 0.0;
    double payload_bits_ = 0.0;
    int slots_per_period_ = 0;
    double arrival_p_ = 0.0;
    int next_vehicle_id_ = 0;
    bool fading_frozen_ = false;
};

}  // namespace v2x
