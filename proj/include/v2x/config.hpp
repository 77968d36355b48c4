#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace v2x {

/// Every tunable of the simulator in one flat key-value structure.
/// Defaults reproduce the reference setup; all keys can be overridden from a
/// config file, from V2X_* environment variables, and from CLI flags.
struct SimConfig {
    // Spectrum and radio front end.
    int m = 20;                                       // subchannels == CUE count
    std::vector<double> power_levels_dbm = {23.0, 10.0, 5.0};
    double bandwidth_hz = 1.5e6;
    double noise_dbm = -114.0;
    double carrier_ghz = 2.0;
    double veh_ant_height_m = 1.5;
    double bs_ant_height_m = 25.0;
    double veh_ant_gain_db = 3.0;
    double bs_ant_gain_db = 8.0;
    double veh_noise_figure_db = 9.0;
    double bs_noise_figure_db = 5.0;
    double cue_power_dbm = 23.0;                      // assumption: uplink power of the dedicated CUEs
    double v2i_shadow_db = 8.0;
    double v2v_shadow_db = 3.0;

    // Road geometry and mobility.
    double neighbor_threshold_m = 150.0;
    int lanes_per_direction = 4;
    double lane_width_m = 3.5;
    double road_half_length_m = 375.0;
    double speed_min_mps = 10.0;
    double speed_max_mps = 15.0;
    double turn_prob_left = 0.25;
    double turn_prob_right = 0.25;

    // Timescales and traffic demand.
    double t0_s = 0.1;                                // V2V delivery deadline
    double delta_large_s = 0.1;
    double delta_small_s = 0.001;
    double payload_bytes = 2120.0;                    // per V2V message per period
    double lambda_c = 0.3;
    double lambda_p = 1.0;
    double fail_penalty = 10.0;

    // Link graph and embedding network.
    int sample_fanout = 5;
    int embed_dim = 20;
    double sage_lr_initial = 0.01;
    double sage_kappa = 0.9;
    int sage_sync_period = 200;
    int sage_updates_per_burst = 120;
    int sage_burst_every = 50;
    int sage_batch = 32;
    int sage_stale_after = 500;

    // Q-learning.
    double q_lr_initial = 0.005;
    double lr_floor = 1e-4;
    double lr_decay = 0.99;
    int lr_decay_every = 100;
    double discount_beta = 0.95;
    double eps_start = 1.0;
    double eps_end = 0.02;
    double eps_anneal_frac = 0.8;
    int replay_capacity = 50000;
    int batch_size = 64;
    int target_sync_every = 500;

    // Run shape.
    long iterations = 10000;
    int reset_period = 2000;
    int vehicles = 20;
    std::vector<double> vehicle_counts = {10, 20, 30};
    int test_resets = 20;
    int test_samples = 100;
    long dynamic_steps = 5000;
    double arrival_p_inc = 0.02;
    int decision_batches = 10;
    std::uint64_t seed = 1;
    int metrics_every = 1;

    int power_level_count() const { return static_cast<int>(power_levels_dbm.size()); }
    int action_count() const { return m * power_level_count(); }
    int feature_dim() const { return 3 * m; }
    int slots_per_period() const;
    /// Throws ConfigError when a value violates its documented range.
    void validate() const;
};

/// Parses "key = value" lines; '#' starts a comment. Unknown keys and syntax
/// errors raise ConfigError with the offending line number.
SimConfig parse_config_text(const std::string& text, const SimConfig& base = {});
SimConfig load_config_file(const std::string& path, const SimConfig& base = {});

/// Applies V2X_<UPPERCASE_KEY> environment variables on top of a config.
void apply_env_overrides(SimConfig& cfg, const std::string& prefix = "V2X_");

/// Serializes every key, parseable by parse_config_text (round trip).
std::string config_to_text(const SimConfig& cfg);

}  // namespace v2x
