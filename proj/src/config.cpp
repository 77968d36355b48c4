#include "v2x/config.hpp"

#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <functional>
#include <sstream>

#include "v2x/errors.hpp"

namespace v2x {
namespace {

struct KeyBinding {
    const char* name;
    std::function<void(SimConfig&, const std::string&)> set;
    std::function<std::string(const SimConfig&)> get;
};

std::string format_double(double v) {
    std::ostringstream os;
    os.precision(17);
    os << v;
    return os.str();
}

double parse_double(const std::string& s) {
    std::size_t pos = 0;
    double v = std::stod(s, &pos);
    while (pos < s.size() && std::isspace(static_cast<unsigned char>(s[pos]))) ++pos;
    if (pos != s.size()) throw std::invalid_argument("trailing characters");
    return v;
}

std::vector<double> parse_list(const std::string& s) {
    std::vector<double> out;
    std::string item;
    std::istringstream is(s);
    while (std::getline(is, item, ',')) out.push_back(parse_double(item));
    if (out.empty()) throw std::invalid_argument("empty list");
    return out;
}

std::string format_list(const std::vector<double>& v) {
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (i) out += ",";
        out += format_double(v[i]);
    }
    return out;
}

template <typename T>
KeyBinding bind(const char* name, T SimConfig::* field) {
    KeyBinding b;
    b.name = name;
    if constexpr (std::is_same_v<T, double>) {
        b.set = [field](SimConfig& c, const std::string& s) { c.*field = parse_double(s); };
        b.get = [field](const SimConfig& c) { return format_double(c.*field); };
    } else if constexpr (std::is_same_v<T, int>) {
        b.set = [field](SimConfig& c, const std::string& s) { c.*field = static_cast<int>(std::llround(parse_double(s))); };
        b.get = [field](const SimConfig& c) { return std::to_string(c.*field); };
    } else if constexpr (std::is_same_v<T, long>) {
        b.set = [field](SimConfig& c, const std::string& s) { c.*field = static_cast<long>(std::llround(parse_double(s))); };
        b.get = [field](const SimConfig& c) { return std::to_string(c.*field); };
    } else if constexpr (std::is_same_v<T, std::uint64_t>) {
        b.set = [field](SimConfig& c, const std::string& s) { c.*field = std::stoull(s); };
        b.get = [field](const SimConfig& c) { return std::to_string(c.*field); };
    } else {
        static_assert(std::is_same_v<T, std::vector<double>>);
        b.set = [field](SimConfig& c, const std::string& s) { c.*field = parse_list(s); };
        b.get = [field](const SimConfig& c) { return format_list(c.*field); };
    }
    return b;
}

const std::vector<KeyBinding>& bindings() {
    static const std::vector<KeyBinding> table = {
        bind("m", &SimConfig::m),
        bind("power_levels_dbm", &SimConfig::power_levels_dbm),
        bind("bandwidth_hz", &SimConfig::bandwidth_hz),
        bind("noise_dbm", &SimConfig::noise_dbm),
        bind("carrier_ghz", &SimConfig::carrier_ghz),
        bind("veh_ant_height_m", &SimConfig::veh_ant_height_m),
        bind("bs_ant_height_m", &SimConfig::bs_ant_height_m),
        bind("veh_ant_gain_db", &SimConfig::veh_ant_gain_db),
        bind("bs_ant_gain_db", &SimConfig::bs_ant_gain_db),
        bind("veh_noise_figure_db", &SimConfig::veh_noise_figure_db),
        bind("bs_noise_figure_db", &SimConfig::bs_noise_figure_db),
        bind("cue_power_dbm", &SimConfig::cue_power_dbm),
        bind("v2i_shadow_db", &SimConfig::v2i_shadow_db),
        bind("v2v_shadow_db", &SimConfig::v2v_shadow_db),
        bind("neighbor_threshold_m", &SimConfig::neighbor_threshold_m),
        bind("lanes_per_direction", &SimConfig::lanes_per_direction),
        bind("lane_width_m", &SimConfig::lane_width_m),
        bind("road_half_length_m", &SimConfig::road_half_length_m),
        bind("speed_min_mps", &SimConfig::speed_min_mps),
        bind("speed_max_mps", &SimConfig::speed_max_mps),
        bind("turn_prob_left", &SimConfig::turn_prob_left),
        bind("turn_prob_right", &SimConfig::turn_prob_right),
        bind("t0_s", &SimConfig::t0_s),
        bind("delta_large_s", &SimConfig::delta_large_s),
        bind("delta_small_s", &SimConfig::delta_small_s),
        bind("payload_bytes", &SimConfig::payload_bytes),
        bind("lambda_c", &SimConfig::lambda_c),
        bind("lambda_p", &SimConfig::lambda_p),
        bind("fail_penalty", &SimConfig::fail_penalty),
        bind("sample_fanout", &SimConfig::sample_fanout),
        bind("embed_dim", &SimConfig::embed_dim),
        bind("sage_lr_initial", &SimConfig::sage_lr_initial),
        bind("sage_kappa", &SimConfig::sage_kappa),
        bind("sage_sync_period", &SimConfig::sage_sync_period),
        bind("sage_updates_per_burst", &SimConfig::sage_updates_per_burst),
        bind("sage_burst_every", &SimConfig::sage_burst_every),
        bind("sage_batch", &SimConfig::sage_batch),
        bind("sage_stale_after", &SimConfig::sage_stale_after),
        bind("q_lr_initial", &SimConfig::q_lr_initial),
        bind("lr_floor", &SimConfig::lr_floor),
        bind("lr_decay", &SimConfig::lr_decay),
        bind("lr_decay_every", &SimConfig::lr_decay_every),
        bind("discount_beta", &SimConfig::discount_beta),
        bind("eps_start", &SimConfig::eps_start),
        bind("eps_end", &SimConfig::eps_end),
        bind("eps_anneal_frac", &SimConfig::eps_anneal_frac),
        bind("replay_capacity", &SimConfig::replay_capacity),
        bind("batch_size", &SimConfig::batch_size),
        bind("target_sync_every", &SimConfig::target_sync_every),
        bind("iterations", &SimConfig::iterations),
        bind("reset_period", &SimConfig::reset_period),
        bind("vehicles", &SimConfig::vehicles),
        bind("vehicle_counts", &SimConfig::vehicle_counts),
        bind("test_resets", &SimConfig::test_resets),
        bind("test_samples", &SimConfig::test_samples),
        bind("dynamic_steps", &SimConfig::dynamic_steps),
        bind("arrival_p_inc", &SimConfig::arrival_p_inc),
        bind("decision_batches", &SimConfig::decision_batches),
        bind("seed", &SimConfig::seed),
        bind("metrics_every", &SimConfig::metrics_every),
    };
    return table;
}

const KeyBinding* find_binding(const std::string& key) {
    for (const auto& b : bindings())
        if (key == b.name) return &b;
    return nullptr;
}

std::string trim(const std::string& s) {
    std::size_t a = 0, b = s.size();
    while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
    while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
    return s.substr(a, b - a);
}

}  // namespace

int SimConfig::slots_per_period() const {
    return static_cast<int>(std::llround(t0_s / delta_small_s));
}

void SimConfig::validate() const {
    if (m < 1) throw ConfigError("m must be >= 1");
    for (std::size_t i = 1; i < power_levels_dbm.size(); ++i)
        if (power_levels_dbm[i] >= power_levels_dbm[i - 1])
            throw ConfigError("power_levels_dbm must be strictly decreasing");
    if (lambda_c < 0.0 || lambda_c > 1.0) throw ConfigError("lambda_c must be in [0, 1]");
    if (t0_s <= 0.0) throw ConfigError("t0_s must be > 0");
    if (sage_kappa < 0.0 || sage_kappa > 1.0) throw ConfigError("sage_kappa must be in [0, 1]");
    if (discount_beta < 0.0 || discount_beta > 1.0) throw ConfigError("discount_beta must be in [0, 1]");
    if (decision_batches < 1) throw ConfigError("decision_batches must be >= 1");
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (reset_period < 1) throw ConfigError("reset_period must be >= 1");
    if (bandwidth_hz <= 0.0) throw ConfigError("bandwidth_hz must be > 0");
    if (slots_per_period() < 1) throw ConfigError("t0_s must cover at least one small-scale slot");
}

SimConfig parse_config_text(const std::string& text, const SimConfig& base) {
    SimConfig cfg = base;
    std::istringstream is(text);
    std::string line;
    int line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        auto hash = line.find('#');
        if (hash != std::string::npos) line = line.substr(0, hash);
        line = trim(line);
        if (line.empty()) continue;
        auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config line " + std::to_string(line_no) + ": expected 'key = value'");
        std::string key = trim(line.substr(0, eq));
        std::string value = trim(line.substr(eq + 1));
        const KeyBinding* b = find_binding(key);
        if (!b) throw ConfigError("config line " + std::to_string(line_no) + ": unknown key '" + key + "'");
        try {
            b->set(cfg, value);
        } catch (const std::exception&) {
            throw ConfigError("config line " + std::to_string(line_no) + ": bad value '" + value + "' for '" + key + "'");
        }
    }
    return cfg;
}

SimConfig load_config_file(const std::string& path, const SimConfig& base) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str(), base);
}

void apply_env_overrides(SimConfig& cfg, const std::string& prefix) {
    for (const auto& b : bindings()) {
        std::string var = prefix;
        for (const char* p = b.name; *p; ++p) var += static_cast<char>(std::toupper(static_cast<unsigned char>(*p)));
        if (const char* value = std::getenv(var.c_str())) {
            try {
                b.set(cfg, value);
            } catch (const std::exception&) {
                throw ConfigError("bad value in environment variable " + var);
            }
        }
    }
}

std::string config_to_text(const SimConfig& cfg) {
    std::string out;
    for (const auto& b : bindings()) {
        out += b.name;
        out += " = ";
        out += b.get(cfg);
        out += "\n";
    }
    return out;
}

}  // namespace v2x
