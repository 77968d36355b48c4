#include "v2x/channel.hpp"

#include <algorithm>

namespace v2x::channel {
namespace {

constexpr double kLightSpeed = 3.0e8;

double los_db(double d_m, double carrier_ghz, double ant_height_m) {
    const double fc5 = carrier_ghz / 5.0;
    const double h_eff = ant_height_m - 1.0;
    const double d_bp = 4.0 * h_eff * h_eff * carrier_ghz * 1e9 / kLightSpeed;
    const double d = std::max(d_m, 3.0);
    if (d < d_bp) return 22.7 * std::log10(d) + 41.0 + 20.0 * std::log10(fc5);
    return 40.0 * std::log10(d) + 9.45 - 17.3 * std::log10(h_eff) - 17.3 * std::log10(h_eff) +
           2.7 * std::log10(fc5);
}

double nlos_db(double d_a, double d_b, double carrier_ghz, double ant_height_m) {
    const double n_j = std::max(2.8 - 0.0024 * d_b, 1.84);
    return los_db(d_a, carrier_ghz, ant_height_m) + 20.0 - 12.5 * n_j + 10.0 * n_j * std::log10(d_b) +
           3.0 * std::log10(carrier_ghz / 5.0);
}

}  // namespace

double v2i_path_loss_db(double distance_2d_m, double bs_height_m, double terminal_height_m) {
    const double dh = bs_height_m - terminal_height_m;
    const double d3d_km = std::sqrt(distance_2d_m * distance_2d_m + dh * dh) / 1000.0;
    return 128.1 + 37.6 * std::log10(std::max(d3d_km, 10.0 / 1000.0));
}

double v2v_path_loss_db(double dx_m, double dy_m, double carrier_ghz, double ant_height_m) {
    const double dx = std::abs(dx_m);
    const double dy = std::abs(dy_m);
    if (std::min(dx, dy) < 7.0) return los_db(std::hypot(dx, dy), carrier_ghz, ant_height_m);
    return std::min(nlos_db(dx, dy, carrier_ghz, ant_height_m), nlos_db(dy, dx, carrier_ghz, ant_height_m));
}

}  // namespace v2x::channel
