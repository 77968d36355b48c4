#pragma once

#include <cmath>

namespace v2x::channel {

inline double db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double linear_to_db(double lin) { return 10.0 * std::log10(lin); }

/// Urban macro uplink path loss, 128.1 + 37.6 log10(d) with d in km taken as
/// the 3D distance between ground terminal and base-station antenna.
double v2i_path_loss_db(double distance_2d_m, double bs_height_m, double terminal_height_m);

/// Manhattan-grid street-level path loss with LOS/NLOS selection from the
/// axis-aligned separation of transmitter and receiver.
double v2v_path_loss_db(double dx_m, double dy_m, double carrier_ghz, double ant_height_m);

}  // namespace v2x::channel
