#include "v2x/mobility.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "v2x/errors.hpp"

namespace v2x {
namespace {

bool horizontal(Heading h) { return h == Heading::east || h == Heading::west; }

double axis_position(const Vehicle& v, Heading h) { return horizontal(h) ? v.x : v.y; }

// Signed travel direction along the lane axis.
double axis_sign(Heading h) { return (h == Heading::east || h == Heading::north) ? 1.0 : -1.0; }

Heading left_of(Heading h) {
    switch (h) {
        case Heading::east: return Heading::north;
        case Heading::west: return Heading::south;
        case Heading::north: return Heading::west;
        case Heading::south: return Heading::east;
    }
    return h;
}

Heading right_of(Heading h) {
    switch (h) {
        case Heading::east: return Heading::south;
        case Heading::west: return Heading::north;
        case Heading::north: return Heading::east;
        case Heading::south: return Heading::west;
    }
    return h;
}

}  // namespace

LaneGrid::LaneGrid(const SimConfig& cfg)
    : lanes_per_direction_(cfg.lanes_per_direction), half_length_(cfg.road_half_length_m) {
    const double w = cfg.lane_width_m;
    for (Heading h : {Heading::east, Heading::west, Heading::north, Heading::south}) {
        for (int k = 0; k < lanes_per_direction_; ++k) {
            const double off = w / 2.0 + w * k;
            // Right-hand traffic: lanes sit to the right of the travel direction.
            double signed_off = 0.0;
            switch (h) {
                case Heading::east: signed_off = -off; break;
                case Heading::west: signed_off = +off; break;
                case Heading::north: signed_off = +off; break;
                case Heading::south: signed_off = -off; break;
            }
            lanes_.push_back(Lane{h, signed_off});
        }
    }
}

std::array<double, 2> LaneGrid::position_on_lane(int lane, double t) const {
    const Lane& l = lanes_.at(lane);
    if (horizontal(l.heading)) return {t, l.offset};
    return {l.offset, t};
}

std::array<double, 2> LaneGrid::entry_position(int lane) const {
    const Lane& l = lanes_.at(lane);
    return position_on_lane(lane, -axis_sign(l.heading) * half_length_);
}

int LaneGrid::turn_target(int lane, bool left) const {
    const Lane& l = lanes_.at(lane);
    Heading target = left ? left_of(l.heading) : right_of(l.heading);
    const int rank = lane % lanes_per_direction_;
    const int dir_index = static_cast<int>(target);
    return dir_index * lanes_per_direction_ + rank;
}

Vehicle spawn_vehicle(int id, const LaneGrid& grid, const SimConfig& cfg, Rng& rng) {
    Vehicle v;
    v.id = id;
    v.lane = rng.uniform_int(static_cast<int>(grid.lanes().size()));
    v.speed_mps = rng.uniform(cfg.speed_min_mps, cfg.speed_max_mps);
    auto p = grid.position_on_lane(v.lane, rng.uniform(-grid.half_length(), grid.half_length()));
    v.x = p[0];
    v.y = p[1];
    return v;
}

Vehicle spawn_vehicle_at_entry(int id, const LaneGrid& grid, const SimConfig& cfg, Rng& rng) {
    Vehicle v;
    v.id = id;
    v.lane = rng.uniform_int(static_cast<int>(grid.lanes().size()));
    v.speed_mps = rng.uniform(cfg.speed_min_mps, cfg.speed_max_mps);
    auto p = grid.entry_position(v.lane);
    v.x = p[0];
    v.y = p[1];
    return v;
}

bool advance_vehicle(Vehicle& v, const LaneGrid& grid, const SimConfig& cfg, double dt, Rng& rng) {
    const Lane& l = grid.lanes().at(v.lane);
    const double sign = axis_sign(l.heading);
    const double before = axis_position(v, l.heading);
    double after = before + sign * v.speed_mps * dt;

    // Turning decision when the vehicle crosses the intersection center.
    const bool crossed = (before * sign < 0.0) && (after * sign >= 0.0);
    if (crossed) {
        const double u = rng.uniform();
        const bool left = u < cfg.turn_prob_left;
        const bool right = !left && u < cfg.turn_prob_left + cfg.turn_prob_right;
        if (left || right) {
            const double overshoot = std::abs(after);
            v.lane = grid.turn_target(v.lane, left);
            const Lane& nl = grid.lanes().at(v.lane);
            auto p = grid.position_on_lane(v.lane, axis_sign(nl.heading) * overshoot);
            v.x = p[0];
            v.y = p[1];
            return true;
        }
    }
    auto p = grid.position_on_lane(v.lane, after);
    v.x = p[0];
    v.y = p[1];
    return std::abs(after) <= grid.half_length();
}

double vehicle_distance(const Vehicle& a, const Vehicle& b) {
    return std::hypot(a.x - b.x, a.y - b.y);
}

void assign_destinations(std::vector<Vehicle>& vehicles, const SimConfig& cfg, Rng& rng) {
    const int s = static_cast<int>(vehicles.size());
    if (s < 4) throw StructuralError("assign_destinations needs at least 4 vehicles");
    std::vector<int> order(s);
    for (int i = 0; i < s; ++i) {
        auto& v = vehicles[i];
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) {
            const double da = vehicle_distance(v, vehicles[a]);
            const double db = vehicle_distance(v, vehicles[b]);
            if (da != db) return da < db;
            return vehicles[a].id < vehicles[b].id;
        });
        std::vector<int> within;
        for (int j : order) {
            if (j == i) continue;
            if (vehicle_distance(v, vehicles[j]) <= cfg.neighbor_threshold_m) within.push_back(j);
        }
        std::array<int, 3> chosen{};
        if (static_cast<int>(within.size()) >= 3) {
            auto picks = rng.sample_without_replacement(static_cast<int>(within.size()), 3);
            for (int k = 0; k < 3; ++k) chosen[k] = vehicles[within[picks[k]]].id;
        } else {
            int k = 0;
            for (int j : order) {
                if (j == i) continue;
                chosen[k++] = vehicles[j].id;
                if (k == 3) break;
            }
        }
        std::sort(chosen.begin(), chosen.end());
        v.destinations = chosen;
    }
}

}  // namespace v2x
