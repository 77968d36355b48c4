#pragma once

#include <array>
#include <vector>

#include "v2x/config.hpp"
#include "v2x/rng.hpp"

namespace v2x {

enum class Heading { east, west, north, south };

struct Lane {
    Heading heading;
    double offset;  // y for east/west lanes, x for north/south lanes
};

/// Two perpendicular multi-lane roads crossing at the origin, right-hand traffic.
class LaneGrid {
public:
    explicit LaneGrid(const SimConfig& cfg);

    const std::vector<Lane>& lanes() const { return lanes_; }
    double half_length() const { return half_length_; }

    /// Coordinates of a point at signed travel-axis position t on a lane.
    std::array<double, 2> position_on_lane(int lane, double t) const;
    /// Entry point of a lane (upstream map edge).
    std::array<double, 2> entry_position(int lane) const;
    /// Lane of same rank in the direction reached by turning left/right.
    int turn_target(int lane, bool left) const;

private:
    std::vector<Lane> lanes_;
    int lanes_per_direction_;
    double half_length_;
};

struct Vehicle {
    int id = -1;
    double x = 0.0;
    double y = 0.0;
    int lane = 0;
    double speed_mps = 0.0;
    std::array<int, 3> destinations = {-1, -1, -1};  // receiver vehicle ids
};

Vehicle spawn_vehicle(int id, const LaneGrid& grid, const SimConfig& cfg, Rng& rng);
Vehicle spawn_vehicle_at_entry(int id, const LaneGrid& grid, const SimConfig& cfg, Rng& rng);

/// Moves one vehicle for dt seconds, turning at the intersection with the
/// configured probabilities. Returns false when the vehicle left the map.
bool advance_vehicle(Vehicle& v, const LaneGrid& grid, const SimConfig& cfg, double dt, Rng& rng);

/// Picks 3 destinations per vehicle: uniformly among vehicles within the
/// neighbor threshold when at least 3 qualify, otherwise the 3 nearest.
/// Requires at least 4 vehicles.
void assign_destinations(std::vector<Vehicle>& vehicles, const SimConfig& cfg, Rng& rng);

double vehicle_distance(const Vehicle& a, const Vehicle& b);

}  // namespace v2x
