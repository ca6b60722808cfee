/*
  Dual redundant command network between the flight controller and the
  actuator nodes. Frames are semantic events with configurable latency
  and loss; nodes deduplicate by sequence number and fall back to a
  hold-then-ramp failsafe when commands stop arriving.

  Node ids: 0 = flight controller, 1..12 motor nodes, 13..16 servo nodes.
*/
#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "h2tail/actuators.hpp"

namespace h2tail::bus {

inline constexpr int kFlightController = 0;
inline constexpr int kNodeCount = 1 + kActuatorCount;  // fc + 12 motors + 4 servos

struct BusFrame {
    uint64_t sequence = 0;
    int sender = kFlightController;
    int target = -1;  // -1 = broadcast
    std::array<double, kActuatorCount> payload{};
    int payload_count = kActuatorCount;  // semantic size cap, <= 64 bytes equivalent
    double timestamp_s = 0.0;
};

enum class DeliveryPath { None, A, B, Both };

struct DeliveryReport {
    std::array<DeliveryPath, kNodeCount> path{};
    std::array<double, kNodeCount> latency_s{};
    int reached_nodes = 0;
};

struct BusTopology {
    // connector of each node onto each bus
    std::array<std::array<bool, kNodeCount>, 2> link_ok;
    std::array<std::array<double, kNodeCount>, 2> link_latency_s;
    std::array<double, 2> drop_rate{0.0, 0.0};
    std::array<bool, kNodeCount> node_alive;

    BusTopology() {
        for (auto& bus : link_ok) bus.fill(true);
        for (auto& bus : link_latency_s) bus.fill(0.001);
        node_alive.fill(true);
    }
};

struct FailureSpec {
    enum class Kind { CutLink, KillNode, DropRate, ReverseActuator, KillFuelCell };
    Kind kind = Kind::CutLink;
    int bus = 0;       // 0 = A, 1 = B
    int node = -1;     // CutLink / KillNode
    double rate = 0.0; // DropRate
    int actuator = -1; // ReverseActuator (motor index)
};

// grammar: cut:A:node5 | cut:B:fc | kill:node7 | drop:B:0.01 | reverse:motor1 | kill:fuelcell
FailureSpec parse_failure_spec(const std::string& text);
void inject_failure(BusTopology& topo, const FailureSpec& spec);

// failsafe schedule: hold the last command, then ramp to zero
double failsafe_factor(double time_since_last_s, double hold_s = 0.1, double ramp_s = 0.2);

struct NodeState {
    uint64_t applied_seq = 0;
    bool has_command = false;
    double command = 0.0;
    double last_rx_time_s = -1.0;
    // at most one frame can be in flight between command cycles
    bool pending = false;
    uint64_t pending_seq = 0;
    double pending_value = 0.0;
    double pending_arrival_s = 0.0;
};

struct BusStats {
    uint64_t frames_broadcast = 0;
    std::array<uint64_t, kActuatorCount> deliveries{};   // per actuator node
    std::array<uint64_t, kActuatorCount> missed{};       // broadcasts that reached it on no bus
};

class CommandBus {
  public:
    CommandBus() : CommandBus(BusTopology{}, 0) {}
    CommandBus(const BusTopology& topo, uint64_t seed);

    // broadcast the full actuator vector on both buses
    DeliveryReport broadcast(const ActuatorVector& commands, double now_s);

    // actuator outputs as the nodes currently drive them (latency + failsafe)
    ActuatorVector node_outputs(double now_s);

    // nodes that acknowledged the most recent broadcast (reachable and alive)
    const std::array<bool, kActuatorCount>& acks() const { return acks_; }

    BusTopology& topology() { return topo_; }
    const BusTopology& topology() const { return topo_; }
    const BusStats& stats() const { return stats_; }
    const NodeState& node(int id) const { return nodes_[id]; }

    double failsafe_hold_s = 0.1;
    double failsafe_ramp_s = 0.2;

  private:
    BusTopology topo_;
    std::array<NodeState, kNodeCount> nodes_{};
    std::array<bool, kActuatorCount> acks_{};
    BusStats stats_;
    uint64_t seq_ = 0;
    uint64_t rng_state_;

    double uniform();
    void flush_pending(double now_s);
};

}  // namespace h2tail::bus
