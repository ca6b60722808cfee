#include "h2tail/bus.hpp"

#include <algorithm>
#include <stdexcept>

#include "h2tail/config.hpp"

namespace h2tail::bus {

namespace {

int parse_node_name(const std::string& name) {
    if (name == "fc" || name == "flightcontroller") return kFlightController;
    auto num_after = [&](const std::string& prefix) -> int {
        if (name.rfind(prefix, 0) != 0) return -1;
        try {
            return std::stoi(name.substr(prefix.size()));
        } catch (...) {
            return -1;
        }
    };
    if (int n = num_after("node"); n >= 1 && n <= kActuatorCount) return n;
    if (int n = num_after("motor"); n >= 1 && n <= kMotorCount) return n;
    if (int n = num_after("servo"); n >= 1 && n <= kSurfaceCount) return kMotorCount + n;
    throw ConfigError("unknown bus node: " + name);
}

}  // namespace

FailureSpec parse_failure_spec(const std::string& text) {
    std::vector<std::string> parts;
    size_t start = 0;
    while (start <= text.size()) {
        auto colon = text.find(':', start);
        if (colon == std::string::npos) {
            parts.push_back(text.substr(start));
            break;
        }
        parts.push_back(text.substr(start, colon - start));
        start = colon + 1;
    }
    if (parts.empty()) throw ConfigError("empty failure spec");

    FailureSpec spec;
    const std::string& kind = parts[0];
    if (kind == "cut") {
        if (parts.size() != 3) throw ConfigError("cut spec needs cut:<A|B>:<node>: " + text);
        if (parts[1] == "A") spec.bus = 0;
        else if (parts[1] == "B") spec.bus = 1;
        else throw ConfigError("bus must be A or B: " + text);
        spec.kind = FailureSpec::Kind::CutLink;
        spec.node = parse_node_name(parts[2]);
    } else if (kind == "kill") {
        if (parts.size() != 2) throw ConfigError("kill spec needs kill:<node>: " + text);
        if (parts[1] == "fuelcell") {
            spec.kind = FailureSpec::Kind::KillFuelCell;
        } else {
            spec.kind = FailureSpec::Kind::KillNode;
            spec.node = parse_node_name(parts[1]);
            if (spec.node == kFlightController)
                throw ConfigError("cannot kill the flight controller node");
        }
    } else if (kind == "drop") {
        if (parts.size() != 3) throw ConfigError("drop spec needs drop:<A|B>:<rate>: " + text);
        if (parts[1] == "A") spec.bus = 0;
        else if (parts[1] == "B") spec.bus = 1;
        else throw ConfigError("bus must be A or B: " + text);
        spec.kind = FailureSpec::Kind::DropRate;
        try {
            spec.rate = std::stod(parts[2]);
        } catch (...) {
            throw ConfigError("bad drop rate: " + text);
        }
        if (spec.rate < 0.0 || spec.rate > 1.0) throw ConfigError("drop rate outside [0,1]: " + text);
    } else if (kind == "reverse") {
        if (parts.size() != 2) throw ConfigError("reverse spec needs reverse:motorN: " + text);
        int node = parse_node_name(parts[1]);
        if (node < 1 || node > kMotorCount) throw ConfigError("reverse applies to motors only: " + text);
        spec.kind = FailureSpec::Kind::ReverseActuator;
        spec.actuator = node - 1;
    } else {
        throw ConfigError("unknown failure kind: " + text);
    }
    return spec;
}

void inject_failure(BusTopology& topo, const FailureSpec& spec) {
    switch (spec.kind) {
        case FailureSpec::Kind::CutLink:
            topo.link_ok[spec.bus][spec.node] = false;
            break;
        case FailureSpec::Kind::KillNode:
            topo.node_alive[spec.node] = false;
            break;
        case FailureSpec::Kind::DropRate:
            topo.drop_rate[spec.bus] = spec.rate;
            break;
        case FailureSpec::Kind::ReverseActuator:
        case FailureSpec::Kind::KillFuelCell:
            // handled by the plant / powerplant; nothing changes on the bus
            break;
    }
}

double failsafe_factor(double time_since_last_s, double hold_s, double ramp_s) {
    if (time_since_last_s <= hold_s) return 1.0;
    if (time_since_last_s >= hold_s + ramp_s) return 0.0;
    return 1.0 - (time_since_last_s - hold_s) / ramp_s;
}

CommandBus::CommandBus(const BusTopology& topo, uint64_t seed) : topo_(topo) {
    rng_state_ = seed * 0x9e3779b97f4a7c15ull + 0x2545f4914f6cdd1dull;
}

double CommandBus::uniform() {
    rng_state_ += 0x9e3779b97f4a7c15ull;
    uint64_t z = rng_state_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    z ^= z >> 31;
    return static_cast<double>(z >> 11) * 0x1.0p-53;
}

void CommandBus::flush_pending(double now_s) {
    for (int n = 1; n < kNodeCount; ++n) {
        NodeState& ns = nodes_[n];
        if (ns.pending && ns.pending_arrival_s <= now_s) {
            if (ns.pending_seq > ns.applied_seq) {
                ns.applied_seq = ns.pending_seq;
                ns.command = ns.pending_value;
                ns.has_command = true;
                ns.last_rx_time_s = ns.pending_arrival_s;
            }
            ns.pending = false;
        }
    }
}

DeliveryReport CommandBus::broadcast(const ActuatorVector& commands, double now_s) {
    flush_pending(now_s);
    ++seq_;
    ++stats_.frames_broadcast;
    acks_.fill(false);

    DeliveryReport report;
    report.path.fill(DeliveryPath::None);
    report.latency_s.fill(-1.0);

    // deterministic order: bus A before bus B, then node id
    for (int b = 0; b < 2; ++b) {
        if (!topo_.link_ok[b][kFlightController]) continue;
        for (int n = 1; n < kNodeCount; ++n) {
            if (!topo_.node_alive[n] || !topo_.link_ok[b][n]) continue;
            if (topo_.drop_rate[b] > 0.0 && uniform() < topo_.drop_rate[b]) continue;
            double lat = topo_.link_latency_s[b][n];
            DeliveryPath& p = report.path[n];
            if (p == DeliveryPath::None) {
                p = (b == 0) ? DeliveryPath::A : DeliveryPath::B;
                report.latency_s[n] = lat;
            } else {
                p = DeliveryPath::Both;
                report.latency_s[n] = std::min(report.latency_s[n], lat);
            }
        }
    }

    for (int n = 1; n < kNodeCount; ++n) {
        int actuator = n - 1;
        if (report.path[n] == DeliveryPath::None) {
            if (topo_.node_alive[n]) ++stats_.missed[actuator];
            continue;
        }
        ++report.reached_nodes;
        ++stats_.deliveries[actuator];
        acks_[actuator] = true;
        NodeState& ns = nodes_[n];
        // dedup by sequence: the command is applied once however many
        // buses carried it
        ns.pending = true;
        ns.pending_seq = seq_;
        ns.pending_value = commands[actuator];
        ns.pending_arrival_s = now_s + report.latency_s[n];
    }
    return report;
}

ActuatorVector CommandBus::node_outputs(double now_s) {
    flush_pending(now_s);
    ActuatorVector out = ActuatorVector::Zero();
    for (int n = 1; n < kNodeCount; ++n) {
        NodeState& ns = nodes_[n];
        if (!topo_.node_alive[n] || !ns.has_command) continue;
        double factor = failsafe_factor(now_s - ns.last_rx_time_s, failsafe_hold_s, failsafe_ramp_s);
        out[n - 1] = ns.command * factor;
    }
    return out;
}

}  // namespace h2tail::bus
