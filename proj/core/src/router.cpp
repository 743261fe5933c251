#include "vnoc/router.hpp"

#include <string>

namespace vnoc {

const char* port_name(Port p) {
  switch (p) {
    case Port::East: return "East";
    case Port::West: return "West";
    case Port::North: return "North";
    case Port::South: return "South";
    case Port::Local0: return "Local0";
    case Port::Local1: return "Local1";
  }
  return "?";
}

Port link_peer(Port out) {
  switch (out) {
    case Port::East: return Port::West;
    case Port::West: return Port::East;
    case Port::North: return Port::South;
    case Port::South: return Port::North;
    default:
      throw SimError(ErrorCode::SimulationFault,
                     "local ports have no link peer");
  }
}

Port route_xy(MeshCoordinate current, const VirtualAddress& dst) {
  if (dst.node.x > current.x) return Port::East;
  if (dst.node.x < current.x) return Port::West;
  if (dst.node.y > current.y) return Port::North;
  if (dst.node.y < current.y) return Port::South;
  return dst.slot == kSlot1 ? Port::Local1 : Port::Local0;
}

void InputBuffer::push(const Flit& f, uint64_t now) {
  if (fifo_.size() >= capacity_) {
    throw SimError(ErrorCode::SimulationFault,
                   "input buffer overflow: credit protocol violated");
  }
  fifo_.push_back(Entry{f, now});
}

Flit InputBuffer::pop() {
  Flit f = fifo_.front().flit;
  fifo_.pop_front();
  return f;
}

Router::Router(MeshCoordinate coord, bool has_local1, uint32_t buffer_depth)
    : coord_(coord), has_local1_(has_local1), buffer_depth_(buffer_depth) {
  in_.reserve(kNumPorts);
  for (std::size_t i = 0; i < kNumPorts; ++i) {
    in_.emplace_back(buffer_depth);
  }
}

void Router::set_output_present(Port out, bool present) {
  auto& o = out_[port_index(out)];
  o.present = present;
  o.credits = present ? buffer_depth_ : 0;
}

void Router::deliver(Port in, const Flit& f, uint64_t now) {
  if (in == Port::Local1 && !has_local1_) {
    throw SimError(ErrorCode::SimulationFault,
                   "flit delivered to a local1 input that does not exist");
  }
  in_[port_index(in)].push(f, now);
}

void Router::return_credit(Port out) {
  auto& o = out_[port_index(out)];
  if (!o.present) {
    throw SimError(ErrorCode::SimulationFault,
                   "credit returned on an absent output");
  }
  if (o.credits >= buffer_depth_) {
    throw SimError(ErrorCode::SimulationFault,
                   "credit overflow: more credits than buffer slots");
  }
  ++o.credits;
}

Router::CycleResult Router::cycle(uint64_t now) {
  CycleResult result;

  // Which output does each idle input's head-of-line header want? Decoded
  // once per cycle so that a misrouted or orphaned header faults loudly no
  // matter which outputs happen to be scanned.
  std::array<std::optional<Port>, kNumPorts> request{};
  for (Port in : kPortOrder) {
    const auto& buf = in_[port_index(in)];
    const auto& cur = cur_[port_index(in)];
    if (cur.active || buf.empty() || buf.front_arrived() >= now) continue;
    HeaderFields h = decode_header(buf.front().value);
    Port want = route_xy(coord_, {h.dst, h.slot});
    if (want == Port::Local1 && !(has_local1_ && vctrl_.local1_enabled)) {
      throw SimError(ErrorCode::SimulationFault,
                     "flit addressed to slot 1 of (" +
                         std::to_string(coord_.x) + "," +
                         std::to_string(coord_.y) +
                         ") but its second local port is not enabled");
    }
    if (!out_[port_index(want)].present) {
      throw SimError(ErrorCode::SimulationFault,
                     "header at (" + std::to_string(coord_.x) + "," +
                         std::to_string(coord_.y) + ") routes " +
                         port_name(want) + " but no such link exists");
    }
    request[port_index(in)] = want;
  }

  // Grant free outputs round robin, starting just past the last winner.
  for (Port out : kPortOrder) {
    auto& o = out_[port_index(out)];
    if (!o.present || o.owner) continue;
    std::size_t start = port_index(o.last_grant);
    for (std::size_t k = 1; k <= kNumPorts; ++k) {
      Port in = kPortOrder[(start + k) % kNumPorts];
      if (request[port_index(in)] != out) continue;
      o.owner = in;
      o.last_grant = in;
      auto& cur = cur_[port_index(in)];
      cur.active = true;
      cur.out = out;
      cur.sent = 0;
      cur.total.reset();
      result.grants.push_back(Grant{in, out});
      break;
    }
  }

  // Forward one flit per owned output, if the head flit is old enough and a
  // downstream slot is free.
  for (Port out : kPortOrder) {
    auto& o = out_[port_index(out)];
    if (!o.owner) continue;
    Port in = *o.owner;
    auto& buf = in_[port_index(in)];
    auto& cur = cur_[port_index(in)];
    if (buf.empty() || buf.front_arrived() >= now || o.credits == 0) continue;
    Flit f = buf.pop();
    --o.credits;
    result.sent[port_index(out)] = f;
    result.popped[port_index(in)] = true;
    ++cur.sent;
    if (cur.sent == 2) {
      cur.total = 2u + f.value;  // size flit counts the flits behind it
    }
    if (cur.total && cur.sent == *cur.total) {
      cur = InCursor{};
      o.owner.reset();
    }
  }
  return result;
}

void Router::apply_control(const ControlCommand& cmd) {
  switch (cmd.op) {
    case ControlCommand::Op::EnableLocal1:
      if (!has_local1_) {
        throw SimError(ErrorCode::IllegalTransition,
                       "cannot enable local1 on a router without one");
      }
      vctrl_.local1_enabled = true;
      return;
    case ControlCommand::Op::DisableLocal1: {
      if (!has_local1_) {
        throw SimError(ErrorCode::IllegalTransition,
                       "cannot disable local1 on a router without one");
      }
      if (!in_[port_index(Port::Local1)].empty() ||
          out_[port_index(Port::Local1)].owner ||
          vctrl_.task_status[1] == TaskStatus::Active) {
        throw SimError(ErrorCode::IllegalTransition,
                       "local1 still has traffic or an active task");
      }
      vctrl_.local1_enabled = false;
      return;
    }
    case ControlCommand::Op::SetTaskStatus: {
      if (cmd.slot > kSlot1) {
        throw SimError(ErrorCode::IllegalTransition, "no such slot");
      }
      if (cmd.slot == kSlot1 && !has_local1_) {
        throw SimError(ErrorCode::IllegalTransition,
                       "slot 1 does not exist on a plain fabric");
      }
      if (cmd.slot == kSlot1 && cmd.status == TaskStatus::Active &&
          !vctrl_.local1_enabled) {
        throw SimError(ErrorCode::IllegalTransition,
                       "slot 1 cannot be active while local1 is disabled");
      }
      vctrl_.task_status[cmd.slot] = cmd.status;
      return;
    }
  }
}

std::size_t Router::input_occupancy(Port in) const {
  return in_[port_index(in)].size();
}

uint32_t Router::output_credits(Port out) const {
  return out_[port_index(out)].credits;
}

std::optional<Port> Router::output_owner(Port out) const {
  return out_[port_index(out)].owner;
}

Port Router::last_grant(Port out) const {
  return out_[port_index(out)].last_grant;
}

void Router::set_last_grant(Port out, Port in) {
  out_[port_index(out)].last_grant = in;
}

bool Router::quiescent() const {
  for (std::size_t i = 0; i < kNumPorts; ++i) {
    if (!in_[i].empty() || cur_[i].active || out_[i].owner) return false;
  }
  return true;
}

}  // namespace vnoc
