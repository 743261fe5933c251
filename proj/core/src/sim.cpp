#include "vnoc/sim.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace vnoc {

namespace {

const char* attach_name(int a) {
  switch (a) {
    case 0: return "none";
    case 1: return "region";
    case 2: return "host";
    case 3: return "manager";
  }
  return "?";
}

}  // namespace

Simulation::Simulation(SimPlan plan) : plan_(std::move(plan)) {
  if (plan_.width == 0 || plan_.height == 0 || plan_.width > kMaxMeshDim ||
      plan_.height > kMaxMeshDim) {
    throw SimError(ErrorCode::InvalidConfig,
                   "mesh must be between 1x1 and 16x16");
  }
  if (plan_.buffer_depth == 0) {
    throw SimError(ErrorCode::InvalidConfig, "buffer depth must be positive");
  }
  if (plan_.pe_queue_depth == 0) {
    throw SimError(ErrorCode::InvalidConfig,
                   "pe queue depth must be positive");
  }
  bool vnoc = plan_.mode == Mode::Vnoc;
  const std::size_t n = std::size_t(plan_.width) * plan_.height;
  nodes_.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    nodes_.emplace_back(coord(i), vnoc, plan_.buffer_depth);
    nodes_.back().ni.set_tag_packets(plan_.tag_packets);
    Router& r = nodes_.back().router;
    MeshCoordinate c = coord(i);
    r.set_output_present(Port::East, c.x + 1u < plan_.width);
    r.set_output_present(Port::West, c.x > 0);
    r.set_output_present(Port::North, c.y + 1u < plan_.height);
    r.set_output_present(Port::South, c.y > 0);
    r.set_output_present(Port::Local0, true);
    r.set_output_present(Port::Local1, vnoc);
  }

  auto claim = [&](MeshCoordinate c, NodeState::Attach a) -> NodeState& {
    if (c.x >= plan_.width || c.y >= plan_.height) {
      throw SimError(ErrorCode::InvalidConfig,
                     "node (" + std::to_string(c.x) + "," +
                         std::to_string(c.y) + ") is outside the mesh");
    }
    NodeState& node = nodes_[index(c)];
    if (node.attach != NodeState::Attach::None) {
      throw SimError(ErrorCode::InvalidConfig,
                     "node (" + std::to_string(c.x) + "," +
                         std::to_string(c.y) + ") assigned twice (" +
                         attach_name(int(node.attach)) + " and " +
                         attach_name(int(a)) + ")");
    }
    node.attach = a;
    return node;
  };

  for (const auto& p : plan_.prrs) {
    NodeState& node = claim(p.node, NodeState::Attach::Region);
    node.region_index = static_cast<int>(prrs_.size());
    PRRState prr;
    prr.node = p.node;
    prr.queue_capacity = plan_.pe_queue_depth;
    if (p.initial) {
      plan_.catalog.at(*p.initial);  // UnknownPEType when out of range
      prr.status = PRRState::Status::Configured;
      prr.pe_type = p.initial;
      prr.pe.emplace(p.node, *p.initial, plan_.pe_queue_depth);
    }
    prrs_.push_back(std::move(prr));
  }

  if (plan_.manager) {
    claim(*plan_.manager, NodeState::Attach::Manager);
    mgr_node_ = index(*plan_.manager);
    mgr_ = std::make_unique<GlobalManager>(
        *plan_.manager, vnoc, plan_.policy,
        static_cast<uint8_t>(plan_.catalog.size()));
    for (const auto& p : plan_.prrs) {
      mgr_->add_region(p.node, p.initial);
    }
  }

  for (MeshCoordinate h : plan_.hosts) {
    claim(h, NodeState::Attach::Host);
  }

  if (!plan_.tasks.empty()) {
    if (!plan_.manager) {
      throw SimError(ErrorCode::InvalidConfig,
                     "tasks need a manager node");
    }
    if (plan_.hosts.empty()) {
      throw SimError(ErrorCode::InvalidConfig, "tasks need host nodes");
    }
  }
  VirtualAddress mgr_va{plan_.manager.value_or(MeshCoordinate{}), kSlot0};
  for (std::size_t t = 0; t < plan_.tasks.size(); ++t) {
    const TaskSpec& spec = plan_.tasks[t];
    MeshCoordinate host = plan_.hosts[t % plan_.hosts.size()];
    ServiceKernel kernel = plan_.catalog.at(spec.pe_type).kernel;
    tasks_.emplace_back(spec, host, mgr_va, kernel, plan_.operands);
    nodes_[index(host)].task_indices.push_back(static_cast<int>(t));
  }
}

Simulation::NodeState* Simulation::neighbour(std::size_t i, Port out) {
  MeshCoordinate c = coord(i);
  switch (out) {
    case Port::East: return &nodes_[index({uint8_t(c.x + 1), c.y})];
    case Port::West: return &nodes_[index({uint8_t(c.x - 1), c.y})];
    case Port::North: return &nodes_[index({c.x, uint8_t(c.y + 1)})];
    case Port::South: return &nodes_[index({c.x, uint8_t(c.y - 1)})];
    default: return nullptr;
  }
}

void Simulation::phase_links() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    NodeState& node = nodes_[i];
    for (Port p : kPortOrder) {
      auto& latch = node.out_latch[port_index(p)];
      if (latch) {
        Flit f = *latch;
        latch.reset();
        if (is_local(p)) {
          node.ni.deliver_local_flit(p == Port::Local1 ? kSlot1 : kSlot0, f,
                                     cycle_);
        } else {
          neighbour(i, p)->router.deliver(link_peer(p), f, cycle_);
        }
      }
      if (node.credit_latch[port_index(p)]) {
        node.credit_latch[port_index(p)] = false;
        if (is_local(p)) {
          node.ni.return_send_credit(p == Port::Local1 ? kSlot1 : kSlot0);
        } else {
          neighbour(i, p)->router.return_credit(link_peer(p));
        }
      }
    }
    for (SlotId s = 0; s < 2; ++s) {
      if (node.dr_credit_latch[s]) {
        node.dr_credit_latch[s] = false;
        node.router.return_credit(s == kSlot1 ? Port::Local1 : Port::Local0);
      }
    }
  }
}

void Simulation::phase_routers() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    NodeState& node = nodes_[i];
    Router::CycleResult r = node.router.cycle(cycle_);
    for (const Grant& g : r.grants) {
      if (!trace_) break;
      TraceRecord rec;
      rec.cycle = cycle_;
      rec.event = "GRANT";
      rec.node_x = node.router.coord().x;
      rec.node_y = node.router.coord().y;
      rec.port_or_slot = port_name(g.out);
      rec.detail = std::string("in=") + port_name(g.in);
      trace_->record(rec);
    }
    for (Port p : kPortOrder) {
      if (!r.sent[port_index(p)]) continue;
      node.out_latch[port_index(p)] = r.sent[port_index(p)];
      if (trace_) {
        const Flit& f = *r.sent[port_index(p)];
        TraceRecord rec;
        rec.cycle = cycle_;
        rec.event = "FWD";
        rec.node_x = node.router.coord().x;
        rec.node_y = node.router.coord().y;
        rec.port_or_slot = port_name(p);
        if (f.tag) {
          rec.packet = f.tag->packet;
          rec.flit_ordinal = f.tag->ordinal;
        }
        trace_->record(rec);
      }
    }
    for (Port p : kPortOrder) {
      node.credit_latch[port_index(p)] =
          node.credit_latch[port_index(p)] || r.popped[port_index(p)];
    }
  }
}

void Simulation::phase_interfaces() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    NodeState& node = nodes_[i];
    auto rr = node.ni.receive_step(node.router, cycle_, trace_, &book_);
    for (SlotId s = 0; s < 2; ++s) {
      node.dr_credit_latch[s] = node.dr_credit_latch[s] || rr.consumed[s];
    }
    for (SlotId s = 0; s < 2; ++s) {
      attach_deliver(i, s);
    }
    node.ni.refill_data_in(cycle_, trace_);
    node.ni.send_step(node.router, cycle_, trace_, &book_);
  }
}

void Simulation::attach_deliver(std::size_t i, SlotId slot) {
  NodeState& node = nodes_[i];
  auto& reg = node.ni.data_in(slot);
  if (!reg) return;
  auto trace_datain = [&]() {
    if (!trace_) return;
    TraceRecord rec;
    rec.cycle = cycle_;
    rec.event = "DATAIN";
    rec.node_x = node.router.coord().x;
    rec.node_y = node.router.coord().y;
    rec.port_or_slot = std::to_string(slot);
    rec.detail = message_kind_name(reg->kind);
    trace_->record(rec);
  };
  switch (node.attach) {
    case NodeState::Attach::None:
      // Message sink: synthetic traffic ends here.
      trace_datain();
      reg.reset();
      return;
    case NodeState::Attach::Region: {
      PRRState& prr = prrs_[node.region_index];
      if (reg->kind != MessageKind::ComputeReq) {
        throw SimError(ErrorCode::UnexpectedMessage,
                       std::string("region received ") +
                           message_kind_name(reg->kind));
      }
      if (!prr.pe) {
        throw SimError(ErrorCode::UnexpectedMessage,
                       "compute request for an unconfigured region");
      }
      if (!prr.pe->accepts(slot)) return;  // queue full: hold the register
      trace_datain();
      prr.pe->enqueue(slot, std::move(*reg), cycle_);
      reg.reset();
      return;
    }
    case NodeState::Attach::Host:
      trace_datain();
      node.inbox.push_back(std::move(*reg));
      reg.reset();
      return;
    case NodeState::Attach::Manager:
      trace_datain();
      mgr_->post(std::move(*reg));
      reg.reset();
      return;
  }
}

void Simulation::phase_attachments() {
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    NodeState& node = nodes_[i];
    switch (node.attach) {
      case NodeState::Attach::Region: {
        PRRState& prr = prrs_[node.region_index];
        if (prr.pe) {
          bool can_send = node.ni.send_free() > 0;
          auto reply =
              prr.pe->step(cycle_, plan_.catalog, can_send, trace_);
          if (reply) node.ni.send_enqueue(std::move(*reply));
        }
        break;
      }
      case NodeState::Attach::Host:
        host_phase(i);
        break;
      case NodeState::Attach::Manager:
        manager_phase(i);
        break;
      case NodeState::Attach::None:
        break;
    }
  }
}

void Simulation::host_phase(std::size_t i) {
  NodeState& node = nodes_[i];
  // One inbound message per cycle. Deliveries can cascade an emission, so
  // they wait for send space rather than failing.
  if (!node.inbox.empty() && node.ni.send_free() > 0) {
    Message m = std::move(node.inbox.front());
    node.inbox.pop_front();
    int who = -1;
    for (int t : node.task_indices) {
      if (tasks_[t].wants(m)) {
        who = t;
        break;
      }
    }
    if (who < 0) {
      throw SimError(ErrorCode::UnexpectedMessage,
                     std::string("no task at host (") +
                         std::to_string(node.router.coord().x) + "," +
                         std::to_string(node.router.coord().y) +
                         ") expects " + message_kind_name(m.kind));
    }
    auto emitted = tasks_[who].deliver(m, cycle_);
    if (emitted) node.ni.send_enqueue(std::move(*emitted));
  }
  for (int t : node.task_indices) {
    if (node.ni.send_free() == 0) break;
    auto emitted = tasks_[t].tick(cycle_);
    if (!emitted) continue;
    bool is_request = emitted->kind == MessageKind::ComputeReq;
    uint16_t id = node.ni.send_enqueue(std::move(*emitted));
    if (is_request) tasks_[t].note_request_id(id, cycle_);
  }
}

void Simulation::manager_phase(std::size_t i) {
  NodeState& node = nodes_[i];
  ManagerOutput out = mgr_->step(cycle_, node.ni.send_free(), trace_);
  for (Message& m : out.out) {
    node.ni.send_enqueue(std::move(m));
  }
  for (const SidebandOp& op : out.side) {
    NodeState& target = nodes_[index(op.node)];
    if (op.kind == SidebandOp::Kind::StartReconfig) {
      if (target.region_index < 0) {
        throw SimError(ErrorCode::SimulationFault,
                       "reconfiguration aimed at a non region node");
      }
      prr_reconfigure(prrs_[target.region_index], op.type, cycle_,
                      plan_.service.t_recfg, trace_);
    } else {
      target.router.apply_control(
          {ControlCommand::Op::SetTaskStatus, op.slot, op.status});
    }
  }
}

void Simulation::phase_regions() {
  for (auto& prr : prrs_) {
    if (prr_tick(prr, cycle_, trace_) && mgr_) {
      mgr_->post(ReconfigDone{prr.node});
    }
  }
}

void Simulation::step() {
  phase_links();
  phase_routers();
  phase_interfaces();
  phase_attachments();
  phase_regions();
  ++cycle_;
}

bool Simulation::all_tasks_done() const {
  return std::all_of(tasks_.begin(), tasks_.end(),
                     [](const TaskHost& t) { return t.done(); });
}

bool Simulation::network_drained() const {
  for (const auto& node : nodes_) {
    if (!node.router.quiescent() || !node.ni.idle() || !node.inbox.empty()) {
      return false;
    }
    for (Port p : kPortOrder) {
      if (node.out_latch[port_index(p)]) return false;
    }
  }
  if (mgr_ && !mgr_->idle()) return false;
  return true;
}

uint16_t Simulation::inject(MeshCoordinate node, Message msg) {
  return nodes_[index(node)].ni.send_enqueue(std::move(msg));
}

const PRRState* Simulation::prr_at(MeshCoordinate c) const {
  const NodeState& node = nodes_[index(c)];
  if (node.region_index < 0) return nullptr;
  return &prrs_[node.region_index];
}

uint64_t Simulation::run() {
  while (!all_tasks_done()) {
    if (cycle_ >= plan_.watchdog) {
      std::size_t done =
          std::count_if(tasks_.begin(), tasks_.end(),
                        [](const TaskHost& t) { return t.done(); });
      throw SimError(ErrorCode::WatchdogTimeout,
                     std::to_string(done) + "/" +
                         std::to_string(tasks_.size()) +
                         " tasks finished within " +
                         std::to_string(plan_.watchdog) + " cycles");
    }
    step();
  }
  uint64_t deadline = cycle_ + 100000;
  while (!network_drained()) {
    if (cycle_ >= deadline) {
      throw SimError(ErrorCode::SimulationFault,
                     "fabric failed to drain after the last task finished");
    }
    step();
  }
  return makespan();
}

uint64_t Simulation::flits_injected() const {
  uint64_t total = 0;
  for (const auto& node : nodes_) total += node.ni.injected_flits();
  return total;
}

uint64_t Simulation::flits_consumed() const {
  uint64_t total = 0;
  for (const auto& node : nodes_) total += node.ni.consumed_flits();
  return total;
}

uint64_t Simulation::flits_in_flight() const {
  uint64_t total = 0;
  for (const auto& node : nodes_) {
    for (Port p : kPortOrder) {
      total += node.router.input_occupancy(p);
      if (node.out_latch[port_index(p)]) ++total;
    }
    for (SlotId s = 0; s < 2; ++s) {
      total += node.ni.dr(s).fifo.size();
    }
  }
  return total;
}

uint64_t Simulation::makespan() const {
  uint64_t m = 0;
  for (const auto& t : tasks_) {
    if (t.done()) m = std::max(m, t.finish_cycle());
  }
  return m;
}

}  // namespace vnoc
