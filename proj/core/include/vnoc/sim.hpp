#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <memory>
#include <optional>
#include <vector>

#include "vnoc/global_manager.hpp"
#include "vnoc/network_interface.hpp"
#include "vnoc/packet.hpp"
#include "vnoc/processing_element.hpp"
#include "vnoc/router.hpp"
#include "vnoc/trace.hpp"
#include "vnoc/workload.hpp"

namespace vnoc {

enum class Mode : uint8_t { Baseline, Vnoc };

// Structural description of one world. Config parsing produces one of
// these; tests build small synthetic ones directly (no manager, no hosts).
struct SimPlan {
  uint8_t width = 3;
  uint8_t height = 3;
  Mode mode = Mode::Vnoc;
  Policy policy = Policy::ReconfigFirst;
  uint32_t buffer_depth = 4;
  uint32_t pe_queue_depth = 4;
  ServiceModelParams service;
  ServiceCatalog catalog = ServiceCatalog::standard({});
  std::optional<MeshCoordinate> manager;
  std::vector<MeshCoordinate> hosts;
  struct PrrPlan {
    MeshCoordinate node;
    std::optional<PEType> initial;
  };
  std::vector<PrrPlan> prrs;
  std::vector<TaskSpec> tasks;  // task i runs on hosts[i % hosts.size()]
  OperandConfig operands;
  uint64_t watchdog = 50'000'000;
  bool tag_packets = true;
};

// Cycle level world: a width x height mesh of router + network interface
// pairs, each with one attachment behind it. Every cycle runs the same five
// phases in row major node order:
//   1. deliver last cycle's latched flits and credits across links
//   2. routers arbitrate and forward (latching onto outputs)
//   3. network interfaces receive, hand off, and inject
//   4. attachments act (PEs serve, hosts and the manager react)
//   5. region load timers advance
// Identical plans therefore produce identical histories, flit for flit.
class Simulation {
public:
  explicit Simulation(SimPlan plan);

  void step();
  // Steps until every task is done (plus a short drain so the fabric is
  // empty), enforcing the watchdog. Returns the makespan.
  uint64_t run();

  uint64_t cycle() const { return cycle_; }
  bool all_tasks_done() const;
  bool network_drained() const;

  // Direct message injection through a node's send queue (tests and
  // synthetic traffic); returns the stamped message id.
  uint16_t inject(MeshCoordinate node, Message msg);

  Router& router_at(MeshCoordinate c) { return nodes_[index(c)].router; }
  NetworkInterface& ni_at(MeshCoordinate c) { return nodes_[index(c)].ni; }
  const PRRState* prr_at(MeshCoordinate c) const;
  GlobalManager* manager() { return mgr_ ? mgr_.get() : nullptr; }
  const std::vector<TaskHost>& tasks() const { return tasks_; }
  const std::vector<PRRState>& regions() const { return prrs_; }
  const PacketBook& packets() const { return book_; }
  const SimPlan& plan() const { return plan_; }

  void set_trace(TraceSink* sink) { trace_ = sink; }

  uint64_t flits_injected() const;
  uint64_t flits_consumed() const;
  // Flits sitting in router input buffers, DR fifos, partial assemblies and
  // output latches right now.
  uint64_t flits_in_flight() const;

  uint64_t makespan() const;

private:
  struct NodeState {
    Router router;
    NetworkInterface ni;
    enum class Attach : uint8_t { None, Region, Host, Manager } attach =
        Attach::None;
    int region_index = -1;
    std::vector<int> task_indices;
    std::deque<Message> inbox;  // host side software queue
    // Latches written in phase 2/3, applied next phase 1.
    std::array<std::optional<Flit>, kNumPorts> out_latch{};
    std::array<bool, kNumPorts> credit_latch{};
    std::array<bool, 2> dr_credit_latch{};

    NodeState(MeshCoordinate c, bool has_local1, uint32_t depth)
        : router(c, has_local1, depth), ni(c, has_local1, depth) {}
  };

  std::size_t index(MeshCoordinate c) const {
    return static_cast<std::size_t>(c.y) * plan_.width + c.x;
  }
  MeshCoordinate coord(std::size_t i) const {
    return {static_cast<uint8_t>(i % plan_.width),
            static_cast<uint8_t>(i / plan_.width)};
  }
  NodeState* neighbour(std::size_t i, Port out);

  void phase_links();
  void phase_routers();
  void phase_interfaces();
  void phase_attachments();
  void phase_regions();

  void attach_deliver(std::size_t i, SlotId slot);
  void host_phase(std::size_t i);
  void manager_phase(std::size_t i);

  SimPlan plan_;
  std::vector<NodeState> nodes_;
  std::vector<PRRState> prrs_;
  std::vector<TaskHost> tasks_;
  std::unique_ptr<GlobalManager> mgr_;
  std::size_t mgr_node_ = 0;
  PacketBook book_;
  TraceSink* trace_ = nullptr;
  uint64_t cycle_ = 0;
};

}  // namespace vnoc
