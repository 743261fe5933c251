#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "vnoc/packet.hpp"

namespace vnoc {

enum class Port : uint8_t {
  East = 0,
  West = 1,
  North = 2,
  South = 3,
  Local0 = 4,
  Local1 = 5,
};
inline constexpr std::size_t kNumPorts = 6;

// Fixed scan order for output service and round robin input scans.
inline constexpr std::array<Port, kNumPorts> kPortOrder = {
    Port::East, Port::West, Port::North, Port::South,
    Port::Local0, Port::Local1};

const char* port_name(Port p);
constexpr std::size_t port_index(Port p) { return static_cast<std::size_t>(p); }
constexpr bool is_local(Port p) {
  return p == Port::Local0 || p == Port::Local1;
}
// The input port a neighbour receives on when we transmit on `out`.
Port link_peer(Port out);

// Dimension ordered XY routing: correct x first, then y, then eject to the
// local port selected by the destination slot.
Port route_xy(MeshCoordinate current, const VirtualAddress& dst);

enum class TaskStatus : uint8_t { Inactive = 0, Active = 1 };

// Per-router shadow of the state the manager controls remotely.
struct VirtualizationController {
  std::array<TaskStatus, 2> task_status = {TaskStatus::Inactive,
                                           TaskStatus::Inactive};
  bool local1_enabled = false;
};

struct ControlCommand {
  enum class Op : uint8_t { EnableLocal1, DisableLocal1, SetTaskStatus };
  Op op = Op::EnableLocal1;
  SlotId slot = kSlot0;                       // SetTaskStatus only
  TaskStatus status = TaskStatus::Inactive;   // SetTaskStatus only
};

// Credit guarded flit FIFO with arrival stamps. A flit that arrives in cycle
// t is not forwardable before cycle t + 1; the stamp is what enforces that.
class InputBuffer {
public:
  explicit InputBuffer(uint32_t capacity) : capacity_(capacity) {}

  void push(const Flit& f, uint64_t now);
  Flit pop();
  bool empty() const { return fifo_.empty(); }
  std::size_t size() const { return fifo_.size(); }
  uint32_t capacity() const { return capacity_; }
  const Flit& front() const { return fifo_.front().flit; }
  uint64_t front_arrived() const { return fifo_.front().arrived; }

private:
  struct Entry {
    Flit flit;
    uint64_t arrived;
  };
  std::deque<Entry> fifo_;
  uint32_t capacity_;
};

struct Grant {
  Port in;
  Port out;
};

// One mesh router: per-port input buffers, per-output round robin
// arbitration, wormhole forwarding with credit based flow control. The
// engine moves latched flits across links and returns credits one cycle
// later; the router itself never touches its neighbours.
class Router {
public:
  Router(MeshCoordinate coord, bool has_local1, uint32_t buffer_depth);

  MeshCoordinate coord() const { return coord_; }
  bool has_local1() const { return has_local1_; }
  uint32_t buffer_depth() const { return buffer_depth_; }

  // Wiring, done once by the engine: declare which output links exist.
  void set_output_present(Port out, bool present);
  bool output_present(Port out) const { return out_[port_index(out)].present; }

  // Phase 1 (links): a flit arrives on one of our input buffers.
  void deliver(Port in, const Flit& f, uint64_t now);
  // Phase 1 (links): downstream consumed a flit we sent earlier on `out`.
  void return_credit(Port out);

  struct CycleResult {
    // Flits latched onto each output this cycle; the engine delivers them
    // to the neighbouring input (or local DR fifo) next phase 1.
    std::array<std::optional<Flit>, kNumPorts> sent{};
    // Inputs that popped a flit; the engine owes a credit upstream.
    std::array<bool, kNumPorts> popped{};
    std::vector<Grant> grants;
  };
  // Phase 2: arbitrate new grants, then forward at most one flit per owned
  // output, consuming credits.
  CycleResult cycle(uint64_t now);

  // Manager-directed sideband control. Throws IllegalTransition when the
  // precondition does not hold (disable with traffic in flight, activating
  // slot 1 while its port is off, any slot 1 action on a plain fabric).
  void apply_control(const ControlCommand& cmd);

  const VirtualizationController& vctrl() const { return vctrl_; }

  // Introspection for tests and invariant sweeps.
  std::size_t input_occupancy(Port in) const;
  uint32_t output_credits(Port out) const;
  std::optional<Port> output_owner(Port out) const;
  Port last_grant(Port out) const;
  void set_last_grant(Port out, Port in);  // test hook for arbitration cases
  bool quiescent() const;

private:
  struct InCursor {
    bool active = false;
    Port out = Port::East;
    std::size_t sent = 0;                   // flits of the packet forwarded
    std::optional<uint32_t> total = {};     // known once the size flit passes
  };
  struct Output {
    bool present = false;
    std::optional<Port> owner;
    Port last_grant = Port::Local1;  // scan starts at East on first use
    uint32_t credits = 0;
  };

  MeshCoordinate coord_;
  bool has_local1_;
  uint32_t buffer_depth_;
  std::vector<InputBuffer> in_;
  std::array<InCursor, kNumPorts> cur_{};
  std::array<Output, kNumPorts> out_{};
  VirtualizationController vctrl_;
};

}  // namespace vnoc
