#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <variant>
#include <vector>

#include "vnoc/packet.hpp"
#include "vnoc/router.hpp"
#include "vnoc/trace.hpp"

namespace vnoc {

// Placement policy: try an existing PE of the right type before loading a
// new one, or the other way round.
enum class Policy : uint8_t { ReconfigFirst, VirtualizeFirst };

// Raised by the fabric when a region finishes loading.
struct ReconfigDone {
  MeshCoordinate node;
};

using ManagerEvent = std::variant<Message, ReconfigDone>;

// Commands the manager issues outside the message fabric: kicking off a
// region load and flipping a router's task status bits. The engine applies
// them against the ground truth state.
struct SidebandOp {
  enum class Kind : uint8_t { StartReconfig, SetTaskStatus };
  Kind kind = Kind::StartReconfig;
  MeshCoordinate node;
  PEType type{};
  SlotId slot = kSlot0;
  TaskStatus status = TaskStatus::Inactive;
};

struct ManagerOutput {
  std::vector<Message> out;
  std::vector<SidebandOp> side;
};

// How each mapping request was satisfied, for stats and traces.
enum class MapDecision : uint8_t {
  Assign,
  EnableThenAssign,
  ReconfigThenAssign,
  EvictThenAssign,
  Queued,
};
const char* map_decision_name(MapDecision d);

// Resource directory plus allocation policy. Consumes one inbox item per
// step (a wire message or a reconfiguration completion), emits grant /
// control messages and sideband commands. It never touches routers or
// regions directly, which keeps it deterministic and unit testable.
class GlobalManager {
public:
  // Emitting a release can fan out into up to four messages (disable, two
  // grants, the ack), so inbox processing defers below this reserve.
  static constexpr std::size_t kSendReserve = 4;

  GlobalManager(MeshCoordinate node, bool virtualized, Policy policy,
                uint8_t num_types);

  void add_region(MeshCoordinate node, std::optional<PEType> initial_type);

  void post(ManagerEvent ev) { inbox_.push_back(std::move(ev)); }

  ManagerOutput step(uint64_t now, std::size_t send_free, TraceSink* trace);

  struct Entry {
    MeshCoordinate node;
    enum class Status : uint8_t { Empty, Reconfiguring, Configured };
    Status status = Status::Empty;
    std::optional<PEType> pe_type;
    std::array<std::optional<uint32_t>, 2> slot_task{};
    bool local1_on = false;  // mirror of the router's port state
    struct Parked {
      uint32_t task;
      VirtualAddress requester;
      SlotId slot;
      enum class How : uint8_t { AfterReconfig, AfterEnable } how;
    };
    std::optional<Parked> parked;
    uint64_t last_used = 0;
    uint64_t virtualized_cycles = 0;

    std::size_t active_slots() const {
      return (slot_task[0] ? 1u : 0u) + (slot_task[1] ? 1u : 0u);
    }
  };

  const std::vector<Entry>& directory() const { return directory_; }
  std::size_t pending_size() const { return pending_.size(); }
  std::size_t inbox_size() const { return inbox_.size(); }
  bool idle() const { return inbox_.empty(); }
  const std::array<uint64_t, 5>& decision_counts() const {
    return decision_counts_;
  }
  MeshCoordinate node() const { return node_; }

private:
  struct PendingReq {
    uint32_t task;
    PEType type;
    VirtualAddress requester;
  };

  void handle_message(const Message& m, uint64_t now, ManagerOutput& o,
                      TraceSink* trace);
  void handle_reconfig_done(MeshCoordinate node, uint64_t now,
                            ManagerOutput& o, TraceSink* trace);
  // Returns false when the request had to be queued (by the caller for
  // re-dispatch, or freshly).
  bool place_request(const PendingReq& req, uint64_t now, ManagerOutput& o,
                     TraceSink* trace);
  void redispatch_pending(uint64_t now, ManagerOutput& o, TraceSink* trace);
  void grant(Entry& e, SlotId slot, uint32_t task,
             const VirtualAddress& requester, uint64_t now, ManagerOutput& o);
  Entry* select_victim(PEType incoming);
  void note_decision(MapDecision d, uint32_t task, const Entry* e,
                     uint64_t now, TraceSink* trace);

  MeshCoordinate node_;
  bool virtualized_;
  Policy policy_;
  uint8_t num_types_;
  std::vector<Entry> directory_;  // kept sorted by (y, x)
  std::deque<PendingReq> pending_;
  std::deque<ManagerEvent> inbox_;
  std::array<uint64_t, 5> decision_counts_{};
};

}  // namespace vnoc
