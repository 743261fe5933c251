#pragma once

#include <array>
#include <cstdint>
#include <deque>
#include <optional>
#include <vector>

#include "vnoc/packet.hpp"
#include "vnoc/router.hpp"
#include "vnoc/trace.hpp"

namespace vnoc {

inline constexpr uint32_t kSendQueueCapacity = 8;

// Reassembles one packet at a time from the flits a router ejects on one
// local port. av_receive holds the unit (and, through credits, the fabric
// behind it) until the assembled message has been taken.
struct DataReceive {
  std::deque<Flit> fifo;
  std::vector<Flit> accum;
  std::optional<uint32_t> remaining;  // flits left once the size flit is seen
  bool av_receive = false;
  std::optional<Message> assembled;
  uint32_t packet_tag = 0;

  bool idle() const {
    return fifo.empty() && accum.empty() && !av_receive;
  }
};

// Per-node network interface: two data receive units (one per local port),
// two single-message hand-off registers towards the attachment, and a send
// unit that serialises queued messages into flits, one per cycle, under
// credit control. Control messages (port enable/disable) are consumed here
// and acknowledged without involving the attachment.
class NetworkInterface {
public:
  NetworkInterface(MeshCoordinate node, bool has_local1, uint32_t fifo_depth);

  MeshCoordinate node() const { return node_; }

  // --- engine hooks, phase 1 ---
  void deliver_local_flit(SlotId dr, const Flit& f, uint64_t now);
  void return_send_credit(SlotId local_input);

  // --- engine hooks, phase 3 ---
  struct ReceiveResult {
    std::array<bool, 2> consumed{};  // credits owed to the router next cycle
  };
  // (i) each DR consumes at most one flit; (ii) assembled control messages
  // are applied to the router and acknowledged.
  ReceiveResult receive_step(Router& router, uint64_t now, TraceSink* trace,
                             PacketBook* book);
  // (iv) move assembled application messages into free hand-off registers.
  void refill_data_in(uint64_t now, TraceSink* trace);
  // (v) start or continue injecting the front of the send queue.
  void send_step(Router& router, uint64_t now, TraceSink* trace,
                 PacketBook* book);

  // (iii) is driven by the engine: it takes from data_in when the
  // attachment can accept.
  std::optional<Message>& data_in(SlotId s) { return data_in_[s]; }

  // --- attachment facing ---
  std::size_t send_free() const { return kSendQueueCapacity - queue_.size(); }
  // Stamps a node-unique id on the message and queues it. Throws
  // SendQueueFull when no space is left; polite callers check send_free()
  // and defer instead.
  uint16_t send_enqueue(Message msg);

  // --- introspection ---
  const DataReceive& dr(SlotId s) const { return dr_[s]; }
  std::size_t send_queue_size() const { return queue_.size() + (current_ ? 1 : 0); }
  bool sending() const { return current_.has_value(); }
  uint32_t send_credits(SlotId local_input) const {
    return send_credits_[local_input];
  }
  bool idle() const;
  void set_tag_packets(bool on) { tag_packets_ = on; }
  uint64_t injected_flits() const { return injected_flits_; }
  uint64_t consumed_flits() const { return consumed_flits_; }

private:
  struct InFlight {
    std::vector<Flit> flits;
    std::size_t cursor = 0;
    SlotId port = kSlot0;
  };

  MeshCoordinate node_;
  bool has_local1_;
  uint32_t fifo_depth_;
  bool tag_packets_ = true;
  std::array<DataReceive, 2> dr_{};
  std::array<std::optional<Message>, 2> data_in_{};
  std::deque<Message> queue_;
  std::optional<InFlight> current_;
  std::array<uint32_t, 2> send_credits_;
  uint16_t next_msg_id_ = 0;
  uint64_t injected_flits_ = 0;
  uint64_t consumed_flits_ = 0;
};

}  // namespace vnoc
