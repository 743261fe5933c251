#include "vnoc/network_interface.hpp"

#include <string>
#include <utility>

namespace vnoc {

NetworkInterface::NetworkInterface(MeshCoordinate node, bool has_local1,
                                   uint32_t fifo_depth)
    : node_(node),
      has_local1_(has_local1),
      fifo_depth_(fifo_depth),
      send_credits_{fifo_depth, fifo_depth} {}

void NetworkInterface::deliver_local_flit(SlotId dr, const Flit& f,
                                          uint64_t now) {
  (void)now;
  if (dr > kSlot1 || (dr == kSlot1 && !has_local1_)) {
    throw SimError(ErrorCode::SimulationFault,
                   "flit ejected on a data receive unit that does not exist");
  }
  auto& unit = dr_[dr];
  if (unit.fifo.size() >= fifo_depth_) {
    throw SimError(ErrorCode::SimulationFault,
                   "data receive fifo overflow: credit protocol violated");
  }
  unit.fifo.push_back(f);
}

void NetworkInterface::return_send_credit(SlotId local_input) {
  if (send_credits_[local_input] >= fifo_depth_) {
    throw SimError(ErrorCode::SimulationFault,
                   "send credit overflow towards the local input buffer");
  }
  ++send_credits_[local_input];
}

NetworkInterface::ReceiveResult NetworkInterface::receive_step(
    Router& router, uint64_t now, TraceSink* trace, PacketBook* book) {
  ReceiveResult result;

  // (i) consume at most one flit per unit, reassembling in place.
  for (SlotId s = 0; s < 2; ++s) {
    auto& unit = dr_[s];
    if (unit.av_receive || unit.fifo.empty()) continue;
    Flit f = unit.fifo.front();
    unit.fifo.pop_front();
    result.consumed[s] = true;
    ++consumed_flits_;
    unit.accum.push_back(f);
    if (unit.accum.size() == 1) {
      unit.packet_tag = f.tag ? f.tag->packet : 0;
    } else if (unit.accum.size() == 2) {
      unit.remaining = f.value;
    } else {
      --*unit.remaining;
    }
    if (unit.remaining && *unit.remaining == 0) {
      unit.assembled = decode_packet(unit.accum);
      unit.av_receive = true;
      if (book) book->mark_delivered(unit.packet_tag, now);
      if (trace) {
        TraceRecord r;
        r.cycle = now;
        r.event = "AVRCV";
        r.node_x = node_.x;
        r.node_y = node_.y;
        r.port_or_slot = std::to_string(s);
        if (unit.packet_tag) r.packet = unit.packet_tag;
        r.flit_ordinal = static_cast<uint16_t>(unit.accum.size());
        r.detail = message_kind_name(unit.assembled->kind);
        trace->record(r);
      }
      unit.accum.clear();
      unit.remaining.reset();
    }
  }

  // (ii) intercept assembled control messages; the acknowledgement races
  // nothing because it is queued before this cycle's send step runs.
  for (SlotId s = 0; s < 2; ++s) {
    auto& unit = dr_[s];
    if (!unit.av_receive || !unit.assembled ||
        !is_control(unit.assembled->kind)) {
      continue;
    }
    if (send_free() == 0) continue;  // keep holding; retry next cycle
    const Message m = *unit.assembled;
    Message ack;
    ack.src = {node_, kSlot0};
    ack.dst = m.src;
    const char* what = nullptr;
    if (m.kind == MessageKind::EnablePort) {
      router.apply_control({ControlCommand::Op::EnableLocal1});
      ack.kind = MessageKind::EnableAck;
      ack.payload = {0};
      what = "enable_local1";
    } else {
      bool busy = router.input_occupancy(Port::Local1) > 0 ||
                  router.output_owner(Port::Local1).has_value() ||
                  router.vctrl().task_status[1] == TaskStatus::Active ||
                  !dr_[1].idle();
      ack.kind = MessageKind::DisableAck;
      if (busy) {
        ack.payload = {1};
        what = "disable_local1 nack";
      } else {
        router.apply_control({ControlCommand::Op::DisableLocal1});
        ack.payload = {0};
        what = "disable_local1";
      }
    }
    send_enqueue(std::move(ack));
    if (trace) {
      TraceRecord r;
      r.cycle = now;
      r.event = "CTRL";
      r.node_x = node_.x;
      r.node_y = node_.y;
      r.port_or_slot = std::to_string(s);
      r.detail = what;
      trace->record(r);
    }
    unit.assembled.reset();
    unit.av_receive = false;
  }
  return result;
}

void NetworkInterface::refill_data_in(uint64_t now, TraceSink* trace) {
  (void)now;
  (void)trace;
  for (SlotId s = 0; s < 2; ++s) {
    auto& unit = dr_[s];
    if (!unit.av_receive || !unit.assembled || data_in_[s].has_value()) {
      continue;
    }
    data_in_[s] = std::move(unit.assembled);
    unit.assembled.reset();
    unit.av_receive = false;
  }
}

void NetworkInterface::send_step(Router& router, uint64_t now,
                                 TraceSink* trace, PacketBook* book) {
  if (!current_ && !queue_.empty()) {
    Message msg = std::move(queue_.front());
    queue_.pop_front();
    InFlight fl;
    // The local input port is chosen when injection starts: slot 1 sources
    // use the second port only while it is enabled; everything else, and
    // every plain-fabric packet, goes through port 0.
    fl.port = (msg.src.slot == kSlot1 && router.has_local1() &&
               router.vctrl().local1_enabled)
                  ? kSlot1
                  : kSlot0;
    fl.flits = encode_packet(msg);
    uint32_t packet_id = 0;
    if (book) {
      packet_id = book->open(msg, now, static_cast<uint16_t>(fl.flits.size()));
    }
    for (auto& f : fl.flits) {
      if (tag_packets_ && packet_id != 0) {
        f.tag->packet = packet_id;
      } else {
        f.tag.reset();
      }
    }
    current_ = std::move(fl);
  }
  if (!current_) return;

  auto& fl = *current_;
  if (send_credits_[fl.port] == 0) return;
  const Flit& f = fl.flits[fl.cursor];
  Port in = fl.port == kSlot1 ? Port::Local1 : Port::Local0;
  router.deliver(in, f, now);
  --send_credits_[fl.port];
  ++injected_flits_;
  if (trace) {
    TraceRecord r;
    r.cycle = now;
    r.event = "INJ";
    r.node_x = node_.x;
    r.node_y = node_.y;
    r.port_or_slot = port_name(in);
    if (f.tag) r.packet = f.tag->packet;
    r.flit_ordinal = static_cast<uint16_t>(fl.cursor);
    trace->record(r);
  }
  ++fl.cursor;
  if (fl.cursor == fl.flits.size()) {
    current_.reset();
  }
}

uint16_t NetworkInterface::send_enqueue(Message msg) {
  if (queue_.size() >= kSendQueueCapacity) {
    throw SimError(ErrorCode::SendQueueFull,
                   "send queue at (" + std::to_string(node_.x) + "," +
                       std::to_string(node_.y) + ") is full");
  }
  msg.id = next_msg_id_++;
  queue_.push_back(std::move(msg));
  return queue_.back().id;
}

bool NetworkInterface::idle() const {
  return !current_ && queue_.empty() && dr_[0].idle() && dr_[1].idle() &&
         !data_in_[0] && !data_in_[1];
}

}  // namespace vnoc
