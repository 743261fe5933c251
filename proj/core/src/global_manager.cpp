#include "vnoc/global_manager.hpp"

#include <algorithm>
#include <string>

namespace vnoc {

const char* map_decision_name(MapDecision d) {
  switch (d) {
    case MapDecision::Assign: return "assign";
    case MapDecision::EnableThenAssign: return "enable_then_assign";
    case MapDecision::ReconfigThenAssign: return "reconfig_then_assign";
    case MapDecision::EvictThenAssign: return "evict_then_assign";
    case MapDecision::Queued: return "queued";
  }
  return "?";
}

GlobalManager::GlobalManager(MeshCoordinate node, bool virtualized,
                             Policy policy, uint8_t num_types)
    : node_(node),
      virtualized_(virtualized),
      policy_(policy),
      num_types_(num_types) {}

void GlobalManager::add_region(MeshCoordinate node,
                               std::optional<PEType> initial_type) {
  Entry e;
  e.node = node;
  if (initial_type) {
    e.status = Entry::Status::Configured;
    e.pe_type = initial_type;
  }
  directory_.push_back(e);
  std::sort(directory_.begin(), directory_.end(),
            [](const Entry& a, const Entry& b) {
              return std::pair(a.node.y, a.node.x) <
                     std::pair(b.node.y, b.node.x);
            });
}

ManagerOutput GlobalManager::step(uint64_t now, std::size_t send_free,
                                  TraceSink* trace) {
  ManagerOutput o;
  // One inbox item per cycle, and only with enough send headroom for the
  // worst case fan out, so emission never has to fail midway.
  if (!inbox_.empty() && send_free >= kSendReserve) {
    ManagerEvent ev = std::move(inbox_.front());
    inbox_.pop_front();
    if (auto* msg = std::get_if<Message>(&ev)) {
      handle_message(*msg, now, o, trace);
    } else {
      handle_reconfig_done(std::get<ReconfigDone>(ev).node, now, o, trace);
    }
  }
  for (auto& e : directory_) {
    if (e.slot_task[0] && e.slot_task[1]) ++e.virtualized_cycles;
  }
  return o;
}

void GlobalManager::handle_message(const Message& m, uint64_t now,
                                   ManagerOutput& o, TraceSink* trace) {
  switch (m.kind) {
    case MessageKind::MapReq: {
      if (m.payload.size() != 2) {
        throw SimError(ErrorCode::ArityMismatch,
                       "mapping request needs [task, type]");
      }
      uint32_t task = m.payload[0];
      if (m.payload[1] >= num_types_) {
        throw SimError(ErrorCode::UnknownPEType,
                       "mapping request names type code " +
                           std::to_string(m.payload[1]));
      }
      PendingReq req{task, PEType{static_cast<uint8_t>(m.payload[1])},
                     m.src};
      for (const auto& e : directory_) {
        if (e.slot_task[0] == task || e.slot_task[1] == task) {
          throw SimError(ErrorCode::UnexpectedMessage,
                         "task " + std::to_string(task) +
                             " requested a mapping twice");
        }
      }
      for (const auto& p : pending_) {
        if (p.task == task) {
          throw SimError(ErrorCode::UnexpectedMessage,
                         "task " + std::to_string(task) +
                             " is already waiting for a mapping");
        }
      }
      if (!place_request(req, now, o, trace)) {
        pending_.push_back(req);
        note_decision(MapDecision::Queued, task, nullptr, now, trace);
      }
      return;
    }
    case MessageKind::Release: {
      if (m.payload.size() != 1) {
        throw SimError(ErrorCode::ArityMismatch, "release needs [task]");
      }
      uint32_t task = m.payload[0];
      Entry* found = nullptr;
      SlotId slot = kSlot0;
      for (auto& e : directory_) {
        for (SlotId s = 0; s < 2; ++s) {
          if (e.slot_task[s] == task) {
            found = &e;
            slot = s;
          }
        }
      }
      if (!found) {
        throw SimError(ErrorCode::UnknownTask,
                       "release for unknown task " + std::to_string(task));
      }
      found->slot_task[slot].reset();
      o.side.push_back(SidebandOp{SidebandOp::Kind::SetTaskStatus,
                                  found->node,
                                  PEType{},
                                  slot,
                                  TaskStatus::Inactive});
      found->last_used = now;
      if (found->active_slots() == 0 && found->local1_on) {
        Message off;
        off.kind = MessageKind::DisablePort;
        off.src = {node_, kSlot0};
        off.dst = {found->node, kSlot0};
        o.out.push_back(off);
      }
      redispatch_pending(now, o, trace);
      Message ack;
      ack.kind = MessageKind::ReleaseAck;
      ack.src = {node_, kSlot0};
      ack.dst = m.src;
      ack.payload = {task};
      o.out.push_back(ack);
      return;
    }
    case MessageKind::EnableAck: {
      Entry* e = nullptr;
      for (auto& d : directory_) {
        if (d.node == m.src.node) e = &d;
      }
      if (!e || !e->parked ||
          e->parked->how != Entry::Parked::How::AfterEnable) {
        throw SimError(ErrorCode::UnexpectedMessage,
                       "enable acknowledgement with nothing parked");
      }
      if (!m.payload.empty() && m.payload[0] != 0) {
        throw SimError(ErrorCode::SimulationFault,
                       "port enable was refused");
      }
      e->local1_on = true;
      o.side.push_back(SidebandOp{SidebandOp::Kind::SetTaskStatus, e->node,
                                  PEType{}, kSlot1, TaskStatus::Active});
      Message grant_msg;
      grant_msg.kind = MessageKind::MapGrant;
      grant_msg.src = {node_, kSlot0};
      grant_msg.dst = e->parked->requester;
      grant_msg.payload = {e->parked->task, e->node.x, e->node.y, kSlot1};
      o.out.push_back(grant_msg);
      e->last_used = now;
      e->parked.reset();
      return;
    }
    case MessageKind::DisableAck: {
      Entry* e = nullptr;
      for (auto& d : directory_) {
        if (d.node == m.src.node) e = &d;
      }
      if (!e) {
        throw SimError(ErrorCode::UnexpectedMessage,
                       "disable acknowledgement from a non-region node");
      }
      bool nack = !m.payload.empty() && m.payload[0] != 0;
      if (!nack) {
        e->local1_on = false;
        return;
      }
      // Port still had traffic. Retry unless the slot has been handed out
      // again in the meantime.
      if (e->active_slots() == 0 && e->local1_on && !e->parked) {
        Message off;
        off.kind = MessageKind::DisablePort;
        off.src = {node_, kSlot0};
        off.dst = {e->node, kSlot0};
        o.out.push_back(off);
      }
      return;
    }
    default:
      throw SimError(ErrorCode::UnexpectedMessage,
                     std::string("manager cannot handle ") +
                         message_kind_name(m.kind));
  }
}

void GlobalManager::handle_reconfig_done(MeshCoordinate node, uint64_t now,
                                         ManagerOutput& o, TraceSink* trace) {
  Entry* e = nullptr;
  for (auto& d : directory_) {
    if (d.node == node) e = &d;
  }
  if (!e || e->status != Entry::Status::Reconfiguring) {
    throw SimError(ErrorCode::IllegalTransition,
                   "reconfiguration completion for a region not loading");
  }
  e->status = Entry::Status::Configured;
  if (e->parked && e->parked->how == Entry::Parked::How::AfterReconfig) {
    auto parked = *e->parked;
    e->parked.reset();
    grant(*e, parked.slot, parked.task, parked.requester, now, o);
  }
  redispatch_pending(now, o, trace);
}

bool GlobalManager::place_request(const PendingReq& req, uint64_t now,
                                  ManagerOutput& o, TraceSink* trace) {
  auto type_match_idle = [&]() -> Entry* {
    for (auto& e : directory_) {
      if (e.status == Entry::Status::Configured && e.pe_type == req.type &&
          e.active_slots() == 0 && !e.parked) {
        return &e;
      }
    }
    return nullptr;
  };
  auto empty_region = [&]() -> Entry* {
    for (auto& e : directory_) {
      if (e.status == Entry::Status::Empty) return &e;
    }
    return nullptr;
  };
  auto type_match_share = [&]() -> Entry* {
    if (!virtualized_) return nullptr;
    for (auto& e : directory_) {
      if (e.status == Entry::Status::Configured && e.pe_type == req.type &&
          e.active_slots() == 1 && !e.parked) {
        return &e;
      }
    }
    return nullptr;
  };

  auto start_reconfig = [&](Entry& e, MapDecision d) {
    e.status = Entry::Status::Reconfiguring;
    e.pe_type = req.type;
    e.slot_task[0] = req.task;
    e.parked = Entry::Parked{req.task, req.requester, kSlot0,
                             Entry::Parked::How::AfterReconfig};
    o.side.push_back(SidebandOp{SidebandOp::Kind::StartReconfig, e.node,
                                req.type, kSlot0, TaskStatus::Inactive});
    note_decision(d, req.task, &e, now, trace);
  };

  auto share = [&](Entry& e) {
    SlotId free = e.slot_task[0] ? kSlot1 : kSlot0;
    if (free == kSlot0) {
      grant(e, kSlot0, req.task, req.requester, now, o);
      note_decision(MapDecision::Assign, req.task, &e, now, trace);
      return;
    }
    e.slot_task[1] = req.task;  // reserve until the port is up
    e.parked = Entry::Parked{req.task, req.requester, kSlot1,
                             Entry::Parked::How::AfterEnable};
    Message on;
    on.kind = MessageKind::EnablePort;
    on.src = {node_, kSlot0};
    on.dst = {e.node, kSlot0};
    o.out.push_back(on);
    note_decision(MapDecision::EnableThenAssign, req.task, &e, now, trace);
  };

  if (Entry* e = type_match_idle()) {
    grant(*e, kSlot0, req.task, req.requester, now, o);
    note_decision(MapDecision::Assign, req.task, e, now, trace);
    return true;
  }
  if (policy_ == Policy::VirtualizeFirst) {
    if (Entry* e = type_match_share()) {
      share(*e);
      return true;
    }
  }
  if (Entry* e = empty_region()) {
    start_reconfig(*e, MapDecision::ReconfigThenAssign);
    return true;
  }
  if (policy_ == Policy::ReconfigFirst) {
    if (Entry* e = type_match_share()) {
      share(*e);
      return true;
    }
  }
  if (Entry* e = select_victim(req.type)) {
    start_reconfig(*e, MapDecision::EvictThenAssign);
    return true;
  }
  return false;
}

void GlobalManager::redispatch_pending(uint64_t now, ManagerOutput& o,
                                       TraceSink* trace) {
  // FIFO priority without head of line blocking: earlier requests get first
  // pick, later ones may still fit on other resources.
  for (auto it = pending_.begin(); it != pending_.end();) {
    if (place_request(*it, now, o, trace)) {
      it = pending_.erase(it);
    } else {
      ++it;
    }
  }
}

void GlobalManager::grant(Entry& e, SlotId slot, uint32_t task,
                          const VirtualAddress& requester, uint64_t now,
                          ManagerOutput& o) {
  e.slot_task[slot] = task;
  e.last_used = now;
  o.side.push_back(SidebandOp{SidebandOp::Kind::SetTaskStatus, e.node,
                              PEType{}, slot, TaskStatus::Active});
  Message grant_msg;
  grant_msg.kind = MessageKind::MapGrant;
  grant_msg.src = {node_, kSlot0};
  grant_msg.dst = requester;
  grant_msg.payload = {task, e.node.x, e.node.y, slot};
  o.out.push_back(grant_msg);
}

GlobalManager::Entry* GlobalManager::select_victim(PEType incoming) {
  (void)incoming;
  Entry* best = nullptr;
  for (auto& e : directory_) {
    if (e.status != Entry::Status::Configured || e.active_slots() != 0 ||
        e.parked) {
      continue;
    }
    // Directory order is (y, x), so strict < keeps the smaller coordinate
    // on last_used ties.
    if (!best || e.last_used < best->last_used) best = &e;
  }
  return best;
}

void GlobalManager::note_decision(MapDecision d, uint32_t task,
                                  const Entry* e, uint64_t now,
                                  TraceSink* trace) {
  ++decision_counts_[static_cast<std::size_t>(d)];
  if (!trace) return;
  TraceRecord r;
  r.cycle = now;
  r.event = "DECISION";
  r.node_x = node_.x;
  r.node_y = node_.y;
  r.detail = std::string(map_decision_name(d)) +
             " task=" + std::to_string(task);
  if (e) {
    r.detail += " node=(" + std::to_string(e->node.x) + "," +
                std::to_string(e->node.y) + ")";
  }
  trace->record(r);
}

}  // namespace vnoc
