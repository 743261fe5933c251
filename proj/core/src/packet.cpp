#include "vnoc/packet.hpp"

#include <string>

namespace vnoc {

const char* message_kind_name(MessageKind kind) {
  switch (kind) {
    case MessageKind::ComputeReq: return "ComputeReq";
    case MessageKind::ComputeRep: return "ComputeRep";
    case MessageKind::MapReq: return "MapReq";
    case MessageKind::MapGrant: return "MapGrant";
    case MessageKind::Release: return "Release";
    case MessageKind::ReleaseAck: return "ReleaseAck";
    case MessageKind::EnablePort: return "EnablePort";
    case MessageKind::EnableAck: return "EnableAck";
    case MessageKind::DisablePort: return "DisablePort";
    case MessageKind::DisableAck: return "DisableAck";
  }
  return "UnknownKind";
}

namespace {

void check_address(const VirtualAddress& a, const char* which) {
  if (a.node.x >= kMaxMeshDim || a.node.y >= kMaxMeshDim || a.slot > kSlot1) {
    throw SimError(ErrorCode::AddressOutOfRange,
                   std::string(which) + " address (" +
                       std::to_string(a.node.x) + "," +
                       std::to_string(a.node.y) + ") slot " +
                       std::to_string(a.slot) + " not encodable");
  }
}

uint16_t address_bits(const VirtualAddress& a) {
  return static_cast<uint16_t>((a.slot & 1u) << 8 |
                               (a.node.x & 0xFu) << 4 | (a.node.y & 0xFu));
}

}  // namespace

std::vector<Flit> encode_packet(const Message& msg) {
  if (msg.payload.size() > kMaxPayloadWords) {
    throw SimError(ErrorCode::PayloadTooLarge,
                   std::to_string(msg.payload.size()) +
                       " payload words exceed the " +
                       std::to_string(kMaxPayloadWords) + " word limit");
  }
  check_address(msg.src, "source");
  check_address(msg.dst, "destination");

  std::vector<Flit> flits;
  flits.reserve(packet_flit_count(msg.payload.size()));
  auto push = [&flits](uint16_t value) {
    Flit f;
    f.value = value;
    f.tag = FlitTag{0, static_cast<uint16_t>(flits.size())};
    flits.push_back(f);
  };

  push(address_bits(msg.dst));
  push(static_cast<uint16_t>(2 + 2 * msg.payload.size()));
  push(static_cast<uint16_t>(
      address_bits(msg.src) |
      static_cast<uint16_t>(static_cast<uint16_t>(msg.kind) << 9)));
  push(msg.id);
  for (uint32_t word : msg.payload) {
    push(static_cast<uint16_t>(word >> 16));
    push(static_cast<uint16_t>(word & 0xFFFFu));
  }
  return flits;
}

Message decode_packet(std::span<const Flit> flits) {
  if (flits.size() < 4) {
    throw SimError(ErrorCode::MalformedPacket,
                   "packet of " + std::to_string(flits.size()) +
                       " flits is shorter than the 4 flit minimum");
  }
  uint16_t header = flits[0].value;
  if (header & 0xFE00u) {
    throw SimError(ErrorCode::MalformedPacket,
                   "reserved header bits set in flit 0");
  }
  uint16_t size = flits[1].value;
  if (size != flits.size() - 2) {
    throw SimError(ErrorCode::MalformedPacket,
                   "size flit says " + std::to_string(size) +
                       " but " + std::to_string(flits.size() - 2) +
                       " flits follow it");
  }
  if ((size - 2) % 2 != 0) {
    throw SimError(ErrorCode::MalformedPacket,
                   "payload region of " + std::to_string(size - 2) +
                       " flits is not an even number of half words");
  }
  uint16_t ctrl = flits[2].value;
  if (ctrl & 0xE000u) {
    throw SimError(ErrorCode::MalformedPacket,
                   "reserved control bits set in flit 2");
  }
  uint16_t kind_code = static_cast<uint16_t>((ctrl >> 9) & 0xFu);
  if (kind_code >= kNumMessageKinds) {
    throw SimError(ErrorCode::MalformedPacket,
                   "unknown message kind code " + std::to_string(kind_code));
  }

  Message msg;
  msg.dst.node = {static_cast<uint8_t>((header >> 4) & 0xFu),
                  static_cast<uint8_t>(header & 0xFu)};
  msg.dst.slot = static_cast<SlotId>((header >> 8) & 1u);
  msg.src.node = {static_cast<uint8_t>((ctrl >> 4) & 0xFu),
                  static_cast<uint8_t>(ctrl & 0xFu)};
  msg.src.slot = static_cast<SlotId>((ctrl >> 8) & 1u);
  msg.kind = static_cast<MessageKind>(kind_code);
  msg.id = flits[3].value;
  msg.payload.reserve((size - 2) / 2);
  for (std::size_t i = 4; i + 1 < flits.size(); i += 2) {
    msg.payload.push_back(static_cast<uint32_t>(flits[i].value) << 16 |
                          flits[i + 1].value);
  }
  return msg;
}

HeaderFields decode_header(uint16_t header_flit) {
  HeaderFields h;
  h.dst = {static_cast<uint8_t>((header_flit >> 4) & 0xFu),
           static_cast<uint8_t>(header_flit & 0xFu)};
  h.slot = static_cast<SlotId>((header_flit >> 8) & 1u);
  return h;
}

}  // namespace vnoc
