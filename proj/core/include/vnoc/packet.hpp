#pragma once

#include <compare>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "vnoc/error.hpp"

namespace vnoc {

// Addresses are 4 bits per axis on the wire, so meshes are capped at 16x16.
inline constexpr unsigned kMaxMeshDim = 16;
inline constexpr std::size_t kMaxPayloadWords = 127;

struct MeshCoordinate {
  uint8_t x = 0;
  uint8_t y = 0;
  friend constexpr auto operator<=>(const MeshCoordinate&,
                                    const MeshCoordinate&) = default;
};

constexpr unsigned manhattan(MeshCoordinate a, MeshCoordinate b) {
  unsigned dx = a.x > b.x ? a.x - b.x : b.x - a.x;
  unsigned dy = a.y > b.y ? a.y - b.y : b.y - a.y;
  return dx + dy;
}

using SlotId = uint8_t;  // 0 or 1; slot 1 only exists on virtualized fabrics
inline constexpr SlotId kSlot0 = 0;
inline constexpr SlotId kSlot1 = 1;

// Node coordinate plus execution slot: the unit of placement the manager
// hands out and the unit of addressing on the wire.
struct VirtualAddress {
  MeshCoordinate node;
  SlotId slot = kSlot0;
  friend constexpr auto operator<=>(const VirtualAddress&,
                                    const VirtualAddress&) = default;
};

// Index into the service catalog (0 = GCD, 1 = RSA in the standard catalog).
struct PEType {
  uint8_t code = 0;
  friend constexpr auto operator<=>(const PEType&, const PEType&) = default;
};
inline constexpr PEType kPETypeGcd{0};
inline constexpr PEType kPETypeRsa{1};

enum class MessageKind : uint8_t {
  ComputeReq = 0,
  ComputeRep = 1,
  MapReq = 2,
  MapGrant = 3,
  Release = 4,
  ReleaseAck = 5,
  EnablePort = 6,
  EnableAck = 7,
  DisablePort = 8,
  DisableAck = 9,
};
inline constexpr uint8_t kNumMessageKinds = 10;

const char* message_kind_name(MessageKind kind);

// Control messages are consumed by the network interface itself; everything
// else is handed to the attachment behind it.
constexpr bool is_control(MessageKind kind) {
  return kind == MessageKind::EnablePort || kind == MessageKind::DisablePort;
}

struct Message {
  uint16_t id = 0;
  MessageKind kind = MessageKind::ComputeReq;
  VirtualAddress src;
  VirtualAddress dst;
  std::vector<uint32_t> payload;
  friend bool operator==(const Message&, const Message&) = default;
};

// Purely observational identity used by trace sinks; routing and delivery
// never read it.
struct FlitTag {
  uint32_t packet = 0;
  uint16_t ordinal = 0;
};

struct Flit {
  uint16_t value = 0;
  std::optional<FlitTag> tag;
};

constexpr std::size_t packet_flit_count(std::size_t payload_words) {
  return 4 + 2 * payload_words;
}

// Wire layout, 16-bit flits:
//   flit 0   header: dst.x in bits 7..4, dst.y in 3..0, dst slot in bit 8
//   flit 1   size: number of flits that follow it (2 + 2 * payload words)
//   flit 2   control: src.x in 7..4, src.y in 3..0, src slot in bit 8,
//            message kind in bits 12..9
//   flit 3   message id
//   then each payload word as two flits, high half first.
std::vector<Flit> encode_packet(const Message& msg);
Message decode_packet(std::span<const Flit> flits);

// The router only ever needs the destination out of a header flit.
struct HeaderFields {
  MeshCoordinate dst;
  SlotId slot = kSlot0;
};
HeaderFields decode_header(uint16_t header_flit);

}  // namespace vnoc
