#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <variant>
#include <vector>

#include "navfly/errors.hpp"

namespace navfly::net {

/// Frame layout, little-endian throughout:
///   magic "NVFL" | u16 version | u8 msg_type | u32 payload_len | payload | u32 crc32(payload)
inline constexpr char kMagic[4] = {'N', 'V', 'F', 'L'};
inline constexpr std::uint16_t kProtocolVersion = 1;
inline constexpr std::uint32_t kMaxPayload = 4u * 1024 * 1024;
inline constexpr std::size_t kHeaderSize = 11;  // magic + version + type + payload_len

enum class MsgType : std::uint8_t {
  kUplink = 0x01,
  kDownlink = 0x02,
  kSessionInit = 0x03,
  kHeartbeat = 0x04,
  kError = 0x7F,
};

class ProtocolError : public Error {
 public:
  enum class Kind { kBadMagic, kBadVersion, kBadType, kCrcMismatch, kTruncated, kOversize };
  ProtocolError(Kind kind, const std::string& what) : Error("protocol", what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

struct SessionInitPayload {
  std::string instruction;
  std::optional<double> goal_hint;
  bool operator==(const SessionInitPayload&) const = default;
};

/// State block is 7 f64: position xyz, yaw, clock, two reserved slots.
struct UplinkPayload {
  std::uint64_t frame_id = 0;
  std::uint64_t timestamp_us = 0;
  std::array<double, 7> state{};
  std::uint16_t depth_width = 0;
  std::uint16_t depth_height = 0;
  std::vector<float> depth_ranges;
  bool operator==(const UplinkPayload&) const = default;
};

struct DownlinkPayload {
  std::uint64_t frame_id = 0;
  std::array<float, 3> action{};  // forward, yaw rate, vertical
  std::uint64_t server_latency_us = 0;
  bool operator==(const DownlinkPayload&) const = default;
};

struct HeartbeatPayload {
  bool operator==(const HeartbeatPayload&) const = default;
};

struct ErrorPayload {
  std::uint16_t code = 0;
  std::string message;
  bool operator==(const ErrorPayload&) const = default;
};

using Message =
    std::variant<UplinkPayload, DownlinkPayload, SessionInitPayload, HeartbeatPayload,
                 ErrorPayload>;

MsgType type_of(const Message& msg);
std::string encode_frame(const Message& msg);
Message decode_frame(std::string_view bytes);

/// Total frame size implied by a header; throws on bad magic/version/type
/// or an oversize payload declaration.
std::size_t frame_size_from_header(std::string_view header);

}  // namespace navfly::net
