#include "navfly/wire.hpp"

#include <cstring>

#include "navfly/crc32.hpp"

namespace navfly::net {

namespace {

void put_u16(std::string& out, std::uint16_t v) {
  out.push_back(static_cast<char>(v & 0xFF));
  out.push_back(static_cast<char>((v >> 8) & 0xFF));
}

void put_u32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_u64(std::string& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

void put_f32(std::string& out, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(out, bits);
}

void put_f64(std::string& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  put_u64(out, bits);
}

class Reader {
 public:
  Reader(std::string_view data) : data_(data) {}
  std::size_t remaining() const { return data_.size() - pos_; }
  void need(std::size_t n) const {
    if (remaining() < n) throw ProtocolError(ProtocolError::Kind::kTruncated, "payload truncated");
  }
  std::uint8_t u8() {
    need(1);
    return static_cast<std::uint8_t>(data_[pos_++]);
  }
  std::uint16_t u16() {
    need(2);
    const std::uint16_t v = static_cast<std::uint8_t>(data_[pos_]) |
                            (static_cast<std::uint16_t>(static_cast<std::uint8_t>(data_[pos_ + 1]))
                             << 8);
    pos_ += 2;
    return v;
  }
  std::uint32_t u32() {
    need(4);
    std::uint32_t v = 0;
    for (int i = 3; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(data_[pos_ + i]);
    pos_ += 4;
    return v;
  }
  std::uint64_t u64() {
    need(8);
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | static_cast<std::uint8_t>(data_[pos_ + i]);
    pos_ += 8;
    return v;
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  double f64() {
    const std::uint64_t bits = u64();
    double v;
    std::memcpy(&v, &bits, 8);
    return v;
  }
  std::string str(std::size_t n) {
    need(n);
    std::string s(data_.substr(pos_, n));
    pos_ += n;
    return s;
  }
  void done() const {
    if (remaining() != 0) {
      throw ProtocolError(ProtocolError::Kind::kTruncated, "payload has trailing bytes");
    }
  }

 private:
  std::string_view data_;
  std::size_t pos_ = 0;
};

std::string encode_payload(const Message& msg) {
  std::string p;
  if (const auto* up = std::get_if<UplinkPayload>(&msg)) {
    put_u64(p, up->frame_id);
    put_u64(p, up->timestamp_us);
    for (const double v : up->state) put_f64(p, v);
    put_u16(p, up->depth_width);
    put_u16(p, up->depth_height);
    for (const float v : up->depth_ranges) put_f32(p, v);
  } else if (const auto* down = std::get_if<DownlinkPayload>(&msg)) {
    put_u64(p, down->frame_id);
    for (const float v : down->action) put_f32(p, v);
    put_u64(p, down->server_latency_us);
  } else if (const auto* init = std::get_if<SessionInitPayload>(&msg)) {
    put_u32(p, static_cast<std::uint32_t>(init->instruction.size()));
    p.append(init->instruction);
    p.push_back(init->goal_hint ? 1 : 0);
    put_f64(p, init->goal_hint.value_or(0.0));
  } else if (std::holds_alternative<HeartbeatPayload>(msg)) {
    // empty payload
  } else {
    const auto& err = std::get<ErrorPayload>(msg);
    put_u16(p, err.code);
    put_u32(p, static_cast<std::uint32_t>(err.message.size()));
    p.append(err.message);
  }
  return p;
}

Message decode_payload(MsgType type, std::string_view payload) {
  Reader in(payload);
  switch (type) {
    case MsgType::kUplink: {
      UplinkPayload up;
      up.frame_id = in.u64();
      up.timestamp_us = in.u64();
      for (double& v : up.state) v = in.f64();
      up.depth_width = in.u16();
      up.depth_height = in.u16();
      const std::size_t n =
          static_cast<std::size_t>(up.depth_width) * static_cast<std::size_t>(up.depth_height);
      in.need(n * 4);
      up.depth_ranges.resize(n);
      for (float& v : up.depth_ranges) v = in.f32();
      in.done();
      return up;
    }
    case MsgType::kDownlink: {
      DownlinkPayload down;
      down.frame_id = in.u64();
      for (float& v : down.action) v = in.f32();
      down.server_latency_us = in.u64();
      in.done();
      return down;
    }
    case MsgType::kSessionInit: {
      SessionInitPayload init;
      const std::uint32_t len = in.u32();
      init.instruction = in.str(len);
      const bool has_hint = in.u8() != 0;
      const double hint = in.f64();
      if (has_hint) init.goal_hint = hint;
      in.done();
      return init;
    }
    case MsgType::kHeartbeat: {
      in.done();
      return HeartbeatPayload{};
    }
    case MsgType::kError: {
      ErrorPayload err;
      err.code = in.u16();
      const std::uint32_t len = in.u32();
      err.message = in.str(len);
      in.done();
      return err;
    }
  }
  throw ProtocolError(ProtocolError::Kind::kBadType, "unknown message type");
}

}  // namespace

MsgType type_of(const Message& msg) {
  if (std::holds_alternative<UplinkPayload>(msg)) return MsgType::kUplink;
  if (std::holds_alternative<DownlinkPayload>(msg)) return MsgType::kDownlink;
  if (std::holds_alternative<SessionInitPayload>(msg)) return MsgType::kSessionInit;
  if (std::holds_alternative<HeartbeatPayload>(msg)) return MsgType::kHeartbeat;
  return MsgType::kError;
}

std::string encode_frame(const Message& msg) {
  const std::string payload = encode_payload(msg);
  if (payload.size() > kMaxPayload) {
    throw ProtocolError(ProtocolError::Kind::kOversize, "payload exceeds 4 MiB");
  }
  std::string frame;
  frame.reserve(kHeaderSize + payload.size() + 4);
  frame.append(kMagic, 4);
  put_u16(frame, kProtocolVersion);
  frame.push_back(static_cast<char>(type_of(msg)));
  put_u32(frame, static_cast<std::uint32_t>(payload.size()));
  frame.append(payload);
  put_u32(frame, crc32(payload.data(), payload.size()));
  return frame;
}

std::size_t frame_size_from_header(std::string_view header) {
  if (header.size() < kHeaderSize) {
    throw ProtocolError(ProtocolError::Kind::kTruncated, "header truncated");
  }
  if (std::memcmp(header.data(), kMagic, 4) != 0) {
    throw ProtocolError(ProtocolError::Kind::kBadMagic, "bad frame magic");
  }
  Reader in(header.substr(4));
  const std::uint16_t version = in.u16();
  if (version != kProtocolVersion) {
    throw ProtocolError(ProtocolError::Kind::kBadVersion,
                        "unsupported protocol version " + std::to_string(version));
  }
  const std::uint8_t type = in.u8();
  switch (static_cast<MsgType>(type)) {
    case MsgType::kUplink:
    case MsgType::kDownlink:
    case MsgType::kSessionInit:
    case MsgType::kHeartbeat:
    case MsgType::kError:
      break;
    default:
      throw ProtocolError(ProtocolError::Kind::kBadType,
                          "unknown message type " + std::to_string(type));
  }
  const std::uint32_t payload_len = in.u32();
  if (payload_len > kMaxPayload) {
    throw ProtocolError(ProtocolError::Kind::kOversize, "declared payload exceeds 4 MiB");
  }
  return kHeaderSize + payload_len + 4;
}

Message decode_frame(std::string_view bytes) {
  const std::size_t total = frame_size_from_header(bytes);
  if (bytes.size() < total) {
    throw ProtocolError(ProtocolError::Kind::kTruncated, "frame shorter than declared");
  }
  if (bytes.size() > total) {
    throw ProtocolError(ProtocolError::Kind::kTruncated, "frame longer than declared");
  }
  const MsgType type = static_cast<MsgType>(static_cast<std::uint8_t>(bytes[6]));
  const std::string_view payload = bytes.substr(kHeaderSize, total - kHeaderSize - 4);
  Reader crc_reader(bytes.substr(total - 4));
  const std::uint32_t declared_crc = crc_reader.u32();
  if (crc32(payload.data(), payload.size()) != declared_crc) {
    throw ProtocolError(ProtocolError::Kind::kCrcMismatch, "payload crc mismatch");
  }
  return decode_payload(type, payload);
}

}  // namespace navfly::net
