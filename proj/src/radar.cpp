#include "ixe/radar.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <sys/socket.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>

#include "ixe/errors.hpp"

namespace ixe::radar {

namespace {

void put_u16(std::vector<std::uint8_t>& out, std::uint16_t v) {
  out.push_back(static_cast<std::uint8_t>(v & 0xff));
  out.push_back(static_cast<std::uint8_t>(v >> 8));
}

void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_u64(std::vector<std::uint8_t>& out, std::uint64_t v) {
  for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void put_i32(std::vector<std::uint8_t>& out, std::int32_t v) {
  put_u32(out, static_cast<std::uint32_t>(v));
}

std::uint16_t get_u16(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

std::uint32_t get_u32(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
  std::uint64_t v = 0;
  for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
  return v;
}

std::int32_t get_i32(const std::uint8_t* p) { return static_cast<std::int32_t>(get_u32(p)); }

constexpr std::uint8_t kMagic[4] = {0x43, 0x52, 0x53, 0x4e};  // "CRSN"

}  // namespace

std::vector<std::uint8_t> encode(const RadarMessage& msg) {
  if (msg.objects.size() > kMaxObjects) {
    throw TooManyObjects("radar encode: " + std::to_string(msg.objects.size()) +
                         " objects exceed the u16 count field");
  }
  std::vector<std::uint8_t> out;
  out.reserve(kHeaderBytes + kObjectBytes * msg.objects.size());
  out.insert(out.end(), kMagic, kMagic + 4);
  out.push_back(msg.version);
  out.push_back(0);  // flags, reserved
  put_u16(out, static_cast<std::uint16_t>(msg.objects.size()));
  put_u32(out, msg.intersection_id);
  put_u64(out, msg.frame_seq);
  put_u64(out, msg.capture_ts_us);
  for (const auto& obj : msg.objects) {
    put_u32(out, obj.track_id);
    out.push_back(obj.cls);
    out.push_back(0);
    out.push_back(0);
    out.push_back(0);
    put_i32(out, obj.x_mm);
    put_i32(out, obj.y_mm);
    put_i32(out, obj.vx_mm_s);
    put_i32(out, obj.vy_mm_s);
  }
  return out;
}

RadarMessage decode(const std::vector<std::uint8_t>& bytes) {
  return decode(bytes.data(), bytes.size());
}

RadarMessage decode(const std::uint8_t* data, size_t len) {
  if (len < kHeaderBytes) {
    throw TruncatedMessage("radar decode: " + std::to_string(len) + " bytes < 28-byte header");
  }
  if (std::memcmp(data, kMagic, 4) != 0) {
    throw BadMagic("radar decode: bad magic");
  }
  RadarMessage msg;
  msg.version = data[4];
  if (msg.version != kProtocolVersion) {
    throw UnsupportedVersion("radar decode: version " + std::to_string(msg.version));
  }
  if (data[5] != 0) throw NonzeroReserved("radar decode: nonzero flags byte");
  const std::uint16_t count = get_u16(data + 6);
  msg.intersection_id = get_u32(data + 8);
  msg.frame_seq = get_u64(data + 12);
  msg.capture_ts_us = get_u64(data + 20);
  const size_t expected = kHeaderBytes + kObjectBytes * static_cast<size_t>(count);
  if (len != expected) {
    throw TruncatedMessage("radar decode: length " + std::to_string(len) + " != expected " +
                           std::to_string(expected));
  }
  msg.objects.resize(count);
  for (std::uint16_t i = 0; i < count; ++i) {
    const std::uint8_t* p = data + kHeaderBytes + kObjectBytes * i;
    RadarObject& obj = msg.objects[i];
    obj.track_id = get_u32(p);
    obj.cls = p[4];
    if (p[5] != 0 || p[6] != 0 || p[7] != 0) {
      throw NonzeroReserved("radar decode: nonzero object padding");
    }
    obj.x_mm = get_i32(p + 8);
    obj.y_mm = get_i32(p + 12);
    obj.vx_mm_s = get_i32(p + 16);
    obj.vy_mm_s = get_i32(p + 20);
  }
  return msg;
}

std::int32_t to_fixed_mm(double meters) {
  double scaled = meters * 1000.0;
  const double snapped = std::nearbyint(scaled);
  if (std::abs(scaled - snapped) < 1e-6) scaled = snapped;
  return static_cast<std::int32_t>(std::trunc(scaled));
}

RadarObject to_radar_object(const tracker::TrackSnapshot& snap) {
  RadarObject obj;
  obj.track_id = static_cast<std::uint32_t>(snap.track_id);
  obj.cls = static_cast<std::uint8_t>(snap.cls);
  obj.x_mm = to_fixed_mm(snap.world_pos.x);
  obj.y_mm = to_fixed_mm(snap.world_pos.y);
  obj.vx_mm_s = to_fixed_mm(snap.world_vel.x);
  obj.vy_mm_s = to_fixed_mm(snap.world_vel.y);
  return obj;
}

UdpSink::UdpSink(const std::string& address, std::uint16_t port, int ttl) {
  fd_ = ::socket(AF_INET, SOCK_DGRAM, 0);
  if (fd_ < 0) throw SinkFailure("udp sink: socket() failed");
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(port);
  if (inet_pton(AF_INET, address.c_str(), &addr.sin_addr) != 1) {
    ::close(fd_);
    fd_ = -1;
    throw SinkFailure("udp sink: bad address " + address);
  }
  const std::uint32_t host = ntohl(addr.sin_addr.s_addr);
  if ((host >> 28) == 0xe) {  // 224.0.0.0/4
    const std::uint8_t ttl_v = static_cast<std::uint8_t>(ttl);
    ::setsockopt(fd_, IPPROTO_IP, IP_MULTICAST_TTL, &ttl_v, sizeof(ttl_v));
  }
  if (::connect(fd_, reinterpret_cast<sockaddr*>(&addr), sizeof(addr)) != 0) {
    ::close(fd_);
    fd_ = -1;
    throw SinkFailure("udp sink: connect() to " + address + " failed");
  }
}

UdpSink::~UdpSink() {
  if (fd_ >= 0) ::close(fd_);
}

void UdpSink::send(const std::vector<std::uint8_t>& datagram) {
  const ssize_t n = ::send(fd_, datagram.data(), datagram.size(), 0);
  if (n != static_cast<ssize_t>(datagram.size())) {
    throw SinkFailure("udp sink: send failed: " + std::string(std::strerror(errno)));
  }
}

FileSink::FileSink(const std::string& path) : path_(path) {
  std::FILE* f = std::fopen(path.c_str(), "wb");
  if (!f) throw SinkFailure("file sink: cannot open " + path);
  file_ = std::shared_ptr<void>(f, [](void* p) { std::fclose(static_cast<std::FILE*>(p)); });
}

void FileSink::send(const std::vector<std::uint8_t>& datagram) {
  std::FILE* f = static_cast<std::FILE*>(file_.get());
  const std::uint32_t len = static_cast<std::uint32_t>(datagram.size());
  std::uint8_t hdr[4] = {static_cast<std::uint8_t>(len & 0xff),
                         static_cast<std::uint8_t>((len >> 8) & 0xff),
                         static_cast<std::uint8_t>((len >> 16) & 0xff),
                         static_cast<std::uint8_t>((len >> 24) & 0xff)};
  if (std::fwrite(hdr, 1, 4, f) != 4 ||
      std::fwrite(datagram.data(), 1, datagram.size(), f) != datagram.size()) {
    throw SinkFailure("file sink: write failed for " + path_);
  }
  std::fflush(f);
}

std::vector<std::vector<std::uint8_t>> read_capture_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("capture: cannot open " + path);
  std::vector<std::vector<std::uint8_t>> records;
  while (true) {
    std::uint8_t hdr[4];
    in.read(reinterpret_cast<char*>(hdr), 4);
    if (in.gcount() == 0) break;
    if (in.gcount() != 4) throw Error("capture: truncated length prefix in " + path);
    const std::uint32_t len = get_u32(hdr);
    std::vector<std::uint8_t> payload(len);
    in.read(reinterpret_cast<char*>(payload.data()), len);
    if (in.gcount() != static_cast<std::streamsize>(len)) {
      throw Error("capture: truncated record in " + path);
    }
    records.push_back(std::move(payload));
  }
  return records;
}

bool LatencyTrace::monotonic() const {
  return t_acquire <= t_detect_done && t_detect_done <= t_track_done &&
         t_track_done <= t_analyze_done && t_analyze_done <= t_encode_done &&
         t_encode_done <= t_broadcast_done;
}

Broadcaster::Broadcaster(std::uint32_t intersection_id, Sink* sink, size_t mtu_bytes)
    : intersection_id_(intersection_id), sink_(sink) {
  max_objects_ = mtu_bytes >= kHeaderBytes ? (mtu_bytes - kHeaderBytes) / kObjectBytes : 0;
  max_objects_ = std::min<size_t>(max_objects_, kMaxObjects);
}

Broadcaster::Stamps Broadcaster::broadcast_frame(
    std::uint64_t frame_seq, std::uint64_t capture_ts_us,
    const std::vector<tracker::TrackSnapshot>& tracks,
    const std::function<std::uint64_t()>& now_us) {
  if (started_ && frame_seq <= last_seq_) {
    throw OutOfOrderFrame("broadcast: frame_seq must increase");
  }
  started_ = true;
  last_seq_ = frame_seq;

  RadarMessage msg;
  msg.intersection_id = intersection_id_;
  msg.frame_seq = frame_seq;
  msg.capture_ts_us = capture_ts_us;
  msg.objects.reserve(std::min(tracks.size(), max_objects_));
  for (const auto& t : tracks) {
    if (msg.objects.size() >= max_objects_) {
      // Single datagram per frame: overflow objects are dropped, not split.
      truncated_objects_ += static_cast<long long>(tracks.size() - msg.objects.size());
      break;
    }
    msg.objects.push_back(to_radar_object(t));
  }

  Stamps stamps;
  const std::vector<std::uint8_t> datagram = encode(msg);
  stamps.t_encode_done = now_us();
  try {
    sink_->send(datagram);
    stamps.delivered = true;
  } catch (const SinkFailure&) {
    dropped_ += 1;
    stamps.delivered = false;
  }
  stamps.t_broadcast_done = now_us();
  return stamps;
}

namespace {

std::uint64_t percentile(std::vector<std::uint64_t>& sorted, double p) {
  if (sorted.empty()) return 0;
  const size_t n = sorted.size();
  size_t rank = static_cast<size_t>(std::ceil(p * static_cast<double>(n)));
  if (rank == 0) rank = 1;
  if (rank > n) rank = n;
  return sorted[rank - 1];
}

StageStats stage_stats(std::vector<std::uint64_t>& deltas) {
  std::sort(deltas.begin(), deltas.end());
  return StageStats{percentile(deltas, 0.50), percentile(deltas, 0.99)};
}

}  // namespace

BudgetReport budget_report(const std::vector<LatencyTrace>& traces, std::uint64_t budget_us) {
  if (traces.empty()) throw EmptyTraces("budget report: no traces");
  BudgetReport report;
  report.budget_us = budget_us;
  report.trace_count = traces.size();

  std::vector<std::uint64_t> d1, d2, d3, d4, d5, e2e;
  d1.reserve(traces.size());
  d2.reserve(traces.size());
  d3.reserve(traces.size());
  d4.reserve(traces.size());
  d5.reserve(traces.size());
  e2e.reserve(traces.size());
  size_t violations = 0;
  for (const auto& t : traces) {
    d1.push_back(t.t_detect_done - t.t_acquire);
    d2.push_back(t.t_track_done - t.t_detect_done);
    d3.push_back(t.t_analyze_done - t.t_track_done);
    d4.push_back(t.t_encode_done - t.t_analyze_done);
    d5.push_back(t.t_broadcast_done - t.t_encode_done);
    e2e.push_back(t.end_to_end_us());
    if (t.end_to_end_us() > budget_us) ++violations;
  }
  report.acquire_to_detect = stage_stats(d1);
  report.detect_to_track = stage_stats(d2);
  report.track_to_analyze = stage_stats(d3);
  report.analyze_to_encode = stage_stats(d4);
  report.encode_to_broadcast = stage_stats(d5);
  report.end_to_end = stage_stats(e2e);
  report.violation_rate = static_cast<double>(violations) / static_cast<double>(traces.size());
  return report;
}

}  // namespace ixe::radar
