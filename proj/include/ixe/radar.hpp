#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "ixe/tracker.hpp"
#include "ixe/types.hpp"

namespace ixe::radar {

inline constexpr std::uint8_t kProtocolVersion = 1;
inline constexpr size_t kHeaderBytes = 28;
inline constexpr size_t kObjectBytes = 24;
inline constexpr std::uint32_t kMaxObjects = 65535;

/// One broadcast object: fixed-point millimeters in the world frame.
struct RadarObject {
  std::uint32_t track_id = 0;
  std::uint8_t cls = 0;  // 0 pedestrian, 1 vehicle, 2 bicycle, 3 other
  std::int32_t x_mm = 0;
  std::int32_t y_mm = 0;
  std::int32_t vx_mm_s = 0;
  std::int32_t vy_mm_s = 0;

  bool operator==(const RadarObject&) const = default;
};

/// Per-frame snapshot of all live tracks.
struct RadarMessage {
  std::uint8_t version = kProtocolVersion;
  std::uint32_t intersection_id = 0;
  std::uint64_t frame_seq = 0;
  std::uint64_t capture_ts_us = 0;
  std::vector<RadarObject> objects;

  bool operator==(const RadarMessage&) const = default;
};

/// Little-endian layout: magic "CRSN", version u8, flags u8 (0),
/// object_count u16, intersection_id u32, frame_seq u64, capture_ts_us u64;
/// then per object track_id u32, class u8, reserved u8x3, x_mm i32, y_mm i32,
/// vx_mm_s i32, vy_mm_s i32. Throws TooManyObjects above 65535.
std::vector<std::uint8_t> encode(const RadarMessage& msg);

/// Strict inverse of encode. Throws BadMagic, TruncatedMessage,
/// UnsupportedVersion, NonzeroReserved.
RadarMessage decode(const std::vector<std::uint8_t>& bytes);
RadarMessage decode(const std::uint8_t* data, size_t len);

/// meters -> millimeters, truncation toward zero; values within 1e-6 of an
/// integer snap first so exact decimal velocities convert exactly.
std::int32_t to_fixed_mm(double meters);

RadarObject to_radar_object(const tracker::TrackSnapshot& snap);

/// Destination for encoded datagrams.
class Sink {
 public:
  virtual ~Sink() = default;
  /// Throws SinkFailure on delivery errors.
  virtual void send(const std::vector<std::uint8_t>& datagram) = 0;
};

/// UDP datagram sink (unicast or multicast address).
class UdpSink : public Sink {
 public:
  UdpSink(const std::string& address, std::uint16_t port, int ttl = 1);
  ~UdpSink() override;
  void send(const std::vector<std::uint8_t>& datagram) override;

 private:
  int fd_ = -1;
};

/// Capture file of length-prefixed records (u32 LE length + payload).
class FileSink : public Sink {
 public:
  explicit FileSink(const std::string& path);
  void send(const std::vector<std::uint8_t>& datagram) override;

 private:
  std::string path_;
  std::shared_ptr<void> file_;
};

std::vector<std::vector<std::uint8_t>> read_capture_file(const std::string& path);

/// In-process sink for tests.
class CaptureSink : public Sink {
 public:
  void send(const std::vector<std::uint8_t>& datagram) override { datagrams.push_back(datagram); }
  std::vector<std::vector<std::uint8_t>> datagrams;
};

/// Stage timestamps for one frame, microseconds on the pipeline clock.
struct LatencyTrace {
  std::uint64_t frame_seq = 0;
  std::uint64_t t_acquire = 0;
  std::uint64_t t_detect_done = 0;
  std::uint64_t t_track_done = 0;
  std::uint64_t t_analyze_done = 0;
  std::uint64_t t_encode_done = 0;
  std::uint64_t t_broadcast_done = 0;

  bool monotonic() const;
  std::uint64_t end_to_end_us() const { return t_broadcast_done - t_acquire; }
};

/// Per-frame broadcast: tracks -> RadarObjects -> datagram -> sink. An empty
/// track list still emits the 28-byte heartbeat. Sink failures are recorded
/// (frame dropped) and the pipeline continues.
class Broadcaster {
 public:
  Broadcaster(std::uint32_t intersection_id, Sink* sink, size_t mtu_bytes = 9000);

  /// Returns the encode/broadcast timestamps stamped with `now_us`.
  struct Stamps {
    std::uint64_t t_encode_done = 0;
    std::uint64_t t_broadcast_done = 0;
    bool delivered = false;
  };
  Stamps broadcast_frame(std::uint64_t frame_seq, std::uint64_t capture_ts_us,
                         const std::vector<tracker::TrackSnapshot>& tracks,
                         const std::function<std::uint64_t()>& now_us);

  size_t max_objects_per_frame() const { return max_objects_; }
  long long dropped_frames() const { return dropped_; }
  long long truncated_objects() const { return truncated_objects_; }

 private:
  std::uint32_t intersection_id_;
  Sink* sink_;
  size_t max_objects_;
  long long dropped_ = 0;
  long long truncated_objects_ = 0;
  bool started_ = false;
  std::uint64_t last_seq_ = 0;
};

struct StageStats {
  std::uint64_t p50_us = 0;
  std::uint64_t p99_us = 0;
};

struct BudgetReport {
  StageStats acquire_to_detect, detect_to_track, track_to_analyze, analyze_to_encode,
      encode_to_broadcast, end_to_end;
  double violation_rate = 0.0;  // fraction with end-to-end > budget_us
  std::uint64_t budget_us = 33333;
  size_t trace_count = 0;
};

/// Nearest-rank percentiles per stage plus the budget violation rate
/// (strictly greater than budget violates). Throws EmptyTraces.
BudgetReport budget_report(const std::vector<LatencyTrace>& traces,
                           std::uint64_t budget_us = 33333);

}  // namespace ixe::radar
