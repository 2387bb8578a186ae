#include <sstream>

#include <doctest.h>

#include "fastreact/error.hpp"
#include "fastreact/model.hpp"

using namespace fastreact;

namespace {

TraceRecord sample_record() {
  TraceRecord r;
  r.time = 1'000'500;
  r.node = "A1";
  r.event = TraceEvent::kFailover;
  r.packet.kind = PacketKind::kActuatorCommand;
  r.packet.tag = RouteTag::kBackup;
  r.packet.sensor = SensorId(3);
  r.packet.value = 55;
  r.packet.seq = 17;
  r.packet.sent_at = 998'000;
  r.packet.opcode = OpCode::kMovingAverage;
  r.packet.requester = NodeId(4);
  r.packet.dst = NodeId(9);
  return r;
}

}  // namespace

TEST_CASE("trace line round trip") {
  const TraceRecord r = sample_record();
  const std::string line = format_trace_line(r);
  CHECK(line ==
        "1000500,A1,failover,actuator_command,backup,3,55,17,998000,"
        "moving_average,4,9");
  CHECK(parse_trace_line(line) == r);
  CHECK(parse_trace_line(line + "\r") == r);
}

TEST_CASE("every event and kind survives a round trip") {
  for (int e = 0; e <= static_cast<int>(TraceEvent::kLinkUp); ++e) {
    for (int k = 0; k <= static_cast<int>(PacketKind::kLiveness); ++k) {
      TraceRecord r = sample_record();
      r.event = static_cast<TraceEvent>(e);
      r.packet.kind = static_cast<PacketKind>(k);
      CHECK(parse_trace_line(format_trace_line(r)) == r);
    }
  }
}

TEST_CASE("trace csv stream round trip") {
  Trace t{sample_record(), sample_record()};
  t[1].node = "Sensor1";
  t[1].event = TraceEvent::kLinkDown;
  std::stringstream ss;
  write_trace_csv(ss, t);
  std::string first;
  std::getline(ss, first);
  CHECK(first == trace_csv_header());
  ss.seekg(0);
  CHECK(read_trace_csv(ss) == t);
}

TEST_CASE("malformed trace lines") {
  const std::string good = format_trace_line(sample_record());
  CHECK_THROWS_AS(parse_trace_line("1,A1,tx"), Error);
  CHECK_THROWS_AS(parse_trace_line(good + ",extra"), Error);
  CHECK_THROWS_AS(parse_trace_line("x" + good), Error);
  CHECK_THROWS_AS(parse_trace_line(
                      "1,A1,teleport,liveness,normal,0,0,0,0,latest,0,0"),
                  Error);
  CHECK_THROWS_AS(parse_trace_line(
                      "1,,tx,liveness,normal,0,0,0,0,latest,0,0"),
                  Error);
  try {
    parse_trace_line("1,A1,tx");
  } catch (const Error &e) {
    CHECK(e.code() == Errc::kParseError);
  }
}

TEST_CASE("value masking") {
  CHECK(mask_value(0x1'2345, 16) == 0x2345);
  CHECK(mask_value(0xFFFF'FFFF, 32) == 0xFFFF'FFFF);
  CHECK(low_bits_mask(64) == ~std::uint64_t{0});
  CHECK(low_bits_mask(48) == (std::uint64_t{1} << 48) - 1);
}

TEST_CASE("every packet refreshes liveness") {
  Packet p;
  for (int k = 0; k <= static_cast<int>(PacketKind::kLiveness); ++k) {
    p.kind = static_cast<PacketKind>(k);
    CHECK(packet_is_liveness_bearing(p));
  }
}

TEST_CASE("well formed packets") {
  Packet report;
  report.kind = PacketKind::kSensorReport;
  CHECK_FALSE(packet_is_well_formed(report));
  report.sensor = SensorId(1);
  CHECK(packet_is_well_formed(report));

  Packet get;
  get.kind = PacketKind::kGetRequest;
  get.sensor = SensorId(1);
  CHECK_FALSE(packet_is_well_formed(get));
  get.requester = NodeId(2);
  CHECK(packet_is_well_formed(get));
}
