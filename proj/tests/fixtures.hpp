#pragma once

// Small hand-written specifications shared by several suites.

namespace iotforge::testing {

// The building vocabulary with exactly the six resources of the running
// example: temperature sensor, smoke detector, badge reader, alarm, heater,
// and the profile store.
inline constexpr const char* kBuildingVocab = R"(vocabulary Building
regions:
  Building;
  Floor;
  Room;
resources:
  sensor TemperatureSensor {
    generate tempMeasurement : double;
  }
  sensor SmokeDetector {
    generate smokeDetected : boolean;
  }
  sensor BadgeReader {
    generate badgeDetected : string;
    generate badgeDisappeared : string;
  }
  actuator Alarm {
    action activate();
  }
  actuator Heater {
    action setTemp(setPoint : double);
    action setLowest();
  }
  storage ProfileDB {
    generate preference : double accessed-by badgeId : string;
  }
)";

// One temperature service, rooms picked by the test.
inline constexpr const char* kAvgArch = R"(architecture Avg uses Building
service RoomAvg {
  scope: Room;
  consume tempMeasurement window 2 every 10 s;
  produce roomTemp : double;
  logic: builtin average;
}
)";

}  // namespace iotforge::testing
