import pytest

from signalforge.catalog import parse_catalog

SMALL_CATALOG = """
signals:
  - name: WiperState
    kind: enum
    bit_start: 0
    bit_length: 2
    enum_map: {0: OFF, 1: ON}
    description: "wiper sts"
  - name: VehicleSpeed
    kind: numerical
    bit_start: 8
    bit_length: 16
    scale: 0.01
    offset: 0
    unit: m/s
    range_min: 0
    range_max: 655.35
    description: "veh spd"
  - name: ParkBrakeActive
    kind: bool
    bit_start: 2
    bit_length: 1
    description: "prk brk"
  - name: Minute
    kind: numerical
    bit_start: 24
    bit_length: 8
    range_min: 0
    range_max: 59
    description: "trip min"
  - name: Second
    kind: numerical
    bit_start: 32
    bit_length: 8
    range_min: 0
    range_max: 59
    description: "trip sec"
  - name: TimeOfTrip
    kind: object
    components:
      - {name: Minute, weight: 60}
      - {name: Second, weight: 1}
    description: "trip time"
  - name: CabinTemp
    kind: numerical
    bit_start: 40
    bit_length: 8
    byte_order: big_endian
    signed: true
    scale: 0.5
    offset: 0
    unit: C
    range_min: -40
    range_max: 60
    description: "cab tmp"
"""


@pytest.fixture(scope="session")
def small_catalog():
    return parse_catalog(SMALL_CATALOG)
