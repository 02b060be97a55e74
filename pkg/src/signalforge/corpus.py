"""Bundled evaluation corpora, built programmatically and deterministic.

Three fixtures back the quantitative experiments:

* the *distractor corpus*: ~40 API properties over ~130 signals, each
  property's true signal seeded with two near-miss distractors. Original
  signal descriptions are deliberately uneven (full words, terse shorthand,
  or misleading), which is what separates the three embedding strategies.
* the *fault corpus*: a small clean catalog + API where selected signals
  receive single-shot synthesis faults, used by the ablation runs and the
  repair-rate experiment.
* the *injection document*: a wide API document with example values,
  feeding the specification-error detection experiment.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Mapping

from . import yamlio
from .apispec import ApiSpec, parse_api_spec
from .catalog import ABBREVIATIONS, SignalCatalog, parse_catalog

# Words -> shorthand (first glossary entry wins; multi-word expansions are
# not reversible and stay as-is).
_REVERSE: dict[str, str] = {}
for _abbr, _word in ABBREVIATIONS.items():
    if " " not in _word:
        _REVERSE.setdefault(_word, _abbr)


def shorthand(phrase: str) -> str:
    """Render a phrase the way a terse signal definition would."""
    return " ".join(_REVERSE.get(word, word) for word in phrase.split())


@dataclass(frozen=True)
class Corpus:
    catalog: SignalCatalog
    catalog_text: str
    api_text: str
    api_spec: ApiSpec
    truth: Mapping[str, tuple[frozenset, str]]  # property -> (signals, kind)
    theta: float
    margin: float
    fault_assignments: Mapping[str, str] = field(default_factory=dict)
    domains: Mapping[str, str] = field(default_factory=dict)  # property -> domain


# ---------------------------------------------------------------------------
# Distractor corpus (embedding-strategy experiment)
# ---------------------------------------------------------------------------

# Retrieval thresholds for the strategy-comparison experiment, tuned on this
# corpus: rewritten descriptions clear them comfortably, terse originals
# mostly do not, raw code almost never does.
TABLE5_THETA = 0.30
TABLE5_MARGIN = 0.03

# description_tier cycles 0,1,2 by family position:
#   0 full-word original descriptions (original strategy works)
#   1 shorthand originals (only the rewritten strategy recovers the words)
#   2 shorthand original on the true signal while a distractor carries a
#     full-word description (misleads the original strategy)

_ENUM_FAMILIES = [
    # (property, phrase, labels, target, d1(name, phrase, labels), d2(...))
    ("wiperFrontMode", "front wiper status", ["OFF", "ON", "FAST"],
     "WprFrntSts", ("WprRearSts", "rear wiper status", ["PARKED", "SWEEPING"]),
     ("WshFldWrn", "washer fluid warning", ["NORMAL", "LOW"])),
    ("doorDriverState", "driver door position", ["OPEN", "CLOSED"],
     "DrPosLt", ("DrPosRt", "passenger door position", ["AJAR", "SHUT"]),
     ("DrLckLt", "driver door lock status", ["LOCKED", "UNLOCKED"])),
    ("headlampMode", "headlamp mode", ["AUTO_LOW", "DIPPED", "FULL"],
     "HdlmpMd", ("HdlmpFlt", "headlamp fault indicator", ["OK", "DEGRADED"]),
     ("FogLmpSts", "fog lamp status", ["INACTIVE", "ACTIVE"])),
    ("gearSelected", "selected gear position", ["P", "R", "N", "D"],
     "GearSelPos", ("GearActPos", "actual gear position", ["G1", "G2", "G3"]),
     ("GearFlt", "gear fault status", ["NONE", "SLIP"])),
    ("climateMode", "climate mode", ["ECO", "COMFORT", "BOOST"],
     "ClnMd", ("ClnFnLvl", "climate fan level", ["STOP", "SLOW", "MAX"]),
     ("VntPos", "vent position", ["FACE", "FEET", "MIX"])),
    ("hazardLights", "hazard indicator status", ["IDLE", "FLASHING"],
     "HazIndSts", ("TurnIndSts", "turn indicator status", ["LEFT", "RIGHT", "NONE"]),
     ("BrkLmpSts", "brake lamp status", ["DARK", "LIT"])),
    ("chargePortState", "charge port status", ["SEALED", "OPEN", "CHARGING"],
     "ChrgPortSts", ("ChrgCableSts", "charge cable status", ["FREE", "PLUGGED"]),
     ("BatHtrSts", "battery heater status", ["REST", "HEATING"])),
    ("mirrorFoldState", "mirror fold position", ["FOLDED", "DRIVING"],
     "MirPosLt", ("MirHtrSts", "mirror heater status", ["COLD", "WARMING"]),
     ("WndPosLt", "left window position state", ["DOWN", "MID", "UP"])),
    ("parkAssistState", "park assist status", ["OFF", "SCANNING", "GUIDING"],
     "PrkAssistSts", ("PrkBrkSwt", "park brake switch position", ["RELEASED", "PULLED"]),
     ("RevGearSwt", "reverse gear switch", ["DISENGAGED", "ENGAGED"])),
    ("seatHeaterDriver", "driver seat heater level", ["NONE", "WARM", "HOT"],
     "StHtrLvlLt", ("StHtrLvlRt", "passenger seat heater level", ["L0", "L1", "L2"]),
     ("StPosMemory", "seat position memory slot", ["M1", "M2", "M3"])),
    ("defrosterState", "defroster status", ["STANDBY", "CLEARING"],
     "DefrstSts", ("DefrstRearSts", "rear defroster status", ["DISABLED", "ENABLED"]),
     ("HtrCoreSts", "heater status", ["COOL", "HEATING"])),
    ("engineRunMode", "engine mode", ["STOPPED", "IDLE", "RUNNING"],
     "EngMd", ("EngWrnSts", "engine warning status", ["CLEAR", "CHECK"]),
     ("PwrMd", "power mode", ["SLEEP", "ACCESSORY", "DRIVE"])),
    ("tirePressureWarning", "tire pressure warning", ["NOMINAL", "UNDERINFLATED"],
     "TirePrsWrn", ("TirePrsFL", "tire pressure front left sensor state", ["VALID", "STALE"]),
     ("SusFltSts", "suspension fault status", ["HEALTHY", "SERVICE"])),
    ("wearLevelBrakes", "brake wear status", ["FRESH", "WORN", "REPLACE"],
     "BrkWearSts", ("BrkFldWrn", "brake fluid warning", ["FULL", "REFILL"]),
     ("PadTempSts", "pad temperature status", ["NORMAL_T", "OVERHEAT"])),
    ("sunroofState", "sunroof position state", ["SHUT", "TILTED", "SLID"],
     "SunroofPos", ("SunShadePos", "sun shade position", ["RETRACTED", "EXTENDED"]),
     ("WndPosRt", "right window position state", ["BOTTOM", "TOP"])),
    ("washerPumpState", "washer pump status", ["REST_W", "SPRAYING"],
     "WshPumpSts", ("WprParkSts", "wiper park position status", ["MOVING", "PARKED_W"]),
     ("FldHtrSts", "fluid heater status", ["IDLE_H", "ACTIVE_H"])),
]

_BOOL_FAMILIES = [
    # (property, phrase, target, d1, d2) — bools are 1-bit flags.
    ("parkBrakeEngaged", "park brake engaged", "PrkBrkAct",
     ("PrkLmpAct", "park lamp engaged"), ("BrkPedlPressed", "brake pedal pressed")),
    ("driverBeltLatched", "driver belt latched", "BeltLtchLt",
     ("BeltLtchRt", "passenger belt latched"), ("AirbgRdy", "airbag ready")),
    ("cruiseActive", "cruise control active", "CruiseAct",
     ("CruiseStandby", "cruise control standby"), ("LimiterAct", "speed limiter active")),
    ("trailerAttached", "trailer attached", "TrailerConn",
     ("TrailerLmpOk", "trailer lamp circuit ok"), ("HitchLocked", "hitch locked")),
    ("lowBeamOn", "low beam lit", "LowBeamAct",
     ("HighBeamAct", "high beam lit"), ("DrlAct", "daytime running lamp lit")),
    ("keyPresent", "key present inside", "KeyInsideAct",
     ("KeyFobBatLow", "key fob battery low"), ("StartReady", "start ready")),
]

_NUMERIC_FAMILIES = [
    # Direct (same unit on both sides):
    # (property, phrase, unit, (scale, offset, bits, rmin, rmax), target, d1, d2)
    ("fuelLevelPercent", "fuel level", "%", (0.4, 0.0, 8, 0, 100),
     "FuelLvlPct", ("FuelRngEst", "fuel range estimated", "km", (1.0, 0.0, 12, 0, 1500)),
     ("AddBlueLvl", "additive fluid level", "%", (0.5, 0.0, 8, 0, 100))),
    ("batteryVoltage", "battery power voltage", "V", (0.1, 0.0, 9, 0, 36),
     "BatVolt", ("BatCurrent", "battery current", "A", (0.1, -200.0, 12, -200, 200)),
     ("BatSocPct", "battery charge", "%", (0.5, 0.0, 8, 0, 100))),
    ("cabinTempTarget", "cabin temperature target", "C", (0.5, -20.0, 8, -20, 40),
     "CabTmpTgt", ("CabTmpAct", "cabin temperature actual", "C", (0.5, -20.0, 8, -20, 40)),
     ("EvapTmp", "evaporator temperature", "C", (0.5, -30.0, 8, -30, 50))),
    ("steeringAngleDeg", "steering angle", "deg", (0.1, -780.0, 14, -780, 780),
     "StrAngDeg", ("StrTrqNm", "steering torque", "Nm", (0.01, -20.0, 12, -20, 20)),
     ("YawRateDs", "yaw rate", "deg/s", (0.01, -75.0, 14, -75, 75))),
    ("odometerKm", "odometer", "km", (1.0, 0.0, 16, 0, 65535),
     "OdoTotalKm", ("OdoTripKm", "trip odometer", "km", (0.1, 0.0, 16, 0, 6000)),
     ("ServiceDistKm", "service distance remaining", "km", (1.0, 0.0, 15, 0, 30000))),
    ("axleLoadFront", "front axle load", "kg", (2.0, 0.0, 12, 0, 8000),
     "AxlLdFrnt", ("AxlLdRear", "rear axle load", "kg", (2.0, 0.0, 12, 0, 8000)),
     ("GrossWeight", "gross combination weight", "kg", (5.0, 0.0, 13, 0, 40000))),
    # Transformed (property unit differs; conversion registered):
    ("displaySpeedKmh", "vehicle speed over ground", "km/h", (0.01, 0.0, 14, 0, 120),
     "VehSpdMs", ("WhlSpdFL", "wheel speed front left", "rad/s", (0.01, 0.0, 14, 0, 160)),
     ("EngRpm", "engine rotation", "rpm", (1.0, 0.0, 14, 0, 8000)),
     "m/s"),
    ("boostPressureBar", "boost pressure", "bar", (1.0, 0.0, 12, 0, 400),
     "BoostPrsKpa", ("RailPrsMpa", "rail pressure", "MPa", (0.1, 0.0, 12, 0, 300)),
     ("OilPrsKpa", "oil pressure", "kPa", (2.0, 0.0, 10, 0, 1200)),
     "kPa"),
    ("outsideTempF", "outside temperature", "F", (0.5, -40.0, 8, -40, 60),
     "AmbTmpC", ("IntakeTmpC", "intake temperature", "C", (1.0, -40.0, 8, -40, 120)),
     ("CoolantTmpC", "coolant temperature", "C", (1.0, -40.0, 8, -40, 150)),
     "C"),
    ("energyUsedKwh", "energy used", "kWh", (10.0, 0.0, 14, 0, 160000),
     "EnergyUsedWh", ("EnergyRegenWh", "energy recovered", "Wh", (10.0, 0.0, 14, 0, 160000)),
     ("ChrgPwrKw", "charge power", "kW", (0.1, 0.0, 11, 0, 150)),
     "Wh"),
    ("tripDistanceMiles", "trip distance", "mi", (0.1, 0.0, 16, 0, 6000),
     "TrpDistKm", ("TrpFuelUsed", "trip fuel used", "L", (0.1, 0.0, 12, 0, 400)),
     ("TrpAvgSpd", "trip average speed", "m/s", (0.5, 0.0, 9, 0, 45)),
     "km"),
    ("auxVoltageMv", "auxiliary voltage", "mV", (0.01, 0.0, 12, 0, 40),
     "AuxVoltV", ("AuxCurrentA", "auxiliary current", "A", (0.05, 0.0, 12, 0, 100)),
     ("Aux5vRail", "five volt rail voltage", "V", (0.01, 0.0, 9, 0, 5)),
     "V"),
]

_COMPOSED_FAMILIES = [
    # (property, phrase, target object, (child1, weight, bits, rmax),
    #  (child2, weight, bits, rmax), d1, d2)
    ("tripDurationSeconds", "trip duration", "TrpTime",
     ("TrpMin", 60, 8, 59), ("TrpSec", 1, 8, 59),
     ("TrpIdleTime", "trip idle duration"), ("TrpCount", "trip count")),
    ("chargeTimeRemaining", "charge duration remaining", "ChrgTimeRem",
     ("ChrgHrRem", 60, 5, 23), ("ChrgMinRem", 1, 8, 59),
     ("ChrgRateMin", "charge rate"), ("ChrgSessCnt", "charge session count")),
    ("serviceCountdown", "service countdown duration", "ServiceTime",
     ("ServiceDay", 24, 10, 365), ("ServiceHr", 1, 5, 23),
     ("ServiceOdoKm", "service odometer distance"), ("ServiceFlag", "service flag count")),
    ("parkHeaterRuntime", "heater runtime duration", "HtrRunTime",
     ("HtrRunMin", 60, 10, 600), ("HtrRunSec", 1, 8, 59),
     ("HtrTmpC", "heater temperature"), ("HtrFuelUse", "heater fuel use")),
    ("rentalElapsed", "rental elapsed duration", "RentalTime",
     ("RentalHr", 60, 12, 2000), ("RentalMin", 1, 8, 59),
     ("RentalDistKm", "rental distance"), ("RentalEvents", "rental event count")),
    ("washCycleTime", "wash cycle duration", "WashTime",
     ("WashMin", 60, 6, 59), ("WashSec", 1, 8, 59),
     ("WashPrsKpa", "wash pressure"), ("WashCnt", "wash cycle count")),
]


def _desc_for(tier: int, phrase: str, role: str) -> str:
    """Original-description text by informativeness tier."""
    if role == "target":
        return phrase if tier == 0 else shorthand(phrase)
    if role == "d1_misleading":
        return phrase  # full words on the wrong signal
    return shorthand(phrase) if tier == 1 else phrase


def _distractor_layout(i: int, j: int) -> int:
    return ((i * 3 + j) * 8) % 48


def build_distractor_corpus() -> Corpus:
    signals: list[dict] = []
    properties: list[dict] = []
    truth: dict[str, tuple[frozenset, str]] = {}
    tier_counter = 0

    def add_signal(record: dict):
        signals.append(record)

    def family_tier() -> int:
        nonlocal tier_counter
        tier = tier_counter % 3
        tier_counter += 1
        return tier

    for i, family in enumerate(_ENUM_FAMILIES):
        prop, phrase, labels, target, d1, d2 = family
        tier = family_tier()
        add_signal({
            "name": target, "kind": "enum", "bit_start": _distractor_layout(i, 0),
            "bit_length": max(2, (len(labels) - 1).bit_length()),
            "enum_map": {k: v for k, v in enumerate(labels)},
            "description": _desc_for(tier, phrase, "target"),
        })
        for j, (d_name, d_phrase, d_labels) in enumerate((d1, d2), start=1):
            role = "d1_misleading" if (tier == 2 and j == 1) else "distractor"
            add_signal({
                "name": d_name, "kind": "enum",
                "bit_start": _distractor_layout(i, j),
                "bit_length": max(2, (len(d_labels) - 1).bit_length()),
                "enum_map": {k: v for k, v in enumerate(d_labels)},
                "description": _desc_for(tier, d_phrase, role),
            })
        properties.append({
            "name": prop, "type": "string", "enum": labels,
            "description": f"{phrase.capitalize()}. Possible values are: {', '.join(labels)}.",
        })
        truth[prop] = (frozenset({target}), "direct")

    for i, (prop, phrase, target, d1, d2) in enumerate(_BOOL_FAMILIES):
        tier = family_tier()
        add_signal({
            "name": target, "kind": "bool", "bit_start": (i * 5 + 3) % 60,
            "bit_length": 1, "description": _desc_for(tier, phrase, "target"),
        })
        for j, (d_name, d_phrase) in enumerate((d1, d2), start=1):
            role = "d1_misleading" if (tier == 2 and j == 1) else "distractor"
            add_signal({
                "name": d_name, "kind": "bool", "bit_start": (i * 5 + 3 + j) % 60,
                "bit_length": 1, "description": _desc_for(tier, d_phrase, role),
            })
        properties.append({
            "name": prop, "type": "boolean",
            "description": f"Whether the {phrase} flag is set. It reports true or false.",
        })
        truth[prop] = (frozenset({target}), "direct")

    for i, family in enumerate(_NUMERIC_FAMILIES):
        transformed = len(family) == 8
        if transformed:
            prop, phrase, prop_unit, layout, target, d1, d2, sig_unit = family
        else:
            prop, phrase, prop_unit, layout, target, d1, d2 = family
            sig_unit = prop_unit
        tier = family_tier()
        scale, offset, bits, rmin, rmax = layout
        add_signal({
            "name": target, "kind": "numerical",
            "bit_start": _distractor_layout(i + 20, 0), "bit_length": bits,
            "scale": scale, "offset": offset, "unit": sig_unit,
            "range_min": rmin, "range_max": rmax,
            "description": _desc_for(tier, phrase, "target"),
        })
        for j, (d_name, d_phrase, d_unit, d_layout) in enumerate((d1, d2), start=1):
            d_scale, d_offset, d_bits, d_rmin, d_rmax = d_layout
            role = "d1_misleading" if (tier == 2 and j == 1) else "distractor"
            add_signal({
                "name": d_name, "kind": "numerical",
                "bit_start": _distractor_layout(i + 20, j), "bit_length": d_bits,
                "scale": d_scale, "offset": d_offset, "unit": d_unit,
                "range_min": d_rmin, "range_max": d_rmax,
                "description": _desc_for(tier, d_phrase, role),
            })
        properties.append({
            "name": prop, "type": "number", "x-vehicle-unit": prop_unit,
            "description": (
                f"The {phrase} reported by the vehicle. "
                f"Values are expressed in {prop_unit}."
            ),
        })
        truth[prop] = (
            frozenset({target}), "transformed" if transformed else "direct"
        )

    for i, family in enumerate(_COMPOSED_FAMILIES):
        prop, phrase, target, child1, child2, d1, d2 = family
        tier = family_tier()
        children = []
        for k, (c_name, weight, bits, rmax) in enumerate((child1, child2)):
            add_signal({
                "name": c_name, "kind": "numerical",
                "bit_start": k * 16, "bit_length": bits,
                "range_min": 0, "range_max": rmax,
                "description": shorthand(f"{phrase} part"),
            })
            children.append({"name": c_name, "weight": weight})
        add_signal({
            "name": target, "kind": "object", "components": children,
            "description": _desc_for(tier, phrase, "target"),
        })
        for j, (d_name, d_phrase) in enumerate((d1, d2), start=1):
            role = "d1_misleading" if (tier == 2 and j == 1) else "distractor"
            add_signal({
                "name": d_name, "kind": "numerical",
                "bit_start": _distractor_layout(i + 34, j), "bit_length": 12,
                "range_min": 0, "range_max": 4000,
                "description": _desc_for(tier, d_phrase, role),
            })
        c1_name, c2_name = child1[0], child2[0]
        properties.append({
            "name": prop, "type": "number", "x-vehicle-semantic": "composite",
            "description": (
                f"Total {phrase}. It combines the signals {c1_name} and "
                f"{c2_name} as a weighted sum."
            ),
        })
        truth[prop] = (frozenset({c1_name, c2_name}), "composed")

    catalog_text = yamlio.dump({"signals": signals})
    catalog = parse_catalog(catalog_text, source_path="<distractor-corpus>")
    api_text = _api_document(properties, per_endpoint=5)
    return Corpus(
        catalog=catalog,
        catalog_text=catalog_text,
        api_text=api_text,
        api_spec=parse_api_spec(api_text),
        truth=truth,
        theta=TABLE5_THETA,
        margin=TABLE5_MARGIN,
    )


def _api_document(properties: list[dict], per_endpoint: int = 5) -> str:
    paths = {}
    for i in range(0, len(properties), per_endpoint):
        group = properties[i : i + per_endpoint]
        path = f"/vehicle/group{i // per_endpoint}"
        schema_properties = {}
        constraint_enums = {}
        constraint_ranges = {}
        for prop in group:
            entry = {k: v for k, v in prop.items() if k != "name"}
            schema_properties[prop["name"]] = entry
            if "enum" in prop:
                constraint_enums[prop["name"]] = list(prop["enum"])
            if "minimum" in prop and "maximum" in prop:
                constraint_ranges[prop["name"]] = {
                    "min": prop["minimum"], "max": prop["maximum"],
                }
        operation = {
            "responses": {
                "200": {
                    "content": {
                        "application/json": {
                            "schema": {
                                "type": "object",
                                "properties": schema_properties,
                            }
                        }
                    }
                }
            }
        }
        constraints = {}
        if constraint_enums:
            constraints["enums"] = constraint_enums
        if constraint_ranges:
            constraints["ranges"] = constraint_ranges
        if constraints:
            operation["x-vehicle-constraints"] = constraints
        paths[path] = {"get": operation}
    return yamlio.dump(
        {"openapi": "3.0.3", "info": {"title": "vehicle state", "version": "1"},
         "paths": paths}
    )


# ---------------------------------------------------------------------------
# Fault-seeded corpus (ablation + repair-rate experiments)
# ---------------------------------------------------------------------------

FAULT_CORPUS_THETA = 0.30
FAULT_CORPUS_MARGIN = 0.02

_FAULT_CATALOG = """
signals:
  - name: WiperMode
    kind: enum
    bit_start: 0
    bit_length: 2
    enum_map: {0: OFF, 1: INTERMITTENT, 2: ON, 3: FAST}
    description: front wiper mode selection
  - name: DoorAjar
    kind: enum
    bit_start: 2
    bit_length: 2
    enum_map: {0: CLOSED, 1: AJAR}
    description: cabin door ajar state
  - name: ParkBrakeOn
    kind: bool
    bit_start: 5
    bit_length: 1
    description: park brake engaged flag
  - name: HazardOn
    kind: bool
    bit_start: 6
    bit_length: 1
    description: hazard flasher engaged flag
  - name: VehicleSpeed
    kind: numerical
    bit_start: 8
    bit_length: 14
    scale: 0.01
    offset: 0
    unit: m/s
    range_min: 0
    range_max: 120
    description: vehicle speed over ground
  - name: CabinTemperature
    kind: numerical
    bit_start: 24
    bit_length: 8
    byte_order: big_endian
    signed: true
    scale: 0.5
    offset: 0
    unit: C
    range_min: -40
    range_max: 60
    description: cabin air temperature
  - name: FuelPercent
    kind: numerical
    bit_start: 32
    bit_length: 8
    scale: 0.5
    offset: 0
    unit: "%"
    range_min: 0
    range_max: 100
    description: fuel tank fill level
  - name: OdometerKm
    kind: numerical
    bit_start: 40
    bit_length: 16
    scale: 1
    offset: 0
    unit: km
    range_min: 0
    range_max: 65535
    description: total odometer distance
  - name: TripMinute
    kind: numerical
    bit_start: 56
    bit_length: 6
    range_min: 0
    range_max: 59
    description: trip duration minute part
  - name: TripSecond
    kind: numerical
    bit_start: 48
    bit_length: 6
    range_min: 0
    range_max: 59
    description: trip duration second part
  - name: TripTime
    kind: object
    components:
      - {name: TripMinute, weight: 60}
      - {name: TripSecond, weight: 1}
    description: total trip duration
"""

_FAULT_API = """
openapi: 3.0.3
info: {title: vehicle status, version: "1"}
paths:
  /status:
    get:
      parameters:
        - {name: vehicleId, in: query, required: true, schema: {type: string}}
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  wiperMode:
                    type: string
                    enum: [OFF, INTERMITTENT, ON, FAST]
                    description: "Front wiper mode selection. Possible values are: OFF, INTERMITTENT, ON, FAST."
                  parkBrakeOn:
                    type: boolean
                    description: Whether the park brake engaged flag is set. It reports true or false.
      x-vehicle-constraints:
        permission: driver
        enums:
          wiperMode: [OFF, INTERMITTENT, ON, FAST]
  /motion:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  displaySpeed:
                    type: number
                    x-vehicle-unit: km/h
                    minimum: 0
                    maximum: 432
                    description: The vehicle speed over ground reported by the vehicle. Values are expressed in km/h.
      x-vehicle-constraints:
        ranges:
          displaySpeed: {min: 0, max: 432}
  /odometer:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  odometerKm:
                    type: number
                    x-vehicle-unit: km
                    description: The total odometer distance reported by the vehicle. Values are expressed in km.
  /climate:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  cabinTemperature:
                    type: number
                    x-vehicle-unit: C
                    minimum: -40
                    maximum: 60
                    description: The cabin air temperature reported by the vehicle. Values are expressed in C.
                  hazardOn:
                    type: boolean
                    description: Whether the hazard flasher engaged flag is set. It reports true or false.
      x-vehicle-constraints:
        ranges:
          cabinTemperature: {min: -40, max: 60}
  /energy:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  fuelLevelPercent:
                    type: number
                    x-vehicle-unit: "%"
                    minimum: 0
                    maximum: 100
                    description: The fuel tank fill level reported by the vehicle. Values are expressed in %.
                  doorAjar:
                    type: string
                    enum: [CLOSED, AJAR]
                    description: "Cabin door ajar state. Possible values are: CLOSED, AJAR."
  /trip:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  tripDurationSeconds:
                    type: number
                    x-vehicle-semantic: composite
                    description: Total trip duration. It combines the signals TripMinute and TripSecond as a weighted sum.
"""

FAULT_TRUTH = {
    "wiperMode": (frozenset({"WiperMode"}), "direct"),
    "parkBrakeOn": (frozenset({"ParkBrakeOn"}), "direct"),
    "displaySpeed": (frozenset({"VehicleSpeed"}), "transformed"),
    "odometerKm": (frozenset({"OdometerKm"}), "direct"),
    "cabinTemperature": (frozenset({"CabinTemperature"}), "direct"),
    "hazardOn": (frozenset({"HazardOn"}), "direct"),
    "fuelLevelPercent": (frozenset({"FuelPercent"}), "direct"),
    "doorAjar": (frozenset({"DoorAjar"}), "direct"),
    "tripDurationSeconds": (frozenset({"TripMinute", "TripSecond"}), "composed"),
}

# Single-shot fault per signal, covering all four kinds and every bug class
# that can bite the kind (byte-order swaps are no-ops on byte-aligned 8-bit
# fields, so those signals get scale faults instead).
FAULT_ASSIGNMENTS = {
    "WiperMode": "bracket_misuse",
    "DoorAjar": "dropped_enum_entry",
    "ParkBrakeOn": "swapped_byte_order",
    "HazardOn": "swapped_byte_order",
    "VehicleSpeed": "swapped_byte_order",
    "CabinTemperature": "off_by_one_scale",
    "FuelPercent": "off_by_one_scale",
    "TripTime": "off_by_one_scale",
}


# Functional-domain tags for per-domain report grouping.
FAULT_DOMAINS = {
    "wiperMode": "cabin systems",
    "parkBrakeOn": "cabin systems",
    "cabinTemperature": "cabin systems",
    "hazardOn": "cabin systems",
    "doorAjar": "cabin systems",
    "displaySpeed": "motion and energy",
    "odometerKm": "motion and energy",
    "fuelLevelPercent": "motion and energy",
    "tripDurationSeconds": "motion and energy",
}


def build_fault_corpus() -> Corpus:
    catalog = parse_catalog(_FAULT_CATALOG, source_path="<fault-corpus>")
    return Corpus(
        catalog=catalog,
        catalog_text=_FAULT_CATALOG,
        api_text=_FAULT_API,
        api_spec=parse_api_spec(_FAULT_API),
        truth=FAULT_TRUTH,
        theta=FAULT_CORPUS_THETA,
        margin=FAULT_CORPUS_MARGIN,
        fault_assignments=FAULT_ASSIGNMENTS,
        domains=FAULT_DOMAINS,
    )


# ---------------------------------------------------------------------------
# Error-injection document (specification-error experiment)
# ---------------------------------------------------------------------------

def build_injection_document(n_numeric: int = 60, n_enum: int = 60) -> tuple[str, ApiSpec]:
    """A wide clean API document with enough example values to host the
    requested number of numeric and enum injection sites."""
    label_pool = [
        ["OFF", "ON"], ["LOW", "MID", "HIGH"], ["CLOSED", "OPEN"],
        ["IDLE", "ACTIVE"], ["A", "B", "C"],
    ]
    paths = {}
    numeric_done = 0
    enum_done = 0
    endpoint_index = 0
    while numeric_done < n_numeric or enum_done < n_enum:
        schema_properties = {}
        for _ in range(6):
            if numeric_done < n_numeric:
                name = f"metric{numeric_done:03d}"
                lo, hi = 0, 100 + (numeric_done % 7) * 50
                schema_properties[name] = {
                    "type": "number",
                    "minimum": lo,
                    "maximum": hi,
                    "example": (lo + hi) // 2,
                    "description": f"Telemetry metric {numeric_done}.",
                }
                numeric_done += 1
            if enum_done < n_enum:
                name = f"mode{enum_done:03d}"
                labels = label_pool[enum_done % len(label_pool)]
                schema_properties[name] = {
                    "type": "string",
                    "enum": list(labels),
                    "example": labels[enum_done % len(labels)],
                    "description": f"Mode selector {enum_done}.",
                }
                enum_done += 1
        paths[f"/telemetry/page{endpoint_index}"] = {
            "get": {
                "responses": {
                    "200": {
                        "content": {
                            "application/json": {
                                "schema": {
                                    "type": "object",
                                    "properties": schema_properties,
                                }
                            }
                        }
                    }
                }
            }
        }
        endpoint_index += 1
    text = yamlio.dump(
        {"openapi": "3.0.3", "info": {"title": "telemetry", "version": "1"},
         "paths": paths}
    )
    return text, parse_api_spec(text)


# ---------------------------------------------------------------------------
# Wide codec fixture (brute-force correctness experiment)
# ---------------------------------------------------------------------------

def build_codec_fixture_catalog(count: int = 200, seed: int = 7) -> SignalCatalog:
    """A seeded catalog of `count` signals across all kinds and layouts.

    Field widths stay at or below 16 bits (a handful exactly 16), keeping
    the entire raw domain enumerable; object children stay within 12 bits
    combined so composed domains enumerate too.
    """
    rng = random.Random(seed)
    signals: list[dict] = []
    sixteen_bit_budget = 5

    def numeric(i: int) -> dict:
        nonlocal sixteen_bit_budget
        if sixteen_bit_budget > 0 and rng.random() < 0.08:
            bits = 16
            sixteen_bit_budget -= 1
        else:
            bits = rng.choice([4, 5, 6, 8, 8, 10, 10, 12, 12])
        signed = rng.random() < 0.3
        scale = rng.choice([1.0, 0.5, 0.25, 0.1, 0.01, 2.0, -0.5])
        offset = rng.choice([0.0, 0.0, -40.0, 10.0, 1.5])
        record = {
            "name": f"Num{i:03d}",
            "kind": "numerical",
            "bit_start": rng.randrange(0, 65 - bits),
            "bit_length": bits,
            "byte_order": rng.choice(["little_endian", "big_endian"]),
            "signed": signed,
            "scale": scale,
            "offset": offset,
            "description": f"fixture numeric channel {i}",
        }
        if rng.random() < 0.4:
            lo_raw = -(1 << (bits - 1)) if signed else 0
            hi_raw = (1 << (bits - 1)) - 1 if signed else (1 << bits) - 1
            bounds = sorted((scale * lo_raw + offset, scale * hi_raw + offset))
            span = bounds[1] - bounds[0]
            record["range_min"] = bounds[0] + 0.1 * span
            record["range_max"] = bounds[1] - 0.1 * span
        return record

    def enum(i: int) -> dict:
        bits = rng.choice([2, 2, 3, 4])
        n_labels = rng.randrange(2, min(1 << bits, 9) + 1)
        keys = rng.sample(range(1 << bits), n_labels)
        return {
            "name": f"Enu{i:03d}",
            "kind": "enum",
            "bit_start": rng.randrange(0, 65 - bits),
            "bit_length": bits,
            "byte_order": rng.choice(["little_endian", "big_endian"]),
            "enum_map": {key: f"STATE_{i}_{key}" for key in sorted(keys)},
            "description": f"fixture mode selector {i}",
        }

    def flag(i: int) -> dict:
        return {
            "name": f"Flg{i:03d}",
            "kind": "bool",
            "bit_start": rng.randrange(0, 64),
            "bit_length": 1,
            "byte_order": rng.choice(["little_endian", "big_endian"]),
            "description": f"fixture flag {i}",
        }

    def composed(i: int) -> list[dict]:
        major_weight = rng.choice([10, 24, 60])
        minor_bits = (major_weight - 1).bit_length()
        major_bits = rng.choice([4, 5, 6])
        major = {
            "name": f"CmpA{i:03d}",
            "kind": "numerical",
            "bit_start": 0,
            "bit_length": major_bits,
            "range_min": 0,
            "range_max": (1 << major_bits) - 1,
            "description": f"fixture composed major {i}",
        }
        minor = {
            "name": f"CmpB{i:03d}",
            "kind": "numerical",
            "bit_start": 8 * ((major_bits + 7) // 8),
            "bit_length": minor_bits,
            "range_min": 0,
            "range_max": major_weight - 1,
            "description": f"fixture composed minor {i}",
        }
        parent = {
            "name": f"Cmp{i:03d}",
            "kind": "object",
            "components": [
                {"name": major["name"], "weight": major_weight},
                {"name": minor["name"], "weight": 1},
            ],
            "description": f"fixture composed channel {i}",
        }
        return [major, minor, parent]

    i = 0
    while len(signals) < count:
        slot = i % 8
        if slot in (0, 1):
            signals.append(enum(i))
        elif slot == 2:
            signals.append(flag(i))
        elif slot == 7 and len(signals) + 3 <= count:
            signals.extend(composed(i))
        else:
            signals.append(numeric(i))
        i += 1
    signals = signals[:count]
    return parse_catalog(yamlio.dump({"signals": signals}), source_path="<codec-fixture>")
