"""Small registry of physical unit conversions used during alignment.

A conversion maps a source unit to a target unit as
``target = factor * source + offset``. Only pairs needed by vehicle-state
properties are registered; unknown pairs return None and the caller decides
whether to flag the mapping.
"""

from __future__ import annotations

from typing import Optional

_CONVERSIONS: dict[tuple[str, str], tuple[float, float]] = {
    ("m/s", "km/h"): (3.6, 0.0),
    ("km/h", "m/s"): (1.0 / 3.6, 0.0),
    ("kPa", "bar"): (0.01, 0.0),
    ("bar", "kPa"): (100.0, 0.0),
    ("C", "F"): (1.8, 32.0),
    ("F", "C"): (5.0 / 9.0, -160.0 / 9.0),
    ("C", "K"): (1.0, 273.15),
    ("K", "C"): (1.0, -273.15),
    ("s", "min"): (1.0 / 60.0, 0.0),
    ("min", "s"): (60.0, 0.0),
    ("min", "h"): (1.0 / 60.0, 0.0),
    ("h", "min"): (60.0, 0.0),
    ("km", "mi"): (0.621371, 0.0),
    ("mi", "km"): (1.609344, 0.0),
    ("rpm", "Hz"): (1.0 / 60.0, 0.0),
    ("Hz", "rpm"): (60.0, 0.0),
    ("Wh", "kWh"): (0.001, 0.0),
    ("kWh", "Wh"): (1000.0, 0.0),
    ("V", "mV"): (1000.0, 0.0),
    ("mV", "V"): (0.001, 0.0),
    ("L", "gal"): (0.264172, 0.0),
    ("gal", "L"): (3.785412, 0.0),
}


def conversion(source: Optional[str], target: Optional[str]) -> Optional[tuple[float, float]]:
    """(factor, offset) turning source-unit values into target-unit values."""
    if source is None or target is None:
        return None
    if source == target:
        return (1.0, 0.0)
    return _CONVERSIONS.get((source, target))
