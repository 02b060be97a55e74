import pytest

from signalforge.apispec import parse_api_spec
from signalforge.speccheck import detect_errors, inject_errors

GOVERNING_DOC = """
paths:
  /dashboard:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  speed:
                    type: number
                    minimum: 0
                    maximum: 255
                    example: 50
                  mode:
                    type: string
                    enum: [ON, OFF]
                    example: "ON"
                  pressure:
                    type: number
                    minimum: 0
                    maximum: 1000
                    example: 400
"""


@pytest.fixture(scope="module")
def governing():
    return parse_api_spec(GOVERNING_DOC)


def test_clean_document_yields_no_diagnostics(governing):
    assert detect_errors(GOVERNING_DOC, governing) == []


def test_out_of_range_value_detected(governing):
    doc = GOVERNING_DOC.replace("example: 50", "example: 260")
    diagnostics = detect_errors(doc, governing)
    assert len(diagnostics) == 1
    diag = diagnostics[0]
    assert diag.error_type == "out_of_range"
    assert diag.found == 260
    assert "0..255" in diag.expected
    assert "speed" in diag.location


def test_invalid_enum_detected(governing):
    doc = GOVERNING_DOC.replace('example: "ON"', 'example: "AUTO"')
    diagnostics = detect_errors(doc, governing)
    assert len(diagnostics) == 1
    diag = diagnostics[0]
    assert diag.error_type == "invalid_enum"
    assert diag.found == "AUTO"
    assert "ON" in diag.expected and "OFF" in diag.expected


def test_catalog_supplements_domains(governing, small_catalog):
    doc = """
paths:
  /x:
    get:
      responses:
        "200":
          content:
            application/json:
              schema:
                type: object
                properties:
                  CabinTemp:
                    type: number
                    example: 900
"""
    diagnostics = detect_errors(doc, governing, small_catalog)
    assert len(diagnostics) == 1
    assert diagnostics[0].error_type == "out_of_range"
    assert "signal CabinTemp" in diagnostics[0].expected


def test_injection_markers_all_detected(governing):
    mutated, markers = inject_errors(
        GOVERNING_DOC, governing, n_out_of_range=2, n_invalid_enum=1, seed=7
    )
    assert len(markers) == 3
    diagnostics = detect_errors(mutated, governing)
    found = {(d.location, d.error_type) for d in diagnostics}
    for marker in markers:
        assert (marker.location, marker.error_type) in found
    # Recall 1.0 and no false positives on this fixture.
    assert len(diagnostics) == len(markers)


def test_injection_is_deterministic(governing):
    first = inject_errors(GOVERNING_DOC, governing, n_out_of_range=2, n_invalid_enum=1, seed=3)
    second = inject_errors(GOVERNING_DOC, governing, n_out_of_range=2, n_invalid_enum=1, seed=3)
    assert first == second


def test_injection_requires_enough_sites(governing):
    from signalforge.errors import SchemaError

    with pytest.raises(SchemaError):
        inject_errors(GOVERNING_DOC, governing, n_out_of_range=50, n_invalid_enum=1)
