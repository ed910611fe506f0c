import copy
import json

import pytest

from dimlab.construction import (BVParams, HolderParams, build_bv_certificate,
                                 build_holder_certificate, center_from_spec)
from dimlab.verify import certificate_from_json, certificate_to_json, verify_certificate

ZERO = center_from_spec("constant:c=0")


@pytest.fixture(scope="module")
def holder_json():
    cert = build_holder_certificate(HolderParams("1/2", 2, 1, 2, "1/4"), ZERO)
    return certificate_to_json(cert)


def _ok(data):
    return all(c.ok for c in verify_certificate(certificate_from_json(data)))


def test_round_trip_is_identity(holder_json):
    text = json.dumps(holder_json)
    again = certificate_to_json(certificate_from_json(json.loads(text)))
    assert again == holder_json
    assert _ok(holder_json)


def test_bv_round_trip():
    data = certificate_to_json(build_bv_certificate(BVParams(2, 1, 1), ZERO))
    assert certificate_to_json(certificate_from_json(data)) == data
    assert _ok(data)


@pytest.mark.parametrize("key,field,value", [
    ("separation", "lhs", "1/31"),
    ("window_upper", "rhs", "1"),
    ("system_budget", "verdict", False),
    ("ball_nesting", "lhs", "0"),
])
def test_tampered_ledger_detected(holder_json, key, field, value):
    data = copy.deepcopy(holder_json)
    for e in data["ledger"]:
        if e["id"] == key:
            e[field] = value
    assert not _ok(data)


def test_tampered_functions_detected(holder_json):
    data = copy.deepcopy(holder_json)
    data["f1"]["values"][3] = "5"
    assert not _ok(data)
    data = copy.deepcopy(holder_json)
    data["plan"]["k"] += 1
    assert not _ok(data)
    data = copy.deepcopy(holder_json)
    data["ledger"] = data["ledger"][:-1]
    assert not _ok(data)


def test_bad_format_rejected(holder_json):
    data = dict(holder_json, format="other/1")
    with pytest.raises(ValueError):
        certificate_from_json(data)


def test_float_certificate_verifies():
    cert = build_holder_certificate(HolderParams(0.55, 2, 1, 2, "1/4"), ZERO)
    data = certificate_to_json(cert)
    assert data["mode"] == "empirical"
    assert _ok(json.loads(json.dumps(data)))
