"""Session fixtures: reference scenario, synthetic fast impactor, and
cached heavy computations shared by the acceptance suite."""

import math

import numpy as np
import pytest

from slowpush import (
    AsteroidBody,
    Epoch,
    ForceModelConfig,
    GeodeticPoint,
    ImpactRecord,
    StateVector,
    ThrustLaw,
    cartesian_to_equinoctial,
    deflection_sweep,
    impact_from_elements,
    impact_from_state,
    propagate,
    risk_path,
)
from slowpush.constants import AU, R_MEAN_KM
from slowpush.dynamics import DEFAULT_INTEGRATOR
from slowpush.elements import EquinoctialElements
from slowpush.ephemeris import kernel_state

# reference heliocentric orbit of the study scenario (mean ecliptic of
# date at the reference epoch)
REF_A_AU = 1.775998173759480
REF_P1 = -0.448551534990503
REF_P2 = 0.198239860639469
REF_Q1 = -0.015660086557340
REF_Q2 = 0.043990645962994
REF_ML_DEG = 264.0060035482113
REF_EPOCH_MJD = 57125.0

CITY_DELHI = GeodeticPoint(28.6139, 77.2090)
CITY_DHAKA = GeodeticPoint(23.8103, 90.4125)
CITY_TEHRAN = GeodeticPoint(35.6892, 51.3890)

THREADS = 8


def reference_elements() -> EquinoctialElements:
    return EquinoctialElements(
        a=REF_A_AU * AU, p1=REF_P1, p2=REF_P2, q1=REF_Q1, q2=REF_Q2,
        ml_deg=REF_ML_DEG, epoch=Epoch(REF_EPOCH_MJD))


@pytest.fixture(scope="session")
def ref_elements():
    return reference_elements()


@pytest.fixture(scope="session")
def force_default():
    return ForceModelConfig()


@pytest.fixture(scope="session")
def fast_impactor():
    """Synthetic 40-day impactor: cheap, certain impact for unit tests.

    Built by placing a state just above the surface moving into the
    Earth and propagating backward; the forward run then re-impacts in
    well under a minute of wall clock.
    """
    t_contact = 58000.0
    earth = kernel_state(2, t_contact)
    u = np.array([0.3, -0.5, 0.81])
    u /= np.linalg.norm(u)
    t_hat = np.array([0.81, 0.3, -0.11])
    t_hat -= u * (t_hat @ u)
    t_hat /= np.linalg.norm(t_hat)
    r = earth[:3] + u * (R_MEAN_KM * 1e3 + 200e3)
    v = earth[3:] - u * 12000.0 + t_hat * 6000.0
    s_contact = StateVector(r, v, Epoch(t_contact))
    fcfg = ForceModelConfig()
    s_start = propagate(s_contact, Epoch(t_contact - 40.0), fcfg,
                        DEFAULT_INTEGRATOR).final_state
    el = cartesian_to_equinoctial(s_start)
    rec = impact_from_state(s_start, fcfg, DEFAULT_INTEGRATOR,
                            horizon_days=45.0)
    assert isinstance(rec, ImpactRecord)
    return {"state": s_start, "elements": el, "record": rec,
            "contact_mjd": t_contact}


def _corridor_probe(el, offset, fcfg):
    shifted = el.with_epoch(el.epoch.plus_days(offset))
    return impact_from_elements(shifted, fcfg, DEFAULT_INTEGRATOR)


def _bisect_edge(el, fcfg, off_hit, off_miss, iters=26):
    """Offset of the impact-window edge between a hitting and a missing
    probe, to about 1e-8 day."""
    for _ in range(iters):
        mid = 0.5 * (off_hit + off_miss)
        if isinstance(_corridor_probe(el, mid, fcfg), ImpactRecord):
            off_hit = mid
        else:
            off_miss = mid
    return off_hit


@pytest.fixture(scope="session")
def corridor(ref_elements, force_default):
    """Impact window edges and a scan of the ground corridor."""
    el, fcfg = ref_elements, force_default
    assert isinstance(_corridor_probe(el, 0.004, fcfg), ImpactRecord)
    assert not isinstance(_corridor_probe(el, 0.0, fcfg), ImpactRecord)
    assert not isinstance(_corridor_probe(el, 0.013, fcfg), ImpactRecord)
    lo = _bisect_edge(el, fcfg, 0.004, 0.0)
    hi = _bisect_edge(el, fcfg, 0.004, 0.013)
    west = _corridor_probe(el, lo, fcfg)
    east = _corridor_probe(el, hi, fcfg)
    offsets = list(np.linspace(lo, hi, 41))
    scan = risk_path(el, offsets, fcfg, DEFAULT_INTEGRATOR,
                     max_workers=THREADS)
    return {"lo": lo, "hi": hi, "west": west, "east": east, "scan": scan}


@pytest.fixture(scope="session")
def delhi_anchor(ref_elements, force_default, corridor):
    """Offset whose impact point is nearest New Delhi, plus its record."""
    from slowpush import reanchor_epoch

    off = reanchor_epoch(ref_elements, CITY_DELHI,
                         (corridor["lo"], corridor["hi"]),
                         force_default, DEFAULT_INTEGRATOR,
                         max_workers=THREADS)
    rec = _corridor_probe(ref_elements, off, force_default)
    assert isinstance(rec, ImpactRecord)
    return {"offset": off, "record": rec}


@pytest.fixture(scope="session")
def delhi_sweep(ref_elements, force_default, delhi_anchor):
    """Westward push sweep, 1 to 33 months, anchored at the Delhi offset."""
    el = ref_elements.with_epoch(
        ref_elements.epoch.plus_days(delhi_anchor["offset"]))
    body = AsteroidBody(250.0, 2000.0)
    law = ThrustLaw(f0_N=0.185, exponent=1.7, sign=-1, start=Epoch(58788.0))
    return deflection_sweep(el, body, law, [float(m) for m in range(1, 34)],
                            force_default, DEFAULT_INTEGRATOR,
                            max_workers=THREADS)


# -- acceptance criteria reporting -----------------------------------

_CRITERIA = []


@pytest.fixture(scope="session")
def criterion():
    """Record one acceptance-criterion outcome; assert afterwards."""

    def record(number: int, passed, detail: str) -> None:
        status = {True: "PASS", False: "FAIL", None: "REPORT"}[passed]
        _CRITERIA.append((number, status, detail))

    return record


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, status, detail in sorted(_CRITERIA):
        terminalreporter.write_line(
            "criterion %2d %-6s %s" % (number, status, detail))
