"""Smoke test for the swingvi Python extension.

Build and install first:
    pip install maturin
    maturin build --release -m crates/python/Cargo.toml -o dist
    pip install dist/swingvi-*.whl
"""

import math

import swingvi


def main():
    th, lim = swingvi.boundary_angles()
    assert abs(math.degrees(th) - 63.985) < 1e-2, th
    assert abs(math.degrees(lim) - 78.955) < 1e-2, lim
    assert 0.36 < swingvi.variable_gain() < 0.37

    # adaptive active segment lies on a circle of radius |V_g| / I_max
    zg_zl = sum(complex(m * math.cos(math.radians(84.29)), m * math.sin(math.radians(84.29))) for m in (0.3, 0.6))
    arc = [z for _, z, seg in swingvi.trajectory("adaptive", 720) if seg == "active_adaptive"]
    assert arc and all(abs(abs(z - zg_zl) - 1 / 1.2) < 1e-12 for z in arc)

    curve = swingvi.p_delta("variable", 2001)
    peak = max(p for _, p, _ in curve)
    assert peak < max(p for _, p, _ in swingvi.p_delta("none", 2001))

    assert "caseA1" in swingvi.CASE_IDS
    s = swingvi.Scenario.case("caseA1")
    assert swingvi.Scenario.from_json(s.to_json()).to_json() == s.to_json()
    rec = s.simulate()
    assert len(rec) == len(rec.t) == round(s.horizon / s.dt) + 1
    assert rec.verdict()["classification"] == "Stable"

    try:
        swingvi.Scenario.from_json("")
    except ValueError as e:
        assert "parse error" in str(e)
    else:
        raise AssertionError("empty scenario accepted")

    print("smoke test passed:", s, rec.verdict())


if __name__ == "__main__":
    main()
