"""Smoke test for the floor_relu extension module.

Build and install first:

    pip install maturin
    pip install --no-build-isolation -e crates/python
    python crates/python/python/smoke_test.py
"""

import json
import tempfile
from fractions import Fraction
from pathlib import Path

import floor_relu as fr


def main():
    net, cert = fr.build("mean", 1, 2, 2, theorem=2)
    assert cert.bound == Fraction(3, 8), cert.bound
    audit = net.audit()
    assert audit["width"] <= 18 and audit["depth"] <= 31, audit
    for x in ["0", "1/2^2", 0.5, Fraction(3, 4), 1]:
        y = net.eval([x])[0]
        assert isinstance(y, Fraction)
        assert abs(y - Fraction(x if not isinstance(x, str) else eval_str(x))) <= cert.bound

    report = fr.verify(net, cert, grid=65, seed=3)
    assert report["pass"], report

    with tempfile.TemporaryDirectory() as d:
        p = Path(d)
        net.save(p / "net.json")
        cert.save(p / "cert.json")
        net2 = fr.Network.load(p / "net.json")
        cert2 = fr.Certificate.load(p / "cert.json")
        assert net2.to_json() == net.to_json()
        assert cert2.to_dict() == cert.to_dict()
        assert fr.verify(net2, cert2, grid=65, seed=3) == report

    fitter = fr.point_fitter(2, 3, "10010110")
    assert [int(fitter.eval([m])[0]) for m in range(1, 9)] == [1, 0, 0, 1, 0, 1, 1, 0]
    assert (fitter.width, fitter.depth) == (6, 19)

    assert fr.exhaustive_bit_check("block", 2, 2)["failures"] == 0
    demo = fr.memorization_demo(2, 6, seed=1)
    assert demo["all_exact"] and demo["points"] == 64

    wide = fr.point_fitter(2, 6, "1" * 64)
    probe = fr.float_divergence_probe(wide, [[m] for m in range(1, 65)])
    assert probe["divergences"], "binary64 should lose the 64-bit constant"

    assert fr.bound_theorem2("mean", 1, 2, 2) == Fraction(3, 8)
    assert fr.reparameterize(4, 1) == (3, 3)
    assert {t[0] for t in fr.targets()} >= {"mean", "product", "min", "spike", "const"}

    try:
        fr.Network.from_json('{"input_dim": 1, "layers": [], "out": {"w": [[{"m": "1x", "e": 0}]], "b": []}}')
    except fr.FloorReluError as e:
        assert "out" in str(e), e
    else:
        raise AssertionError("malformed mantissa accepted")

    print(json.dumps({"bound": str(cert.bound), "max_abs_error": report["max_abs_error"], "samples": report["sample_count"]}))
    print("smoke test passed")


def eval_str(s):
    p, q = s.split("/2^") if "/2^" in s else (s, "0")
    return Fraction(int(p), 2 ** int(q))


if __name__ == "__main__":
    main()
