"""Smoke test for the henon4 extension module."""

import math

import henon4


def main():
    assert len(henon4.Profile.corpus_names()) >= 10

    u = henon4.Profile.named("poly2")
    assert abs(u.value(0.0) - 1.0) < 1e-12
    e = u.energy()
    assert abs(u.scaled(2.0).energy() - 4.0 * e) < 1e-9 * e
    v = u.normalized()
    assert abs(v.energy() - 1.0) < 1e-10
    assert v.pointwise_margin() <= 1.0 + 1e-9

    sa = henon4.sigma_alpha(4.0)
    assert abs(sa - 64.0 * math.pi**2) < 1e-9
    val = v.functional(4.0, 0.9 * sa)
    assert 0.0 < val <= henon4.series_upper_bound(4.0, 0.9 * sa)

    eps = [10.0**-k for k in range(2, 11)]
    up = henon4.blowup_scan(0.0, 1.2, eps)
    assert up["verdict"] == "diverging", up["verdict"]
    down = henon4.blowup_scan(0.0, 0.8, eps, bc="navier")
    assert down["verdict"] == "bounded", down["verdict"]

    report = henon4.Profile.random(3).talenti_check()
    assert report["holds"] and report["l2_ok"] and report["mass_ok"]

    scan = dict(henon4.marshall_moser_scan())
    assert abs(scan["zero"] - 1.0) < 1e-12
    assert all(math.isfinite(x) for x in scan.values())

    sweep = henon4.symmetry_sweep([16.0, 32.0, 64.0, 128.0], m=2)
    assert len(sweep["rows"]) == 4
    assert -4.3 <= sweep["fitted_slopes"]["bump"] <= -3.8

    try:
        henon4.Profile.moser(2.0)
    except ValueError:
        pass
    else:
        raise AssertionError("epsilon >= 1 must raise")

    print("henon4 smoke test ok:", u, f"energy={e:.6f}", f"alpha*={sweep['alpha_star']}")


if __name__ == "__main__":
    main()
