"""Smoke test for the onebit_cs extension module.

Build and install first:  maturin develop -m crates/python/Cargo.toml --release
"""

import json
import math

import onebit_cs as ob


def norm(v):
    return math.sqrt(sum(x * x for x in v))


def main():
    print("onebit_cs", ob.__version__)

    assert ob.prune([3.0, -5.0, 1.0], 2) == [3.0, -5.0, 0.0]
    assert ob.prune([2.0, -2.0, 1.0], 1) == [2.0, 0.0, 0.0]
    assert ob.build_weights([0, 2], 0.5, 4) == [1.0, 0.5, 1.0, 0.5]

    n, k, m = 128, 4, 200
    x = ob.generate_signal(n, k, seed=1)
    assert len(x.support) == k and abs(norm(x.values) - 1.0) < 1e-12
    a = ob.generate_matrix(m, n, seed=2)
    y = ob.measure(a, x.values)
    assert set(y) <= {-1.0, 1.0}

    base = ob.biht(a, y, k)
    assert abs(norm(base.estimate) - 1.0) < 1e-12
    assert sum(v != 0.0 for v in base.estimate) <= k
    assert ob.biht_step(base.estimate, a, y, 1e-3) == base.estimate or not base.consistent

    est = ob.make_support_estimate(x.support, 0.75, n, seed=3)
    results = {
        "biht": base,
        "oracle": ob.biht_oracle(a, y, x.support, c=0.0),
        "fourset": ob.biht_fourset(a, y, k, est, 0.75),
        "psw": ob.biht_psw(a, y, k, est, 0.75),
        "urw": ob.biht_urw(a, y, k, 0.5, 2),
        "urw_oracle": ob.biht_urw(a, y, k, 0.5, 1, initial_support=x.support),
    }
    for name, r in results.items():
        err = ob.mse(x.values, r.estimate)
        cons = ob.sign_consistency(a, r.estimate, y)
        rec = ob.support_recall(x.support, r.estimate)
        print(f"{name:>10}: mse={err:.4f} consistency={cons:.3f} recall={rec:.2f} {r!r}")
        assert 0.0 <= err <= 4.0

    # psw with zero confidence reduces to biht exactly
    assert ob.biht_psw(a, y, k, est, 0.0).estimate == base.estimate

    try:
        ob.prune([1.0], 2)
    except ValueError:
        pass
    else:
        raise AssertionError("prune should reject k > len")

    cfg = json.loads(ob.figure_config("fig1", trials=3, seed=5))
    cfg["m_grid"] = [50, 100]
    result = ob.run_sweep(json.dumps(cfg), workers=2)
    assert len(result) == 2 * 3
    csv = result.to_csv()
    assert csv.splitlines()[0].startswith("m,variant,param_name,param_value")
    assert csv == ob.run_sweep(json.dumps(cfg), workers=1).to_csv()
    assert result.to_svg().lstrip().startswith("<?xml")
    print(f"sweep rows: {len(result)}")
    print("ok")


if __name__ == "__main__":
    main()
