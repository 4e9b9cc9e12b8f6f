"""Builds the extension module, imports it and exercises the main entry points.

Usage: python3 python/smoke_test.py [--release]
"""

import math
import pathlib
import shutil
import subprocess
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def build(release):
    cmd = ["cargo", "build", "-p", "scramble-py"] + (["--release"] if release else [])
    subprocess.run(cmd, cwd=ROOT, check=True)
    lib = ROOT / "target" / ("release" if release else "debug") / "libscramble.so"
    dest = pathlib.Path(tempfile.mkdtemp()) / "scramble.so"
    shutil.copy(lib, dest)
    sys.path.insert(0, str(dest.parent))


def close(a, b, tol):
    return all(abs(x - y) <= tol for x, y in zip(a, b))


def main():
    build("--release" in sys.argv)
    import scramble

    times = [0.0, 0.5, 1.0, 2.0]

    ising = scramble.Model.ising(n_spins=3, split=1, theta=7 * math.pi / 16)
    print(ising)
    assert (ising.d_a, ising.d_b) == (2, 4) and ising.is_closed
    g = ising.otoc_unitary(times)
    e = ising.operator_entanglement(times)
    assert abs(g[0]) < 1e-10 and close(g, e, 1e-10), (g, e)
    assert all(-1e-12 <= x <= 1 for x in g)

    means, errs = ising.otoc_haar_mc(times[1:], n_pairs=200, seed=3)
    assert all(abs(m - x) <= 4 * s for m, x, s in zip(means, g[1:], errs)), (means, g, errs)

    thermo = ising.entropy_production_unitary(times)
    assert close(thermo["sum"], thermo["env_relative"], 1e-9)
    assert min(thermo["sigma"]) >= -1e-9

    closed = scramble.Model.dicke(**{"lambda": 1.0})
    assert closed.dim == 9
    assert close(closed.otoc_open(times), closed.otoc_unitary(times), 1e-8)

    dicke = scramble.Model.dicke(**{"lambda": 1.5, "gamma": 0.05, "kappa": 0.05, "temp_a": 2.0, "temp_b": 2.0})
    print(dicke, dicke.jump_labels)
    report = dicke.check_cptp([0.5, 2.0])
    assert report["passed"], report["failures"]
    sigma = dicke.entropy_production_gksl([0.0, 1.0, 2.0, 4.0], 2.0)
    assert all(b >= a - 1e-9 for a, b in zip(sigma, sigma[1:])), sigma
    open_g = dicke.otoc_open(times)
    assert abs(open_g[0]) < 1e-10

    u = scramble.haar_unitary(4, 11)
    assert abs(scramble.otoc_of_unitary(u, 2, 2) - scramble.operator_entanglement_of(u, 2, 2)) < 1e-10
    rho = [[0.75, 0.0], [0.0, 0.25]]
    assert abs(scramble.vn_entropy(rho) - (-0.75 * math.log(0.75) - 0.25 * math.log(0.25))) < 1e-12
    assert scramble.rel_entropy(rho, [[1.0, 0.0], [0.0, 0.0]]) == math.inf

    try:
        scramble.Model.ising(n_spins=3, spin=2)
    except ValueError as err:
        print("rejected unknown parameter:", err)
    else:
        raise AssertionError("unknown parameter accepted")

    scenario = scramble.Scenario.load(ROOT / "scenarios" / "ising_otoc_vs_entanglement.toml")
    members = scenario.expand()
    label, first = members[0]
    short = first.with_parameter("time_grid.n_points", 10)
    table = short.run()
    assert close(table["otoc_unitary"], table["op_entanglement"], 1e-10)
    print(label, {k: len(v) for k, v in table.items()})

    checks = scramble.run_checks()
    for name, passed, detail in checks:
        print("PASS" if passed else "FAIL", name, detail)
    assert all(p for _, p, _ in checks)
    print("smoke test passed")


if __name__ == "__main__":
    main()
