"""Exercises the Python bindings end to end on small known cases.

Uses an installed `invlift_py` if one is importable, otherwise loads the
cargo-built extension straight from the workspace target directory
(building it first when missing). Exits nonzero on the first failure.
"""

import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    try:
        import invlift_py
    except ImportError:
        pass
    else:
        return invlift_py
    lib = next(
        (
            p
            for profile in ("release", "debug")
            if (p := ROOT / "target" / profile / "libinvlift_py.so").exists()
        ),
        None,
    )
    if lib is None:
        subprocess.run(
            ["cargo", "build", "--release", "-p", "invlift-py"], cwd=ROOT, check=True
        )
        lib = ROOT / "target" / "release" / "libinvlift_py.so"
    stage = Path(tempfile.mkdtemp(prefix="invlift-smoke-"))
    shutil.copy2(lib, stage / "invlift_py.so")
    sys.path.insert(0, str(stage))
    import invlift_py

    return invlift_py


CHECKS = 0


def check(cond, label):
    global CHECKS
    if not cond:
        print(f"FAIL: {label}", file=sys.stderr)
        sys.exit(1)
    CHECKS += 1


def main():
    inv = load_module()

    s2 = inv.System("symmetric_complex", 2)
    check(s2.degrees == [1, 2], "symmetric degrees")
    check(s2.generators() == ["x1 + x2", "x1*x2"], "symmetric generators")
    check(s2.sigma([3, 5]) == [8 + 0j, 15 + 0j], "sigma at an integer point")
    fiber = sorted(s2.fiber(["8", "15"]), key=lambda c: c.real)
    check(
        all(abs(a - b) < 1e-9 for a, b in zip(fiber, [3, 5])),
        "fiber recovers the point up to order",
    )

    tz3 = inv.System("symmetric_real_trace_zero", 3)
    check(tz3.real and tz3.num_invariants == 2, "trace zero invariant count")
    check(tz3.degrees == [2, 3], "trace zero degrees")

    band = inv.System("signed_perm_real", 2)
    check(band.membership([5, 4]) == "inside", "membership accepts sigma image")
    check(band.membership([1, 1]) == "outside", "membership rejects 1 < 4*1")

    charts = inv.lift_curve(s2, ["0", "-t"])
    check(charts["artifact"] == "lift_charts", "curve artifact tag")
    check(charts["result"]["chart_count"] == 2, "square root pair takes two charts")
    check(
        all(r["ok"] and r["exact"] for r in charts["result"]["residuals"]),
        "curve residuals certify the identity",
    )

    surface = inv.lift_surface(s2, ["0", "-x*y"])
    check(surface["result"]["chart_count"] == 4, "quadrant surface takes four charts")
    check(
        all(r["ok"] for r in surface["result"]["residuals"]),
        "surface residuals certify the identity",
    )

    tree = inv.resolve(["x*y^2 - y^3 - x^4 + x^3*y"], budget=400)
    check(tree["artifact"] == "resolution_tree", "resolve artifact tag")
    check(tree["result"]["blowups"] >= 1, "quartic product needs a blow-up")
    leaves = tree["result"]["leaves"]
    check(leaves and all(l["certified"] for l in leaves), "all leaves certified")

    report = inv.verify_lift(s2, ["0", "-t"], nvars=1, grid_levels=[6, 8, 10])["result"][
        "report"
    ]
    check(report["residual_pass"], "verification residual")
    check(report["gradient_pass"], "gradient ladder consistency")
    check(report["sbv_pass"], "bounded variation flag")

    sec = inv.section(s2, radius="2", level=3)["result"]["report"]
    check(sec["residual_pass"], "section inverts the quotient on the grid")

    job = {
        "subcommand": "check-membership",
        "family": "signed_perm_real",
        "n": 2,
        "components": ["5", "4"],
    }
    check(inv.run_job(job)["result"]["verdict"] == "inside", "job from a dict")
    check(
        inv.run_job('{"subcommand": "describe", "family": "symmetric_complex", "n": 3}')[
            "result"
        ]["degree_product"]
        == 6,
        "job from a JSON string",
    )

    try:
        inv.System("nope", 2)
    except ValueError:
        pass
    else:
        check(False, "bad family raises ValueError")
    check(True, "bad family raises ValueError")

    try:
        inv.lift_curve(s2, ["0"])
    except ValueError:
        pass
    else:
        check(False, "wrong component count raises ValueError")
    check(True, "wrong component count raises ValueError")

    print(f"smoke test passed ({CHECKS} checks)")


if __name__ == "__main__":
    main()
