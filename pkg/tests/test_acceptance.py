"""Acceptance criteria 1-11, one PASS/FAIL line each.

Tolerances and runtime limits are pinned here independently of
``cylschur.verify`` so that loosening a check there fails this module.
Run directly (``python tests/test_acceptance.py``) for the bare report.
"""
import pytest

from cylschur.verify import CHECKS

# criterion -> {part label: tolerance}; runtime_s in seconds
PINNED = {
    1: {"triple_product": 1e-10, "fermion_boson_product": 1e-10, "kappa_sum_vs_theta": 1e-10,
        "frobenius_det_vs_product": 1e-10, "schur_pfaffian": 1e-10, "runtime_s": 10},
    2: {"bessel_vs_contour": 1e-8, "bessel_vs_zeta_contour": 1e-8, "bessel_vs_residue_split": 1e-8,
        "runtime_s": 60},
    3: {"max_abs_diff": 1e-5, "excess_over_bound": 1e-12, "runtime_s": 300},
    4: {"max_abs_diff": 1e-5, "excess_over_bound": 1e-12, "runtime_s": 300},
    5: {"alpha1_sup_dev": 0.02, "alpha_inf_sup_dev": 0.02, "runtime_s": 600},
    6: {"sup_dev": 0.02, "runtime_s": 300},
    7: {"bulk_sup_dev": 1e-2, "midpoint_density_dev": 1e-2, "runtime_s": 60},
    8: {"sup_dev": 0.02, "runtime_s": 120},
    9: {"semigroup_defect": 1e-6, "trace_outside_bound": 1e-12, "runtime_s": 120},
    10: {"dpp_vs_fredholm_sigma": 3.0, "maya_marginal_sigma": 3.0, "charge_clt_dev": 0.1, "runtime_s": 300},
    11: {"sup_dev": 1e-2, "runtime_s": 10},
}

LINES: dict = {}


@pytest.mark.parametrize("criterion", sorted(PINNED))
def test_criterion(criterion):
    res = CHECKS[criterion]()
    LINES[criterion] = res.line()
    print(res.line())
    assert {p.label: p.tol for p in res.parts} == pytest.approx(PINNED[criterion], rel=1e-12)
    assert res.passed, res.line()


def test_every_criterion_covered():
    assert sorted(CHECKS) == list(range(1, 12)) == sorted(PINNED)


if __name__ == "__main__":
    import sys

    ok = True
    for k in sorted(PINNED):
        r = CHECKS[k]()
        print(r.line(), flush=True)
        ok &= r.passed
    sys.exit(0 if ok else 1)
