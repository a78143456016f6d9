"""A session with the inequality lab.

Run:  python demos/inequality_lab_session.py
"""

import numpy as np

from prescurv.inequality_lab import (
    SampleConfig,
    check_gll,
    check_ivochkina_condition,
    check_krylov_convexity,
    run_campaign,
)

print("=== the quadratic-form bound at a hand-checkable point ===")
rec = check_gll(np.ones(3), np.eye(3), alpha=1.0, k=2)
print(f"lambda=(1,1,1), B=I, k=2, alpha=1: lhs={rec.lhs:g} <= rhs={rec.rhs:g} "
      f"(margin {rec.margin:g})")

print("\n=== convexity of the ratio power along a radial direction ===")
lam = np.array([1.0, 0.8, 1.3])
value, rec = check_krylov_convexity(lam, np.diag(lam), alpha=1.5, k=2)
print(f"second derivative {value:.6f} >= 0 (inconclusive: {rec.inconclusive})")

print("\n=== a small randomized campaign ===")
cfg = SampleConfig(n=4, k=3, sample_count=2000, seed=42)
summary = run_campaign(cfg)
print(f"n=4, k=3, 2000 samples x alphas {cfg.alpha_list}:")
for (kind, status), count in sorted(summary.counts.items()):
    print(f"  {kind:9s} {status:12s} {count}")
print(f"hard failures: {len(summary.hard_failures)}  "
      f"implication violations: {len(summary.implication_violations)}")

print("\n=== the gradient-condition boundary in q ===")
print("the structural convexity condition for the model data holds up to "
      "q = 0 and breaks inside the scanned gradient box for q in (0, 1]:")
for q in (-1.0, -0.5, 0.0, 0.5, 1.0):
    rep = check_ivochkina_condition(2, q, p_box=3.0, grid=33)
    where = f" at p={tuple(round(v, 3) for v in rep.worst_point)}" if not rep.holds else ""
    print(f"  q={q:+4.1f}: holds={rep.holds}  worst margin {rep.worst_margin:+.5f}{where}")
