"""
Lifespan as the kernel fades
============================

As ``b`` shrinks with ``B`` fixed, the nonlocal term ``K * u_x`` becomes
weak and the lifespan approaches the Burgers breaking time. The analytic
lower and upper bounds tighten around it. Expect a minute or so of run time
because ``b = 0.01`` needs a wide box.
"""

# %%
from fwlab import harness

cfg = harness.ExperimentConfig("lifespan-convergence", {"kind": "gaussian", "lam": 1.0}, {"B": 0.5, "b_list": "1, 0.1, 0.01"})
out = harness.cmd_lifespan_convergence(cfg, write=False)
print(f"Burgers breaking time {out['summary']['burgers_lifespan']:.5f}")
print(f"{'b':>6} {'T0':>9} {'lower':>9} {'upper':>9} {'rel err':>9}")
for r in out["rows"]:
    print(f"{r['b']:>6g} {r['t0']:>9.5f} {r['T_lower']:>9.5f} {r['T_upper']:>9.5f} {r['rel_error']:>9.2e}")
print(out["summary"])
