"""Why the weak form wins under noise.

Pointwise regression needs derivatives of the measured field, and
differencing amplifies noise by 1/dx per order.  Multiplying by a compactly
supported bump and integrating by parts moves every derivative onto the
smooth test function instead.  This script fits the single true Burgers
term both ways across noise levels and plots the coefficient error.
"""

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

import structid as si
from structid import benchmarks as bm
from structid.dictionary import evaluate_strong
from structid.libraries import burgers_flux_library, index_of
from structid.regression import least_squares
from structid.weakform import evaluate_weak, make_test_family

out_dir = os.path.join(os.path.dirname(__file__), "output")
os.makedirs(out_dir, exist_ok=True)

bench = bm.benchmark("burgers")
clean = si.simulate(bench.sim)
lib = burgers_flux_library()
j = index_of(lib, "(u^2)_x")
fam = make_test_family(clean, max_transfer=(1, 1))

levels = (0.01, 0.05, 0.10, 0.25, 0.50)
weak_med, strong_med = [], []
for nsr in levels:
    w_err, s_err = [], []
    for trial in range(20):
        noisy = si.add_noise(clean, nsr, si.trial_seed(0, "burgers", nsr, trial))
        sys_w = evaluate_weak(lib, noisy, fam)
        cw, _ = least_squares(sys_w, [j])
        w_err.append(abs(cw[0] / sys_w.column_scales[j] + 0.5) / 0.5)
        sys_s = evaluate_strong(lib, noisy)
        cs, _ = least_squares(sys_s, [j])
        s_err.append(abs(cs[0] / sys_s.column_scales[j] + 0.5) / 0.5)
    weak_med.append(np.median(w_err))
    strong_med.append(np.median(s_err))
    print(f"noise {int(100*nsr):3d}%: median coefficient error "
          f"weak {weak_med[-1]:.2e}, pointwise {strong_med[-1]:.2e}")

fig, ax = plt.subplots(figsize=(6, 4))
ax.loglog([100 * s for s in levels], weak_med, "o-", label="weak form")
ax.loglog([100 * s for s in levels], strong_med, "s-", label="pointwise")
ax.set_xlabel("noise-to-signal ratio (%)")
ax.set_ylabel("relative flux-coefficient error")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(os.path.join(out_dir, "weak_vs_pointwise.png"), dpi=120)
print(f"\nfigure: {out_dir}/weak_vs_pointwise.png")
