"""Generate the synthetic line-13 surrogate configuration.

Only the aggregates of the real line are public (part sums of travel and
safe-separation times, the first four central segments and the minimum
headway), so the per-segment values here are synthetic: random draws that
are rescaled so every published figure is met exactly.

    python3 data/make_line13.py > data/line13.cfg
"""

from __future__ import annotations

import sys

import numpy as np

SEED = 13

N0, N1, N2 = 80, 22, 32
T0, S0 = 3240.0, 1560.0      # 54.0 min, 26.0 min
T1, S1 = 1638.0, 570.0
T2, S2 = 1986.0, 630.0       # T = 84.2 min, dT = 5.8 min
H_MIN = 92.6

# first central segments, given explicitly (r, w, s)
HEAD = [(51.5, 0.0, 14.9), (17.4, 19.0, 42.6), (53.6, 0.0, 9.3), (75.7, 0.0, 9.8)]
# the single central bottleneck: t + s = 92.6 s
BOTTLENECK_J = 14
BOTTLENECK = (20.0, 40.0, 32.6)
# the interchange platform on the bottleneck: its demand makes it the binding
# segment of the demand model above roughly 80% of the peak level
INTERCHANGE = (0, BOTTLENECK_J, 0.5, 0.6)   # u, j, lambda_in, lambda_out (alpha 2/s)


def _draw_part(rng, n, platform_every, t_sum, s_sum, fixed=None, cap=None):
    """Rows (r, w, s, platform) whose sums hit t_sum and s_sum exactly at 0.1 s."""
    fixed = dict(fixed or {})
    free = [j for j in range(1, n + 1) if j not in fixed]
    rows = {}
    for j in free:
        plat = j % platform_every == 2 % platform_every
        if plat:
            rows[j] = [rng.uniform(15.0, 22.0), round(rng.uniform(18.0, 30.0)), rng.uniform(25.0, 42.0), True]
        else:
            rows[j] = [rng.uniform(30.0, 75.0), 0.0, rng.uniform(8.0, 16.0), False]
    t_fixed = sum(r + w for r, w, _ in fixed.values())
    s_fixed = sum(s for _, _, s in fixed.values())
    w_free = sum(rows[j][1] for j in free)
    kr = (t_sum - t_fixed - w_free) / sum(rows[j][0] for j in free)
    ks = (s_sum - s_fixed) / sum(rows[j][2] for j in free)
    for j in free:
        rows[j][0] = round(rows[j][0] * kr, 1)
        rows[j][2] = round(rows[j][2] * ks, 1)
    # push the rounding residue onto the first free segment
    j0 = free[0]
    rows[j0][0] = round(rows[j0][0] + t_sum - t_fixed - sum(rows[j][0] + rows[j][1] for j in free), 1)
    rows[j0][2] = round(rows[j0][2] + s_sum - s_fixed - sum(rows[j][2] for j in free), 1)
    for j, (r, w, s) in fixed.items():
        rows[j] = [r, w, s, w > 0]
    out = [tuple(rows[j]) for j in range(1, n + 1)]
    if cap is not None and any(r + w + s >= cap for r, w, s, _ in out if (r, w, s) != BOTTLENECK):
        return None
    return out


def build(seed: int = SEED):
    rng = np.random.default_rng(seed)
    fixed0 = {j + 1: row for j, row in enumerate(HEAD)}
    fixed0[BOTTLENECK_J] = BOTTLENECK
    while True:
        central = _draw_part(rng, N0, 4, T0, S0, fixed0, cap=H_MIN - 0.5)
        if central is not None:
            break
    branch1 = _draw_part(rng, N1, 3, T1, S1)
    branch2 = _draw_part(rng, N2, 3, T2, S2)
    return central, branch1, branch2


def demand_rows(rng, parts):
    """Peak-hour demand on every platform: x between 0.15 and 0.35."""
    out = []
    for u, rows in parts:
        for j, (_, w, _, plat) in enumerate(rows, start=1):
            if not plat:
                continue
            x = rng.uniform(0.15, 0.35)
            share = rng.uniform(0.35, 0.65)
            alpha = 2.0
            if (u, j) == INTERCHANGE[:2]:
                out.append((u, j, INTERCHANGE[2], INTERCHANGE[3], alpha, alpha))
                continue
            out.append((u, j, round(share * x * alpha, 4), round((1 - share) * x * alpha, 4), alpha, alpha))
    return out


def render(seed: int = SEED) -> str:
    central, branch1, branch2 = build(seed)
    lines = [
        "# Synthetic surrogate of a metro line with one junction (line 13 scale).",
        "# Part sums, the first four central segments and the minimum headway are",
        "# the published figures; every other per-segment value is a seeded draw.",
        f"# generated by data/make_line13.py, seed {seed}",
        "",
        f"[line] n0={N0} n1={N1} n2={N2} run_margin=0.15 kappa=584",
        "",
    ]
    parts = [(0, central), (1, branch1), (2, branch2)]
    for u, rows in parts:
        for j, (r, w, s, plat) in enumerate(rows, start=1):
            flag = " platform" if plat else ""
            lines.append(f"[segment u={u} j={j}] r={r:.1f}s w={w:.1f}s s={s:.1f}s{flag}")
        lines.append("")
    rng = np.random.default_rng(seed + 1)
    for u, j, lin, lout, ain, aout in demand_rows(rng, parts):
        lines.append(f"[demand u={u} j={j}] lambda_in={lin}/s lambda_out={lout}/s "
                     f"alpha_in={ain}/s alpha_out={aout}/s")
    return "\n".join(lines) + "\n"


if __name__ == "__main__":
    sys.stdout.write(render(int(sys.argv[1]) if len(sys.argv) > 1 else SEED))
