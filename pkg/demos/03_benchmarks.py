"""Synthetic benchmarks: attribute faithfulness and outlierness ranking.

Reproduces the comparison against the CA-lasso baseline on both synthetic
variants for a few seeds. Takes about half a minute.
"""

import numpy as np

from coin import Config
from coin.experiments import (
    SyntheticSpec,
    cal_faithfulness,
    cal_ranking,
    coin_faithfulness,
    coin_ranking,
    generate_synthetic,
)

cfg = Config()
for variant in ("SYN1", "SYN2"):
    rows = []
    for seed in range(3):
        ds, truth = generate_synthetic(SyntheticSpec(variant, seed=seed))
        (p, r, f), _ = coin_faithfulness(ds, truth, cfg)
        cf = cal_faithfulness(ds, truth, cfg)[2]
        auc = coin_ranking(ds, truth, cfg, seed=seed)[0]
        cal_auc = cal_ranking(ds, truth, cfg, seed=seed)
        rows.append((p, r, f, cf, auc, cal_auc))
    p, r, f, cf, auc, cal_auc = np.mean(rows, axis=0)
    print(f"{variant}: COIN P={p:.2f} R={r:.2f} F1={f:.2f} AUC={auc:.2f} | CAL F1={cf:.2f} AUC={cal_auc:.2f}")
