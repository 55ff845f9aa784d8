"""Independent reference values for the unit tests.

Writes tests/unit/oracle_values.hpp. Uses numpy/scipy/statsmodels/sklearn only;
nothing here calls the C++ library except for reading a panel produced by
`sdidml simulate S2 --seed 2` (pass its directory as argv[1]).
"""
import json
import sys
from pathlib import Path

import numpy as np
import pandas as pd
import statsmodels.api as sm
from scipy import stats
from sklearn.ensemble import GradientBoostingRegressor
from sklearn.linear_model import Lasso, LogisticRegression, Ridge


def features(n, p):
    i = np.arange(1, n + 1)[:, None]
    j = np.arange(1, p + 1)[None, :]
    return np.sin(0.37 * i * j + 0.11 * j * j) + 0.5 * np.cos(1.3 * i + (j - 1))


def target(x):
    i = np.arange(1, x.shape[0] + 1)
    return 1 + 2 * x[:, 0] - x[:, 2] + 0.5 * x[:, 4] + 0.3 * np.sin(2.1 * i)


def treatment(x):
    i = np.arange(1, x.shape[0] + 1)
    return (np.sin(1.7 * i) + 0.6 * x[:, 0] > 0).astype(float)


def arr(name, values):
    body = ", ".join(repr(float(v)) for v in np.ravel(values))
    return f"inline const std::vector<double> {name}{{{body}}};\n"


def scalar(name, value):
    return f"inline constexpr double {name} = {float(value)!r};\n"


out = []
x = features(50, 5)
y = target(x)
d = treatment(x)

r = Ridge(alpha=0.5).fit(x, y)
out += [scalar("kRidgeIntercept", r.intercept_), arr("kRidgeCoef", r.coef_)]

la = Lasso(alpha=0.1, tol=1e-14, max_iter=1_000_000).fit(x, y)
out += [scalar("kLassoIntercept", la.intercept_), arr("kLassoCoef", la.coef_)]

logit = sm.Logit(d, sm.add_constant(x)).fit(method="newton", tol=1e-14, maxiter=200, disp=0)
out += [arr("kLogitParams", logit.params)]

lam = 0.05
pen = LogisticRegression(C=1.0 / (len(d) * lam), tol=1e-12, max_iter=100000).fit(x, d)
out += [scalar("kPenLogitIntercept", pen.intercept_[0]), arr("kPenLogitCoef", pen.coef_[0])]

xg = features(120, 4)
yg = target(np.hstack([xg, features(120, 1)])) + np.where(xg[:, 1] > 0, 1.0, -1.0)
gb = GradientBoostingRegressor(n_estimators=20, max_depth=3, learning_rate=0.1, min_samples_leaf=5,
                               criterion="squared_error", subsample=1.0, random_state=0).fit(xg, yg)
out += [arr("kGbtPredictions", gb.predict(xg))]

# type-7 quantiles and a chi-square tail
sample = np.array([3.1, -0.4, 2.2, 7.5, 0.0, 1.1, -2.3, 4.4])
out += [arr("kQuantileSample", sample), arr("kQuantiles", np.quantile(sample, [0.025, 0.5, 0.975]))]
out += [scalar("kChiSqSf_7_3_dof4", stats.chi2.sf(7.3, 4))]

# hand 2x2: one cohort adopting at t=2, two treated (a, b) and two controls (c, d)
resid = {"a": (1.0, 4.0), "b": (2.0, 3.5), "c": (0.5, 1.0), "d": (-1.0, 0.0)}
dd = np.mean([resid[u][1] - resid[u][0] for u in "ab"]) - np.mean([resid[u][1] - resid[u][0] for u in "cd"])
out += [scalar("kHandDoubleDifference", dd)]

# regression form on the same table, dense least squares with cohort and period dummies
rows = []
for u, (y1, y2) in resid.items():
    treated = u in "ab"
    rows.append((treated, 1, y1))
    rows.append((treated, 2, y2))
design = np.array([[1.0, float(tr), float(t == 2), float(tr and t == 2)] for tr, t, _ in rows])
yy = np.array([v for *_, v in rows])
out += [scalar("kHandRegressionTau", np.linalg.lstsq(design, yy, rcond=None)[0][3])]

# two-way demeaning on an unbalanced layout: residual from projecting on both dummy sets
ids = [(0, 0), (0, 1), (0, 2), (1, 0), (1, 2), (2, 1), (2, 2), (3, 0), (3, 1), (3, 2)]
vals = np.array([1.0, 3.0, 2.5, -1.0, 4.0, 0.5, 2.0, 1.5, -0.5, 3.3])
dm = np.zeros((len(ids), 4 + 3))
for k, (a, b) in enumerate(ids):
    dm[k, a] = 1
    dm[k, 4 + b] = 1
coef = np.linalg.lstsq(dm, vals, rcond=None)[0]
out += [arr("kDemeanedValues", vals - dm @ coef)]

# mean learner under two hand-chosen folds: complement-fold treated shares on a 10-unit toy panel
fold = np.array([0, 1, 0, 1, 1, 0, 0, 1, 0, 1])
cohort = {0: 2, 1: 3, 2: None, 3: None, 4: 2, 5: None, 6: None, 7: None, 8: 3, 9: 2}
share = []
for k in (0, 1):
    other = [u for u in range(10) if fold[u] != k]
    dvals = [1.0 if cohort[u] is not None and t >= cohort[u] else 0.0 for u in other for t in (1, 2, 3)]
    share.append(np.mean(dvals))
out += [arr("kComplementShares", share)]

# S2 static TWFE gap on the panel generated with seed 2
if len(sys.argv) > 1:
    sim = Path(sys.argv[1])
    panel = pd.read_csv(sim / "panel.csv")
    truth = json.loads((sim / "oracle.json").read_text())["true_overall_att"]
    u = pd.get_dummies(panel["unit"], drop_first=True, dtype=float)
    t = pd.get_dummies(panel["time"], drop_first=True, dtype=float)
    design = np.column_stack([np.ones(len(panel)), panel["treatment"].to_numpy(float), u, t])
    tau = np.linalg.lstsq(design, panel["outcome"].to_numpy(float), rcond=None)[0][1]
    out += [scalar("kS2Seed2TwfeTau", tau), scalar("kS2Seed2TrueOverall", truth)]

header = "// Generated by tests/oracle/oracle.py; do not edit.\n#pragma once\n\n#include <vector>\n\nnamespace oracle {\n\n"
target_path = Path(__file__).resolve().parent.parent / "unit" / "oracle_values.hpp"
target_path.write_text(header + "".join(out) + "\n}  // namespace oracle\n")
print("wrote", target_path)
