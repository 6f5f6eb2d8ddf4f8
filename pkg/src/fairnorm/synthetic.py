"""Synthetic census-income corpus in the adult CSV layout.

Produces a surrogate for the real dataset with the same schema, the
same kind of group structure, and matching headline marginals: about
24% of rows in the positive class and about 15.13% of positives female.
The gender gap flows through proxy features (marital status and
relationship, occupation mix, hours) plus a direct unexplained
component, so a classifier trained without the protected column can
still pick the bias up. Intended for tests and demos where the real
files are not available; all draws are deterministic given the seed.
"""

import numpy as np

from .data import COLUMNS
from .rng import stream

EDUCATION = [
    ("Preschool", 1),
    ("1st-4th", 2),
    ("5th-6th", 3),
    ("7th-8th", 4),
    ("9th", 5),
    ("10th", 6),
    ("11th", 7),
    ("12th", 8),
    ("HS-grad", 9),
    ("Some-college", 10),
    ("Assoc-voc", 11),
    ("Assoc-acdm", 12),
    ("Bachelors", 13),
    ("Masters", 14),
    ("Prof-school", 15),
    ("Doctorate", 16),
]
EDUCATION_P = np.array(
    [0.002, 0.005, 0.010, 0.020, 0.016, 0.028, 0.037, 0.013,
     0.322, 0.223, 0.042, 0.033, 0.164, 0.054, 0.018, 0.013]
)

RACES = ["White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"]
RACE_P = np.array([0.854, 0.096, 0.031, 0.010, 0.009])

WORKCLASSES = [
    "Private", "Self-emp-not-inc", "Local-gov", "State-gov",
    "Self-emp-inc", "Federal-gov", "Without-pay",
]
WORKCLASS_P = np.array([0.737, 0.082, 0.068, 0.042, 0.036, 0.031, 0.004])

UNMARRIED_STATUS = [
    "Never-married", "Divorced", "Separated", "Widowed", "Married-spouse-absent",
]
UNMARRIED_STATUS_P = np.array([0.60, 0.26, 0.06, 0.05, 0.03])
UNMARRIED_REL = ["Not-in-family", "Own-child", "Unmarried", "Other-relative"]
UNMARRIED_REL_P = np.array([0.51, 0.26, 0.18, 0.05])

OCC_HIGH = ["Exec-managerial", "Prof-specialty"]
OCC_MID = ["Sales", "Craft-repair", "Tech-support", "Protective-serv", "Transport-moving"]
OCC_LOW = ["Adm-clerical", "Other-service", "Machine-op-inspct",
           "Handlers-cleaners", "Farming-fishing", "Priv-house-serv"]
# within-pool preference weights, male then female
OCC_MID_P = {
    0: np.array([0.22, 0.38, 0.08, 0.10, 0.22]),
    1: np.array([0.55, 0.06, 0.22, 0.05, 0.12]),
}
OCC_LOW_P = {
    0: np.array([0.16, 0.20, 0.24, 0.20, 0.18, 0.02]),
    1: np.array([0.42, 0.34, 0.12, 0.04, 0.02, 0.06]),
}

COUNTRIES = [
    "United-States", "Mexico", "Philippines", "Germany", "Canada",
    "Puerto-Rico", "El-Salvador", "India", "Cuba", "England", "China",
]
COUNTRY_P = np.array(
    [0.897, 0.027, 0.012, 0.008, 0.007, 0.007, 0.006, 0.006, 0.005, 0.004, 0.021]
)

POSITIVE_RATE = 0.24
FEMALE_SHARE_IN_POSITIVE = 0.1513
MALE_RATE = 0.668
LABEL_SHARPNESS = 2.4  # lower = noisier labels = lower ceiling on AP


def _pick(rng, options, p, n):
    p = np.asarray(p, dtype=np.float64)
    idx = rng.choice(len(options), size=n, p=p / p.sum())
    return idx


def _sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _calibrate(u, channel, female, sharpness):
    """Threshold and channel strength matching the target marginals.

    channel carries the unexplained gender component (zero for women);
    female flags the rows counted in the positive-class share target.
    """

    def rates(t, delta):
        p = _sigmoid(sharpness * (u - t) + delta * channel)
        mean = p.mean()
        female_share = float(p[female].sum() / p.sum())
        return mean, female_share

    def solve_t(delta):
        lo, hi = -20.0, 20.0
        for _ in range(80):
            mid = 0.5 * (lo + hi)
            mean, _ = rates(mid, delta)
            if mean > POSITIVE_RATE:
                lo = mid
            else:
                hi = mid
        return 0.5 * (lo + hi)

    lo, hi = 0.0, 8.0
    for _ in range(60):
        delta = 0.5 * (lo + hi)
        _, share = rates(solve_t(delta), delta)
        if share > FEMALE_SHARE_IN_POSITIVE:
            lo = delta
        else:
            hi = delta
    delta = 0.5 * (lo + hi)
    return solve_t(delta), delta


def make_rows(n_rows, seed):
    """Generate n_rows samples as string field lists in schema order."""
    rng = stream(seed, "synth")
    n = int(n_rows)

    male = (rng.random(n) < MALE_RATE).astype(np.int64)
    race = _pick(rng, RACES, RACE_P, n)
    age = np.clip(np.rint(rng.normal(38.6, 13.2, size=n)), 17, 90).astype(np.int64)
    educ_idx = _pick(rng, EDUCATION, EDUCATION_P, n)
    educ_num = np.array([EDUCATION[i][1] for i in educ_idx])

    married_p = np.where(male == 1, 0.605, 0.146) * np.clip((age - 17) / 14.0, 0.15, 1.0)
    married = (rng.random(n) < married_p).astype(np.int64)

    educ_std = (educ_num - 10.1) / 2.57
    occ_latent = 0.8 * educ_std + 0.22 * male + rng.normal(0.0, 1.0, size=n)
    occ_level = np.where(occ_latent > 0.95, 2, np.where(occ_latent < -0.55, 0, 1))

    occupation = np.empty(n, dtype=object)
    for sex_value in (0, 1):
        for level, pool, pools_p in (
            (2, OCC_HIGH, None),
            (1, OCC_MID, OCC_MID_P),
            (0, OCC_LOW, OCC_LOW_P),
        ):
            mask = (male == sex_value) & (occ_level == level)
            k = int(mask.sum())
            if k == 0:
                continue
            p = np.ones(len(pool)) if pools_p is None else pools_p[sex_value]
            occupation[mask] = [pool[i] for i in _pick(rng, pool, p, k)]

    hours = np.clip(
        np.rint(rng.normal(40.0, 11.0, size=n) + 1.5 * male + 2.2 * married),
        1, 99,
    ).astype(np.int64)

    age_std = (np.minimum(age, 55) - 38.0) / 12.0
    hours_std = (np.minimum(hours, 65) - 41.0) / 10.0
    race_adj = np.array([0.0, -0.35, 0.0, -0.30, -0.30])[race]
    # interaction terms concentrate probability in the educated married
    # full-time stratum, which is where confident positives live
    u = (
        0.95 * educ_std
        + 0.45 * age_std
        + 0.42 * hours_std
        + 0.55 * (occ_level == 2)
        + 0.15 * (occ_level == 1)
        + 1.15 * married
        + 0.70 * married * educ_std
        + 0.35 * married * hours_std
        + race_adj
        + rng.normal(0.0, 0.30, size=n)
    )

    gain_p = 0.02 + 0.18 * _sigmoid(1.2 * u - 1.0)
    has_gain = rng.random(n) < gain_p
    gain = np.where(
        has_gain, np.rint(np.exp(rng.normal(8.7, 0.9, size=n))), 0.0
    )
    gain = np.minimum(gain, 99999.0)
    has_loss = rng.random(n) < 0.047
    loss = np.where(
        has_loss, np.clip(np.rint(rng.normal(1900.0, 350.0, size=n)), 200, 4000), 0.0
    )
    u = u + 2.5 * np.log1p(gain) / 9.0

    bias_channel = (0.4 + 0.6 * married) * male
    t, delta = _calibrate(u, bias_channel, male == 0, LABEL_SHARPNESS)
    p_y = _sigmoid(LABEL_SHARPNESS * (u - t) + delta * bias_channel)
    y = rng.random(n) < p_y

    workclass_idx = _pick(rng, WORKCLASSES, WORKCLASS_P, n)
    country_idx = _pick(rng, COUNTRIES, COUNTRY_P, n)
    fnlwgt = np.clip(np.rint(np.exp(rng.normal(11.68, 0.58, size=n))), 13000, 1500000)
    unm_status = _pick(rng, UNMARRIED_STATUS, UNMARRIED_STATUS_P, n)
    unm_rel = _pick(rng, UNMARRIED_REL, UNMARRIED_REL_P, n)

    # missingness, as '?': workclass+occupation jointly, country independently
    miss_work = rng.random(n) < 0.056
    miss_country = rng.random(n) < 0.018

    rows = []
    for i in range(n):
        if married[i]:
            marital = "Married-civ-spouse"
            rel = "Husband" if male[i] else "Wife"
        else:
            marital = UNMARRIED_STATUS[unm_status[i]]
            rel = UNMARRIED_REL[unm_rel[i]]
        row = [
            str(age[i]),
            "?" if miss_work[i] else WORKCLASSES[workclass_idx[i]],
            str(int(fnlwgt[i])),
            EDUCATION[educ_idx[i]][0],
            str(educ_num[i]),
            marital,
            "?" if miss_work[i] else occupation[i],
            rel,
            RACES[race[i]],
            "Male" if male[i] else "Female",
            str(int(gain[i])),
            str(int(loss[i])),
            str(hours[i]),
            "?" if miss_country[i] else COUNTRIES[country_idx[i]],
            ">50K" if y[i] else "<=50K",
        ]
        assert len(row) == len(COLUMNS)
        rows.append(row)
    return rows


def write_csv(path, n_rows=48842, seed=0):
    """Write a corpus in the concatenated train+test file style.

    The tail third mimics the test-file quirks: a '|' comment line and a
    trailing '.' on the label field.
    """
    rows = make_rows(n_rows, seed)
    boundary = (2 * len(rows)) // 3
    with open(path, "w", encoding="utf-8") as fh:
        for i, row in enumerate(rows):
            if i == boundary:
                fh.write("|1x3 Cross validator\n")
            fields = list(row)
            if i >= boundary:
                fields[-1] = fields[-1] + "."
            fh.write(", ".join(fields) + "\n")
    return path
