"""Deterministic synthetic demo tables shaped like three classic benchmarks.

The shipped presets (adult, german, compas) follow the column layout of the
UCI Adult census extract, the Statlog German credit table, and the ProPublica
two-year recidivism table. Those files cannot be bundled, so this module
generates stand-ins from fixed-seed distributions whose group sizes and
per-group favorable rates land close to the originals. The income table has
a strong favorable-rate gap by sex, the credit table penalizes young
applicants on a saturating age curve, and the recidivism table carries race
and sex gaps. Everything is drawn from one seeded generator per table, so a
given seed always produces byte-identical CSV files.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np
import pandas as pd

__all__ = ["make_adult", "make_german", "make_compas", "write_demo_files", "DEMO_SEEDS"]

DEMO_SEEDS = {"adult": 52, "german": 53, "compas": 54}


def _sigmoid(z):
    return 1.0 / (1.0 + np.exp(-z))


def _calibrate_intercept(scores: np.ndarray, target_rate: float) -> float:
    """Bisect the intercept b so that mean(sigmoid(scores + b)) hits the target."""
    lo, hi = -12.0, 12.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if float(_sigmoid(scores + mid).mean()) < target_rate:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


_WORKCLASS = [
    "Private", "Self-emp-not-inc", "Self-emp-inc",
    "Local-gov", "State-gov", "Federal-gov",
]
_EDUCATION = [
    ("7th-8th", 4), ("11th", 7), ("HS-grad", 9), ("Some-college", 10),
    ("Assoc-voc", 11), ("Bachelors", 13), ("Masters", 14), ("Doctorate", 16),
]
_MARITAL = [
    "Married-civ-spouse", "Never-married", "Divorced", "Separated", "Widowed",
]
_OCCUPATION = [
    "Exec-managerial", "Prof-specialty", "Craft-repair", "Adm-clerical",
    "Sales", "Other-service", "Machine-op-inspct", "Transport-moving",
    "Handlers-cleaners", "Tech-support",
]
_RELATIONSHIP_OTHER = ["Not-in-family", "Own-child", "Unmarried", "Other-relative"]
_RACES_ADULT = ["White", "Black", "Asian-Pac-Islander", "Amer-Indian-Eskimo", "Other"]
_COUNTRIES = [
    "United-States", "Mexico", "Philippines", "Germany", "Canada", "India",
    "England", "Cuba", "Jamaica", "China", "Italy", "Poland",
]


def make_adult(seed: int = DEMO_SEEDS["adult"]) -> pd.DataFrame:
    """Census-style income table: 45,280 rows, 58 of them with '?' entries.

    Favorable rates are calibrated per sex (Male 0.3124, >50K; Female 0.1136)
    so the favorable-rate difference sits near -0.20 with Male privileged.
    """
    rng = np.random.default_rng(seed)
    n = 45_280

    male = rng.random(n) < 0.6751
    sex = np.where(male, "Male", "Female")
    age = np.clip(np.round(17 + rng.gamma(2.4, 9.0, n)), 17, 90).astype(int)
    race = rng.choice(_RACES_ADULT, n, p=[0.855, 0.096, 0.031, 0.010, 0.008])
    workclass = rng.choice(_WORKCLASS, n, p=[0.72, 0.08, 0.04, 0.07, 0.045, 0.045])
    country = rng.choice(_COUNTRIES, n, p=[0.897, 0.030, 0.019] + [0.006] * 9)

    edu_names = np.array([e[0] for e in _EDUCATION])
    edu_nums = np.array([e[1] for e in _EDUCATION], dtype=float)
    edu_p_male = np.array([0.03, 0.09, 0.31, 0.21, 0.05, 0.20, 0.08, 0.03])
    edu_p_female = np.array([0.03, 0.10, 0.33, 0.24, 0.06, 0.16, 0.06, 0.02])
    edu_idx = np.empty(n, dtype=int)
    edu_idx[male] = rng.choice(len(_EDUCATION), male.sum(), p=edu_p_male)
    edu_idx[~male] = rng.choice(len(_EDUCATION), (~male).sum(), p=edu_p_female)
    education = edu_names[edu_idx]
    education_num = edu_nums[edu_idx]

    marital = np.empty(n, dtype=object)
    marital[male] = rng.choice(_MARITAL, male.sum(), p=[0.61, 0.28, 0.08, 0.02, 0.01])
    marital[~male] = rng.choice(_MARITAL, (~male).sum(), p=[0.18, 0.44, 0.22, 0.06, 0.10])

    occupation = np.empty(n, dtype=object)
    occupation[male] = rng.choice(
        _OCCUPATION, male.sum(),
        p=[0.15, 0.13, 0.19, 0.06, 0.12, 0.08, 0.09, 0.08, 0.07, 0.03],
    )
    occupation[~male] = rng.choice(
        _OCCUPATION, (~male).sum(),
        p=[0.10, 0.15, 0.02, 0.27, 0.12, 0.19, 0.06, 0.01, 0.03, 0.05],
    )

    married = marital == "Married-civ-spouse"
    relationship = np.where(
        married & male, "Husband", np.where(married & ~male, "Wife", "")
    ).astype(object)
    loose = ~married
    relationship[loose] = rng.choice(
        _RELATIONSHIP_OTHER, loose.sum(), p=[0.45, 0.25, 0.22, 0.08]
    )

    hours = np.where(
        male,
        rng.normal(42.5, 10.0, n),
        rng.normal(37.0, 9.0, n),
    )
    hours = np.clip(np.round(hours), 1, 99).astype(int)

    gain_hit = rng.random(n) < np.where(male, 0.09, 0.06)
    capital_gain = np.where(
        gain_hit, np.round(np.exp(rng.normal(8.3, 0.9, n))), 0.0
    )
    capital_gain = np.clip(capital_gain, 0, 99_999).astype(int)
    loss_hit = rng.random(n) < 0.047
    capital_loss = np.where(loss_hit, np.round(rng.normal(1870, 280, n)), 0.0)
    capital_loss = np.clip(capital_loss, 0, 4356).astype(int)

    # keep the sex-correlated proxies (marriage, hours) weak relative to the
    # neutral drivers so most of the income gap is direct; the per-sex
    # intercepts absorb it, mirroring how reweighing behaves on the original
    agez = (age - 38.0) / 10.0
    score = (
        0.80 * agez
        - 0.38 * agez**2
        + 0.75 * (education_num - 10.0) / 2.5
        + 0.20 * (hours - 40.0) / 10.0
        + 0.80 * married
        + 1.60 * (capital_gain > 3000)
        + 0.22 * (race == "White")
    )
    b_male = _calibrate_intercept(score[male], 0.3124)
    b_female = _calibrate_intercept(score[~male], 0.1136)
    prob = _sigmoid(score + np.where(male, b_male, b_female))
    income = np.where(rng.random(n) < prob, ">50K", "<=50K")

    # rows that the loader will drop as incomplete
    blanks = rng.choice(n, size=58, replace=False)
    workclass = workclass.astype(object)
    occupation = occupation.astype(object)
    workclass[blanks[:40]] = "?"
    occupation[blanks[40:]] = "?"

    return pd.DataFrame(
        {
            "age": age,
            "workclass": workclass,
            "education": education,
            "education-num": education_num.astype(int),
            "marital-status": marital,
            "occupation": occupation,
            "relationship": relationship,
            "race": race,
            "sex": sex,
            "capital-gain": capital_gain,
            "capital-loss": capital_loss,
            "hours-per-week": hours,
            "native-country": country,
            "income": income,
        }
    )


_CHECKING = ["<0", "0<=X<200", ">=200", "no checking"]
_HISTORY = [
    "no credits taken", "all paid back", "existing paid",
    "delay in past", "critical account",
]
_PURPOSE = ["radio/tv", "new car", "used car", "furniture", "education", "business"]
_SAVINGS = ["<100", "100<=X<500", "500<=X<1000", ">=1000", "unknown"]
_EMPLOYMENT = ["unemployed", "<1 year", "1<=X<4", "4<=X<7", ">=7 years"]
_HOUSING = ["own", "rent", "for free"]
_JOB = ["unskilled", "skilled", "management", "unemployed non-resident"]


def make_german(seed: int = DEMO_SEEDS["german"]) -> pd.DataFrame:
    """Credit-risk table: 1,000 rows, good/bad outcome, 0.70 good overall.

    The outcome score rises steeply with age on a tanh curve that saturates in
    the mid-forties and eases off past 57, and carries a male advantage, so
    age<=25 applicants sit well below the overall good-credit rate.
    """
    rng = np.random.default_rng(seed)
    n = 1_000

    age = np.clip(np.round(19 + rng.gamma(1.8, 9.0, n)), 19, 75).astype(int)
    sex = np.where(rng.random(n) < 0.69, "male", "female")
    checking = rng.choice(_CHECKING, n, p=[0.274, 0.269, 0.063, 0.394])
    duration = np.clip(np.round(rng.gamma(2.0, 10.4, n)), 4, 72).astype(int)
    history = rng.choice(_HISTORY, n, p=[0.040, 0.049, 0.530, 0.088, 0.293])
    purpose = rng.choice(_PURPOSE, n, p=[0.28, 0.234, 0.103, 0.252, 0.081, 0.05])
    credit_amount = np.clip(
        np.round(np.exp(rng.normal(7.80, 0.75, n))), 250, 18_424
    ).astype(int)
    savings = rng.choice(_SAVINGS, n, p=[0.603, 0.103, 0.063, 0.048, 0.183])
    employment = rng.choice(_EMPLOYMENT, n, p=[0.062, 0.172, 0.339, 0.174, 0.253])
    installment_rate = rng.choice([1, 2, 3, 4], n, p=[0.136, 0.231, 0.157, 0.476])
    residence_since = rng.choice([1, 2, 3, 4], n, p=[0.130, 0.308, 0.149, 0.413])
    housing = rng.choice(_HOUSING, n, p=[0.713, 0.179, 0.108])
    existing_credits = rng.choice([1, 2, 3, 4], n, p=[0.633, 0.333, 0.028, 0.006])
    job = rng.choice(_JOB, n, p=[0.20, 0.63, 0.148, 0.022])
    num_dependents = rng.choice([1, 2], n, p=[0.845, 0.155])

    score = (
        1.35 * np.tanh((age - 28.0) / 9.0)
        - 0.40 * np.maximum(0, age - 59) / 10.0
        + 0.35 * (sex == "male")
        - 0.50 * (checking == "<0")
        + 0.30 * (checking == "no checking")
        - 0.012 * (duration - 21.0)
        - 0.25 * (savings == "<100")
        + 0.30 * (history == "critical account")
        - 0.15 * (purpose == "new car")
    )
    b = _calibrate_intercept(score, 0.70)
    good = rng.random(n) < _sigmoid(score + b)

    return pd.DataFrame(
        {
            "checking_status": checking,
            "duration": duration,
            "credit_history": history,
            "purpose": purpose,
            "credit_amount": credit_amount,
            "savings": savings,
            "employment": employment,
            "installment_rate": installment_rate,
            "sex": sex,
            "residence_since": residence_since,
            "age": age,
            "housing": housing,
            "existing_credits": existing_credits,
            "job": job,
            "num_dependents": num_dependents,
            "credit_risk": np.where(good, "good", "bad"),
        }
    )


_RACES_COMPAS = ["African-American", "Caucasian", "Hispanic", "Other"]


def make_compas(seed: int = DEMO_SEEDS["compas"]) -> pd.DataFrame:
    """Recidivism table: 6,167 rows, two_year_recid in {0, 1}, 0.455 positive.

    Recidivism odds fall with age and rise with prior counts, with additive
    male and African-American effects, so the favorable (no-recidivism) rate
    is higher for Female and Caucasian defendants.
    """
    rng = np.random.default_rng(seed)
    n = 6_167

    sex = np.where(rng.random(n) < 0.81, "Male", "Female")
    race = rng.choice(_RACES_COMPAS, n, p=[0.514, 0.340, 0.082, 0.064])
    age = np.clip(np.round(18 + rng.gamma(1.6, 7.5, n)), 18, 80).astype(int)
    age_cat = np.select(
        [age < 25, age <= 45], ["Less than 25", "25 - 45"], "Greater than 45"
    )
    juv_fel = rng.poisson(0.06, n)
    juv_misd = rng.poisson(0.09, n)
    juv_other = rng.poisson(0.11, n)
    priors = np.minimum(rng.poisson(rng.gamma(0.9, 3.5, n)), 38)
    charge = np.where(rng.random(n) < 0.64, "F", "M")

    score = (
        -0.35 * (age - 30.0) / 10.0
        + 0.45 * np.log1p(priors)
        + 0.30 * (sex == "Male")
        + 0.45 * (race == "African-American")
        + 0.15 * (charge == "F")
        + 0.20 * np.log1p(juv_fel + juv_misd + juv_other)
    )
    b = _calibrate_intercept(score, 0.455)
    recid = (rng.random(n) < _sigmoid(score + b)).astype(int)

    return pd.DataFrame(
        {
            "sex": sex,
            "age": age,
            "age_cat": age_cat,
            "race": race,
            "juv_fel_count": juv_fel,
            "juv_misd_count": juv_misd,
            "juv_other_count": juv_other,
            "priors_count": priors,
            "c_charge_degree": charge,
            "two_year_recid": recid,
        }
    )


_MAKERS = {"adult": make_adult, "german": make_german, "compas": make_compas}


def write_demo_files(directory, seeds: dict | None = None) -> dict[str, Path]:
    """Write the three demo CSVs under ``directory`` and return their paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    seeds = {**DEMO_SEEDS, **(seeds or {})}
    out = {}
    for name, maker in _MAKERS.items():
        path = directory / f"{name}.csv"
        maker(seed=seeds[name]).to_csv(path, index=False, lineterminator="\n")
        out[name] = path
    return out
