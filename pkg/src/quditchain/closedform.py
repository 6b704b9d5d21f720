"""Analytic entanglement formulas as a standalone oracle library.

Every published closed form for the maximally entangled chains evolving
under isotropic exchange J, evaluated directly from (J, t) with no matrix
algebra anywhere.  Rational coefficients are stored as exact integers;
the three-quartit and bi-pentit entries marked ``decimal`` reproduce the
source's truncated decimal coefficients and are only good to a few 1e-3
(their dropped harmonics are real; see the tests for measured bounds).

All formulas accept scalar or array t (numpy broadcasting).
"""

from __future__ import annotations

import numpy as np

__all__ = ["FORMULAS", "REDUCED_FAMILIES", "eval_formula", "reduced_eigenvalues",
           "formula_for_measure", "aniso_frequency_squared"]


def _cos(n, J, t):
    return np.cos(n * np.asarray(J, dtype=float) * np.asarray(t, dtype=float))


def _entropy_rows(rows, base):
    rows = np.stack(np.broadcast_arrays(*rows), axis=-1)
    safe = np.where(rows > 1e-15, rows, 1.0)
    return -(np.where(rows > 1e-15, rows * np.log(safe), 0.0)).sum(axis=-1) / np.log(base)


# --- bi-qutrit -------------------------------------------------------------

def _biqutrit_neg_eigs(J, t):
    c3, c6 = _cos(3, J, t), _cos(6, J, t)
    e12 = -np.sqrt(69 + 28 * c3 - 16 * c6) / 27.0
    e3 = -(5 + 4 * c3) / 27.0
    return e12, e12, e3


def biqutrit_m_vw(J, t):
    e1, e2, e3 = _biqutrit_neg_eigs(J, t)
    return np.abs(e1) + np.abs(e2) + np.abs(e3)


def biqutrit_m_sm(J, t):
    return np.sqrt(4457 + 2776 * _cos(3, J, t) - 632 * _cos(6, J, t)
                   - 56 * _cos(9, J, t) + 16 * _cos(12, J, t)) / 81.0


def _biqutrit_reduced(J, t):
    c3 = _cos(3, J, t)
    lam = (5 + 4 * c3) / 27.0
    return lam, lam, (17 - 8 * c3) / 27.0


def biqutrit_eta(J, t):
    return _entropy_rows(_biqutrit_reduced(J, t), 3)


def biqutrit_m_i(J, t):
    return np.sqrt(57 + 32 * _cos(3, J, t) - 8 * _cos(6, J, t)) / 9.0


def aniso_frequency_squared(J, Q):
    """9J^2 + 8QJ + 16Q^2; positive definite away from J = Q = 0."""
    return 9 * J * J + 8 * Q * J + 16 * Q * Q


def biqutrit_m_sm_aniso(J, t, Q):
    """Zero-field evolution at equal axial/rhombic anisotropy Q.

    Not even in J for Q != 0; the mixed QJ terms are genuine, which is why
    the +-J anisotropic curves differ while every zero-anisotropy formula
    in this catalog is J-sign-blind.
    """
    W = aniso_frequency_squared(J, Q)
    if not W > 0:
        raise ValueError("degenerate parameters J = Q = 0")
    q0 = (4457 * J**8 + 11616 * Q * J**7 + 47392 * Q**2 * J**6
          + 85888 * Q**3 * J**5 + 163072 * Q**4 * J**4 + 194560 * Q**5 * J**3
          + 221184 * Q**6 * J**2 + 131072 * Q**7 * J + 65536 * Q**8)
    q1 = 8 * J**2 * (J + 2 * Q)**2 * (347 * J**4 + 518 * Q * J**3
                                      + 1440 * Q**2 * J**2 + 1504 * Q**3 * J
                                      + 1024 * Q**4)
    q2 = -8 * J**2 * (J + 2 * Q)**2 * (79 * J**4 + 76 * Q * J**3
                                       + 320 * Q**2 * J**2 + 448 * Q**3 * J
                                       + 256 * Q**4)
    q3 = -8 * J**3 * (7 * J - 4 * Q) * (J + 2 * Q)**3 * (J + 4 * Q)
    q4 = 16 * J**4 * (J + 2 * Q)**4
    wt = np.sqrt(W) * np.asarray(t, dtype=float)
    s = q0 + q1 * np.cos(wt) + q2 * np.cos(2 * wt) + q3 * np.cos(3 * wt) \
        + q4 * np.cos(4 * wt)
    # the polynomial genuinely touches zero; clamp rounding residue only
    return np.sqrt(np.maximum(s, 0.0)) / W**2


# --- qutrit chains (reduced eigenvalues r1 = r2, r3) -----------------------

def _chain3_reduced(J, t):
    c5 = _cos(5, J, t)
    r12 = (29 - 4 * c5) / 75.0
    return r12, r12, (17 + 8 * c5) / 75.0


def _chain4_reduced(J, t):
    c3, c7 = _cos(3, J, t), _cos(7, J, t)
    r12 = (905 - 98 * c3 - 72 * c7) / 2205.0
    return r12, r12, (395 + 196 * c3 + 144 * c7) / 2205.0


def _chain5_reduced(J, t):
    c5, c9 = _cos(5, J, t), _cos(9, J, t)
    r12 = (16919 - 1944 * c5 - 800 * c9) / 42525.0
    return r12, r12, (8687 + 3888 * c5 + 1600 * c9) / 42525.0


def _chain6_reduced(J, t):
    c3, c7, c11 = _cos(3, J, t), _cos(7, J, t), _cos(11, J, t)
    r12 = (21977 - 1694 * c3 - 1936 * c7 - 560 * c11) / 53361.0
    return r12, r12, (9407 + 3388 * c3 + 3872 * c7 + 1120 * c11) / 53361.0


def chain_eta3(J, t):
    return _entropy_rows(_chain3_reduced(J, t), 3)


def chain_eta4(J, t):
    return _entropy_rows(_chain4_reduced(J, t), 3)


def chain_eta5(J, t):
    return _entropy_rows(_chain5_reduced(J, t), 3)


def chain_eta6(J, t):
    return _entropy_rows(_chain6_reduced(J, t), 3)


# --- bi-quartit ------------------------------------------------------------

def _biquartit_neg_eigs(J, t):
    c5, c10 = _cos(5, J, t), _cos(10, J, t)
    l1 = (-13 - 12 * c5) / 100.0
    l25 = -np.sqrt(409 + 288 * c5 - 72 * c10) / 100.0
    l6 = (-37 + 12 * c5) / 100.0
    return l1, l25, l25, l25, l25, l6


def biquartit_m_vw(J, t):
    return sum(np.abs(l) for l in _biquartit_neg_eigs(J, t))


def biquartit_m_sm(J, t):
    return np.sqrt(1803365 + 191616 * _cos(5, J, t) - 35808 * _cos(10, J, t)
                   - 6912 * _cos(15, J, t) + 864 * _cos(20, J, t)) / (625 * np.sqrt(5))


def _biquartit_reduced(J, t):
    c5 = _cos(5, J, t)
    l12 = (13 + 12 * c5) / 100.0
    l34 = (37 - 12 * c5) / 100.0
    return l12, l12, l34, l34


def biquartit_eta(J, t):
    return _entropy_rows(_biquartit_reduced(J, t), 4)


def biquartit_m_i(J, t):
    return np.sqrt(553 + 96 * _cos(5, J, t) - 24 * _cos(10, J, t)) / 25.0


# --- 3 quartits (decimal-truncated source row) -----------------------------

def _quartit3_reduced(J, t):
    osc = 0.068 * np.cos(2.5 * np.asarray(J, dtype=float) * np.asarray(t, dtype=float)) \
        + 0.04 * _cos(8, J, t)
    r12 = 0.141 + osc
    r34 = 0.359 - osc
    return r12, r12, r34, r34


def quartit3_eta(J, t):
    return _entropy_rows(_quartit3_reduced(J, t), 4)


# --- bi-pentit -------------------------------------------------------------

def bipentit_m_sm(J, t):
    s = (0.802 + 0.106 * _cos(3, J, t) - 0.019 * _cos(4, J, t)
         + 0.242 * _cos(7, J, t) - 0.098 * _cos(10, J, t)
         - 0.088 * _cos(14, J, t) + 0.067 * _cos(17, J, t)
         - 0.014 * _cos(20, J, t))
    return np.sqrt(s)


def bipentit_m_i(J, t):
    s = (0.791 + 0.114 * _cos(3, J, t) - 0.018 * _cos(4, J, t)
         - 0.005 * _cos(6, J, t) + 0.230 * _cos(7, J, t)
         - 0.079 * _cos(10, J, t) - 0.079 * _cos(14, J, t)
         + 0.060 * _cos(17, J, t) - 0.015 * _cos(20, J, t))
    return np.sqrt(s)


def _bipentit_reduced(J, t):
    c3, c7, c10 = _cos(3, J, t), _cos(7, J, t), _cos(10, J, t)
    p12 = (1173 - 140 * c3 + 640 * c7 - 448 * c10) / 6125.0
    p34 = (513 + 280 * c3 + 320 * c7 + 112 * c10) / 6125.0
    p5 = (2753 - 280 * c3 - 1920 * c7 + 672 * c10) / 6125.0
    return p12, p12, p34, p34, p5


def bipentit_eta(J, t):
    return _entropy_rows(_bipentit_reduced(J, t), 5)


# --- catalog ---------------------------------------------------------------

# name -> (function, takes_Q, exact_rational)
FORMULAS = {
    "biqutrit_mVW": (biqutrit_m_vw, False, True),
    "biqutrit_mSM": (biqutrit_m_sm, False, True),
    "biqutrit_mSM_aniso": (biqutrit_m_sm_aniso, True, True),
    "biqutrit_eta": (biqutrit_eta, False, True),
    "biqutrit_mI": (biqutrit_m_i, False, True),
    "chain_eta3": (chain_eta3, False, True),
    "chain_eta4": (chain_eta4, False, True),
    "chain_eta5": (chain_eta5, False, True),
    "chain_eta6": (chain_eta6, False, True),
    "biquartit_mVW": (biquartit_m_vw, False, True),
    "biquartit_mSM": (biquartit_m_sm, False, True),
    "biquartit_eta": (biquartit_eta, False, True),
    "biquartit_mI": (biquartit_m_i, False, True),
    "quartit3_eta": (quartit3_eta, False, False),
    "bipentit_mSM": (bipentit_m_sm, False, False),
    "bipentit_mI": (bipentit_m_i, False, False),
    "bipentit_eta": (bipentit_eta, False, True),
}

REDUCED_FAMILIES = {
    "biqutrit": _biqutrit_reduced,
    "chain3": _chain3_reduced,
    "chain4": _chain4_reduced,
    "chain5": _chain5_reduced,
    "chain6": _chain6_reduced,
    "biquartit": _biquartit_reduced,
    "quartit3": _quartit3_reduced,
    "bipentit": _bipentit_reduced,
}

# (site dim, site count, measure column) -> formula name
_MEASURE_MAP = {
    (3, 2, "m_VW"): "biqutrit_mVW",
    (3, 2, "m_SM"): "biqutrit_mSM",
    (3, 2, "eta_2"): "biqutrit_eta",
    (3, 2, "m_I"): "biqutrit_mI",
    (3, 3, "eta_3"): "chain_eta3",
    (3, 4, "eta_4"): "chain_eta4",
    (3, 5, "eta_5"): "chain_eta5",
    (3, 6, "eta_6"): "chain_eta6",
    (4, 2, "m_VW"): "biquartit_mVW",
    (4, 2, "m_SM"): "biquartit_mSM",
    (4, 2, "eta_2"): "biquartit_eta",
    (4, 2, "m_I"): "biquartit_mI",
    (4, 3, "eta_3"): "quartit3_eta",
    (5, 2, "m_SM"): "bipentit_mSM",
    (5, 2, "m_I"): "bipentit_mI",
    (5, 2, "eta_2"): "bipentit_eta",
}


def formula_for_measure(dim: int, n_sites: int, measure: str) -> str | None:
    """Catalog entry matching an engine measure column, if one exists."""
    return _MEASURE_MAP.get((dim, n_sites, measure))


def eval_formula(name: str, J: float, t, Q: float | None = None):
    """Evaluate a catalog formula at exchange J and time(s) t."""
    if name not in FORMULAS:
        raise ValueError(f"unknown formula {name!r}")
    func, takes_q, _ = FORMULAS[name]
    if takes_q:
        if Q is None:
            raise ValueError(f"{name} requires the anisotropy constant Q")
        return func(J, t, Q)
    if Q is not None:
        raise ValueError(f"{name} does not take an anisotropy constant")
    return func(J, t)


def reduced_eigenvalues(family: str, J: float, t):
    """Published single-site reduced eigenvalues, stacked on the last axis."""
    if family not in REDUCED_FAMILIES:
        raise ValueError(f"unknown eigenvalue family {family!r}")
    rows = REDUCED_FAMILIES[family](J, t)
    return np.stack(np.broadcast_arrays(*rows), axis=-1)
