"""Noisy maximally entangled states and critical visibilities.

Every closed-form threshold here can be recomputed numerically with
:func:`threshold_scan`, which locates the visibility at which the witness
value of a noisy family crosses the Schmidt-number bound.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DimensionError, NoKernelError, NoThresholdError
from .measurements import EamFrame, MubFamily, eam_dephasing_tuned
from .states import max_entangled_state, projector
from .witness import build_witness_operator, schmidt_bound, witness_value

NOISE_KINDS = ("isotropic", "dephasing", "worst_case", "unfaithful")
KERNEL_TOL = 1e-10
DEPHASE_CHECK_MAX_D = 32


def _check_v(v: float) -> None:
    if not 0.0 <= v <= 1.0:
        raise ValueError(f"visibility {v} outside [0, 1]")


def _check_d(d: int) -> None:
    if d < 2:
        raise DimensionError("d must be >= 2")


def _check_k(d: int, k: int) -> None:
    if not 1 <= k <= d - 1:
        raise DimensionError(f"k={k} outside [1, d-1]; thresholds certify Schmidt number k+1")


@dataclass(frozen=True)
class NoiseSpec:
    kind: str
    visibility: float
    dim_local: int
    sigma_selector: int | None = None

    def __post_init__(self):
        if self.kind not in NOISE_KINDS:
            raise ValueError(f"unknown noise kind {self.kind!r}")
        _check_v(self.visibility)
        _check_d(self.dim_local)


def isotropic_state(d: int, v: float) -> np.ndarray:
    _check_d(d)
    _check_v(v)
    return v * projector(max_entangled_state(d)) + (1 - v) / d**2 * np.eye(d * d)


def classically_correlated_state(d: int) -> np.ndarray:
    rho = np.zeros((d * d, d * d), dtype=complex)
    idx = np.arange(d) * (d + 1)
    rho[idx, idx] = 1.0 / d
    return rho


def dephased_state(d: int, v: float) -> np.ndarray:
    _check_d(d)
    _check_v(v)
    return v * projector(max_entangled_state(d)) + (1 - v) * classically_correlated_state(d)


def kernel_basis(w: np.ndarray, tol: float = KERNEL_TOL) -> np.ndarray:
    """Orthonormal columns spanning the numerical kernel of a PSD operator."""
    evals, evecs = np.linalg.eigh((w + w.conj().T) / 2)
    return evecs[:, np.abs(evals) <= tol]


def worst_case_sigma(w: np.ndarray, selector: int | None = None, tol: float = KERNEL_TOL) -> np.ndarray:
    """Normalised kernel projector of ``w``, or one kernel eigenvector if ``selector`` is given."""
    ker = kernel_basis(w, tol)
    if ker.shape[1] == 0:
        raise NoKernelError("witness operator is full rank; no state has witness value 0")
    if selector is not None:
        if not 0 <= selector < ker.shape[1]:
            raise IndexError(f"kernel selector {selector} outside [0, {ker.shape[1]})")
        return projector(ker[:, selector])
    return ker @ ker.conj().T / ker.shape[1]


def worst_case_state(d: int, v: float, meas: MubFamily | EamFrame, selector: int | None = None) -> np.ndarray:
    """v phi+ + (1-v) sigma, with sigma supported on the kernel of the witness operator."""
    _check_v(v)
    if meas.dim_local != d:
        raise DimensionError("measurement dimension does not match d")
    sigma = worst_case_sigma(build_witness_operator(meas), selector)
    residual = witness_value(sigma, meas)
    if residual > KERNEL_TOL:
        raise NoKernelError(f"kernel state has witness value {residual:.3e}")
    return v * projector(max_entangled_state(d)) + (1 - v) * sigma


def min_eigenspace_state(w: np.ndarray, tol: float = 1e-8) -> np.ndarray:
    """Normalised projector onto the lowest eigenspace of ``w``.

    For maximal sets (W = 1 + d phi+) this is the least favourable noise,
    since no state reaches witness value 0.
    """
    evals, evecs = np.linalg.eigh((w + w.conj().T) / 2)
    low = evecs[:, evals <= evals[0] + tol]
    return low @ low.conj().T / low.shape[1]


def unfaithful_state(d: int, v: float) -> np.ndarray:
    """v phi+ + (1-v)|01><01|."""
    _check_d(d)
    _check_v(v)
    ket01 = np.zeros(d * d, dtype=complex)
    ket01[1] = 1.0
    return v * projector(max_entangled_state(d)) + (1 - v) * projector(ket01)


def noisy_state(spec: NoiseSpec, meas: MubFamily | EamFrame | None = None) -> np.ndarray:
    d, v = spec.dim_local, spec.visibility
    if spec.kind == "isotropic":
        return isotropic_state(d, v)
    if spec.kind == "dephasing":
        return dephased_state(d, v)
    if spec.kind == "unfaithful":
        return unfaithful_state(d, v)
    if meas is None:
        raise ValueError("worst_case noise needs the measurement whose witness it targets")
    return worst_case_state(d, v, meas, spec.sigma_selector)


# -- closed-form thresholds --------------------------------------------------


def v_opt_iso(d: int, k: int) -> float:
    """Exact Schmidt-number-(k+1) threshold of the isotropic state."""
    _check_d(d)
    _check_k(d, k)
    return (k * d - 1) / (d * d - 1)


def v_opt_dephase(d: int, k: int) -> float:
    """Exact Schmidt-number-(k+1) threshold of the dephased state."""
    _check_d(d)
    _check_k(d, k)
    return (k - 1) / (d - 1)


def v_crit_mub_iso(m: int, d: int, k: int) -> float:
    _check_d(d)
    _check_k(d, k)
    return (d - k + m * (k - 1)) / (m * (d - 1))


def v_crit_eam_iso(n: int, d: int, k: int) -> float:
    _check_d(d)
    _check_k(d, k)
    return (d - k) / (n - 1) + (k - 1) / (d - 1)


def v_crit_mub_dephase_pair(d: int, k: int) -> float:
    """Threshold of the computational + Fourier pair on dephased states; equals the optimum."""
    return v_opt_dephase(d, k)


def v_crit_eam_dephase(d: int, k: int, verify: bool | None = None) -> float:
    """Threshold of the Fourier-rotated n = d+1 frame on dephased states.

    The formula (d^2 - 3(d-k) - 1)/(d^2 - 1) is empirical, so for d <= 32 it
    is compared against a numerical scan and a warning is emitted on any
    disagreement above 1e-9.
    """
    _check_d(d)
    _check_k(d, k)
    value = (d * d - 3 * (d - k) - 1) / (d * d - 1)
    if verify is None:
        verify = d <= DEPHASE_CHECK_MAX_D
    if verify:
        scanned = threshold_scan("dephasing", eam_dephasing_tuned(d), k)
        if abs(scanned - value) > 1e-9:
            warnings.warn(
                f"dephasing-EAM closed form {value!r} disagrees with scan {scanned!r} at d={d}, k={k}",
                RuntimeWarning,
                stacklevel=2,
            )
    return value


def v_crit_worst(kind: str, settings: int, d: int, k: int) -> float:
    """Worst-case-noise threshold; k/d for maximal sets (m = d+1 or n = d^2)."""
    _check_d(d)
    _check_k(d, k)
    if kind == "mub":
        m = settings
        if m == d + 1:
            return k / d
        return (d + (m - 1) * k) / (d * m)
    if kind == "eam":
        n = settings
        if n == d * d:
            return k / d
        return (d - 1) / (n - 1) + k * (n - d) / (d * (n - 1))
    raise ValueError(f"unknown family kind {kind!r}")


def fidelity_reference_worst(d: int, k: int) -> float:
    """Threshold of the exact fidelity criterion F > k/d when F equals the visibility."""
    return k / d


def accuracy_delta(v_crit: float, v_opt: float) -> float:
    """Relative-gap ratio (1 - v_crit)/(1 - v_opt)."""
    if v_opt >= 1.0:
        raise ValueError("v_opt must be < 1")
    return (1 - v_crit) / (1 - v_opt)


def delta_mub_iso(m: int, d: int) -> float:
    return (d + 1) * (1 - 1 / m) / d


def delta_eam_iso(n: int, d: int) -> float:
    return (d + 1) * (n - d) / (d * (n - 1))


# -- numerical oracle -------------------------------------------------------


def state_family(kind: str, meas: MubFamily | EamFrame) -> Callable[[float], np.ndarray]:
    """v -> rho_v for a named noise family targeting ``meas``.

    ``worst_case`` uses the kernel projector when the witness has a kernel
    and the lowest eigenspace otherwise.
    """
    d = meas.dim_local
    if kind == "isotropic":
        return lambda v: isotropic_state(d, v)
    if kind == "dephasing":
        return lambda v: dephased_state(d, v)
    if kind == "unfaithful":
        return lambda v: unfaithful_state(d, v)
    if kind == "worst_case":
        w = build_witness_operator(meas)
        try:
            sigma = worst_case_sigma(w)
        except NoKernelError:
            sigma = min_eigenspace_state(w)
        phi = projector(max_entangled_state(d))
        return lambda v: v * phi + (1 - v) * sigma
    raise ValueError(f"unknown noise kind {kind!r}")


def threshold_scan(
    family,
    meas: MubFamily | EamFrame,
    k: int,
    tol: float = 1e-10,
    method: str = "auto",
) -> float:
    """Smallest visibility at which the witness value reaches the Schmidt-k bound.

    ``family`` is a noise-kind name or a callable v -> density matrix. Named
    families are linear in v, so the crossing follows from the endpoints
    (``method="linear"``); callables default to bisection.

    Raises
    ------
    NoThresholdError
        If the witness value never reaches the bound on [0, 1].
    """
    d = meas.dim_local
    bound = schmidt_bound(meas.kind, meas.settings_count, d, k)
    make = state_family(family, meas) if isinstance(family, str) else family
    if method == "auto":
        method = "linear" if isinstance(family, str) else "bisect"

    lo_val = witness_value(make(0.0), meas) - bound
    hi_val = witness_value(make(1.0), meas) - bound
    if lo_val >= 0:
        return 0.0
    if hi_val < 0:
        raise NoThresholdError(f"witness stays below the k={k} bound on [0, 1]")

    if method == "linear":
        return float(-lo_val / (hi_val - lo_val))
    if method != "bisect":
        raise ValueError(f"unknown method {method!r}")
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if witness_value(make(mid), meas) - bound >= 0:
            hi = mid
        else:
            lo = mid
    return 0.5 * (lo + hi)
