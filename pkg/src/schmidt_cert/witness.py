"""Symmetric-projection witnesses, Schmidt-number certificates and operator checks.

The MUB witness is the total probability of identical outcomes over the
product filters |e><e| (x) |e*><e*|; the EAM witness is the same sum over
an equiangular frame, rescaled by d(n-1)/(n(d-1)).
"""

from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import DimensionError, OperatorTooLargeError, UnsupportedDimensionError
from .measurements import (
    EamFrame,
    MubFamily,
    mub_full_prime,
    sic_from_fiducial,
)
from .states import local_dim, max_entangled_state, projector

DEFAULT_MAX_DIM = 64
INTEGER_SNAP = 1e-9
SPECTRAL_TOL = 1e-8


def max_operator_dim() -> int:
    """Largest local dimension for which dense witness operators are built."""
    raw = os.environ.get("SCHMIDT_CERT_MAX_DIM")
    return int(raw) if raw else DEFAULT_MAX_DIM


def eam_weight(n: int, d: int) -> float:
    return d * (n - 1) / (n * (d - 1))


def _filter_vectors(meas: MubFamily | EamFrame) -> np.ndarray:
    """Rows are the global product vectors |v> (x) |v*>, shape (settings, d**2)."""
    vecs = meas.vectors()
    d = meas.dim_local
    return (vecs[:, :, None] * vecs.conj()[:, None, :]).reshape(len(vecs), d * d)


def filter_probabilities(state, meas: MubFamily | EamFrame) -> np.ndarray:
    """Born probabilities of every identical-outcome filter.

    ``state`` may be a density matrix or a pure state vector. Order matches
    ``meas.vectors()``.
    """
    state = np.asarray(state, dtype=complex)
    size = state.shape[0]
    if local_dim(size) != meas.dim_local:
        raise DimensionError(
            f"state local dimension {local_dim(size)} != measurement dimension {meas.dim_local}"
        )
    g = _filter_vectors(meas)
    if state.ndim == 1:
        return np.abs(g.conj() @ state) ** 2
    return np.einsum("si,ij,sj->s", g.conj(), state, g, optimize=True).real


def _ordered_sum(values: np.ndarray) -> float:
    # numpy's pairwise summation over a contiguous array is order-deterministic
    return float(np.sum(np.ascontiguousarray(values, dtype=float)))


def mub_witness_value(state, fam: MubFamily) -> float:
    """S = sum_z sum_a <e_a^z, e_a^z*| rho |e_a^z, e_a^z*>."""
    return _ordered_sum(filter_probabilities(state, fam))


def eam_witness_value(state, frame: EamFrame) -> float:
    """R = d(n-1)/(n(d-1)) sum_a <psi_a, psi_a*| rho |psi_a, psi_a*>."""
    d, n = frame.dim_local, frame.n
    return eam_weight(n, d) * _ordered_sum(filter_probabilities(state, frame))


def witness_value(state, meas: MubFamily | EamFrame) -> float:
    if isinstance(meas, MubFamily):
        return mub_witness_value(state, meas)
    return eam_witness_value(state, meas)


# -- bounds and certificates ------------------------------------------------


def _check_k(k: int, d: int) -> None:
    if not 1 <= k <= d:
        raise DimensionError(f"k={k} outside [1, d={d}]")


def mub_schmidt_bound(m: int, d: int, k: int) -> float:
    """Largest S attainable by states of Schmidt number at most k: 1 + (m-1)k/d."""
    _check_k(k, d)
    if m < 1:
        raise DimensionError("m must be >= 1")
    return 1 + (m - 1) * k / d


def eam_schmidt_bound(n: int, d: int, k: int) -> float:
    """Largest R attainable by states of Schmidt number at most k: 1 + k(n-d)/(d(d-1))."""
    _check_k(k, d)
    if not d <= n <= d * d:
        raise DimensionError(f"n={n} outside [d, d^2]")
    return 1 + k * (n - d) / (d * (d - 1))


def schmidt_bound(kind: str, settings: int, d: int, k: int) -> float:
    if kind == "mub":
        return mub_schmidt_bound(settings, d, k)
    if kind == "eam":
        return eam_schmidt_bound(settings, d, k)
    raise ValueError(f"unknown family kind {kind!r}")


@dataclass(frozen=True)
class FamilyDescriptor:
    kind: str
    dim_local: int
    settings_count: int

    @classmethod
    def of(cls, meas: MubFamily | EamFrame) -> "FamilyDescriptor":
        return cls(meas.kind, meas.dim_local, meas.settings_count)

    def validate(self) -> None:
        d, s = self.dim_local, self.settings_count
        if d < 2:
            raise DimensionError("d must be >= 2")
        if self.kind == "mub":
            if not 2 <= s <= d + 1:
                raise DimensionError(f"m={s} outside [2, d+1]")
        elif self.kind == "eam":
            if not d < s <= d * d:
                raise DimensionError(f"n={s} outside (d, d^2]; n=d carries no entanglement signal")
        else:
            raise ValueError(f"unknown family kind {self.kind!r}")


@dataclass(frozen=True)
class WitnessReport:
    family_kind: str
    dim_local: int
    settings_count: int
    value: float
    schmidt_lower_bound: int
    fidelity_lower_bound: float
    saturating_bound_k: int | None
    schmidt_ratio: float
    value_exceeds_algebraic_max: bool
    bounds: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = asdict(self)
        out["bounds"] = {str(k): v for k, v in self.bounds.items()}
        return out


def _snap_ceil(x: float, eps: float) -> int:
    r = round(x)
    if abs(x - r) <= eps:
        return int(r)
    return math.ceil(x)


def certify(value: float, descriptor: FamilyDescriptor, eps: float = INTEGER_SNAP) -> WitnessReport:
    """Schmidt-number and fidelity lower bounds implied by an observed witness value.

    The certified Schmidt number is the smallest k whose bound is at least
    the observed value, clamped to [1, d]. Values within ``eps`` of an
    integer ratio are treated as that integer.
    """
    if not math.isfinite(value):
        raise ValueError("witness value must be finite")
    descriptor.validate()
    kind, d, s = descriptor.kind, descriptor.dim_local, descriptor.settings_count
    if kind == "mub":
        fidelity = (value - 1) / (s - 1)
    else:
        fidelity = (d - 1) * (value - 1) / (s - d)
    ratio = d * fidelity
    k_raw = _snap_ceil(ratio, eps)
    k_cert = min(max(k_raw, 1), d)
    top = schmidt_bound(kind, s, d, d)
    exceeds = value > top + eps
    saturating = None if exceeds else max(k_raw, 1)
    return WitnessReport(
        family_kind=kind,
        dim_local=d,
        settings_count=s,
        value=float(value),
        schmidt_lower_bound=int(k_cert),
        fidelity_lower_bound=float(max(fidelity, 0.0)),
        saturating_bound_k=saturating,
        schmidt_ratio=float(ratio),
        value_exceeds_algebraic_max=bool(exceeds),
        bounds={k: schmidt_bound(kind, s, d, k) for k in (1, max(k_cert - 1, 1), k_cert, d)},
    )


# -- dense operators --------------------------------------------------------


def _guard(d: int, max_dim: int | None) -> None:
    limit = max_operator_dim() if max_dim is None else max_dim
    if d > limit:
        raise OperatorTooLargeError(
            f"d={d} exceeds operator dimension guard {limit} (set SCHMIDT_CERT_MAX_DIM to raise it)"
        )


def build_mub_witness_operator(fam: MubFamily, max_dim: int | None = None) -> np.ndarray:
    """W = sum_z sum_a |e_a^z><e_a^z| (x) |e_a^z*><e_a^z*|."""
    _guard(fam.dim_local, max_dim)
    g = _filter_vectors(fam)
    return g.T @ g.conj()


def build_eam_witness_operator(frame: EamFrame, max_dim: int | None = None) -> np.ndarray:
    _guard(frame.dim_local, max_dim)
    g = _filter_vectors(frame)
    return eam_weight(frame.n, frame.dim_local) * (g.T @ g.conj())


def build_witness_operator(meas: MubFamily | EamFrame, max_dim: int | None = None) -> np.ndarray:
    if isinstance(meas, MubFamily):
        return build_mub_witness_operator(meas, max_dim)
    return build_eam_witness_operator(meas, max_dim)


def witness_top_eigenvalue(kind: str, settings: int, d: int) -> float:
    return float(settings) if kind == "mub" else (settings - 1) / (d - 1)


def expected_kernel_dim(kind: str, settings: int, d: int) -> int:
    return (d - 1) * (d + 1 - settings) if kind == "mub" else d * d - settings


@dataclass
class SpectralReport:
    kind: str
    dim_local: int
    settings_count: int
    tolerance: float
    eigenvalues: list
    top_eigenvalue: float
    expected_top_eigenvalue: float
    eigenvector_residual: float
    top_eigenvector_overlap: float
    projector_residual: float
    shifted_eigenvalue_deviation: float
    kernel_dim: int
    expected_kernel_dim: int
    checks: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return all(self.checks.values())

    def to_dict(self) -> dict:
        out = asdict(self)
        out["passed"] = self.passed
        return out


def verify_witness_spectrum(
    w: np.ndarray, kind: str, settings: int, d: int, tol: float = SPECTRAL_TOL
) -> SpectralReport:
    """Check the eigenstructure of a witness operator.

    Asserts (each within ``tol``): phi+ is an eigenvector with the maximal
    eigenvalue; the shifted operator W - c phi+ is a projector with
    eigenvalues in {0, 1}; the kernel has the predicted dimension. Failures
    are recorded in ``checks`` rather than raised.
    """
    w = np.asarray(w, dtype=complex)
    phi = max_entangled_state(d)
    top_expected = witness_top_eigenvalue(kind, settings, d)
    shift = top_expected - 1.0

    w_herm = (w + w.conj().T) / 2
    evals, evecs = np.linalg.eigh(w_herm)
    residual = float(np.linalg.norm(w @ phi - top_expected * phi))
    top_overlap = float(abs(np.vdot(evecs[:, -1], phi)))

    w_shift = w - shift * projector(phi)
    proj_res = float(np.abs(w_shift @ w_shift - w_shift).max())
    shifted = np.linalg.eigvalsh((w_shift + w_shift.conj().T) / 2)
    shifted_dev = float(np.minimum(np.abs(shifted), np.abs(shifted - 1.0)).max())
    kernel = int(np.count_nonzero(np.abs(evals) <= tol))
    kernel_expected = expected_kernel_dim(kind, settings, d)

    top_is_unique = shift > tol
    checks = {
        "top_eigenvalue": abs(evals[-1] - top_expected) <= tol and residual <= tol,
        "top_eigenvector_phi_plus": (abs(top_overlap - 1.0) <= tol) if top_is_unique else residual <= tol,
        "shifted_projector": proj_res <= tol,
        "shifted_eigenvalues_binary": shifted_dev <= tol,
        "kernel_dimension": kernel == kernel_expected,
    }
    return SpectralReport(
        kind=kind,
        dim_local=d,
        settings_count=settings,
        tolerance=tol,
        eigenvalues=[float(x) for x in evals],
        top_eigenvalue=float(evals[-1]),
        expected_top_eigenvalue=top_expected,
        eigenvector_residual=residual,
        top_eigenvector_overlap=top_overlap,
        projector_residual=proj_res,
        shifted_eigenvalue_deviation=shifted_dev,
        kernel_dim=kernel,
        expected_kernel_dim=kernel_expected,
        checks={k: bool(v) for k, v in checks.items()},
    )


def verify_measurement(meas: MubFamily | EamFrame, tol: float = SPECTRAL_TOL) -> SpectralReport:
    w = build_witness_operator(meas)
    return verify_witness_spectrum(w, meas.kind, meas.settings_count, meas.dim_local, tol)


@dataclass(frozen=True)
class IdentityCheck:
    kind: str
    dim_local: int
    available: bool
    holds: bool | None
    deviation: float | None
    notice: str = ""


def maximal_set_identity_check(
    d: int, meas: MubFamily | EamFrame | None = None, tol: float = SPECTRAL_TOL
) -> dict:
    """Check W = 1 + d phi+ for the complete MUB set and for the SIC frame.

    With ``meas`` given, only that family is checked (so partial families can
    be shown to fail). Otherwise the internal constructions are used where
    available and skipped with a notice elsewhere.
    """
    target = np.eye(d * d) + d * projector(max_entangled_state(d))
    if meas is not None:
        dev = float(np.abs(build_witness_operator(meas) - target).max())
        return {meas.kind: IdentityCheck(meas.kind, d, True, dev <= tol, dev)}

    results = {}
    try:
        fam = mub_full_prime(d)
        dev = float(np.abs(build_mub_witness_operator(fam) - target).max())
        results["mub"] = IdentityCheck("mub", d, True, dev <= tol, dev)
    except UnsupportedDimensionError as exc:
        results["mub"] = IdentityCheck("mub", d, False, None, None, str(exc))
    try:
        frame = sic_from_fiducial(d)
        dev = float(np.abs(build_eam_witness_operator(frame) - target).max())
        results["eam"] = IdentityCheck("eam", d, True, dev <= tol, dev)
    except UnsupportedDimensionError as exc:
        results["eam"] = IdentityCheck("eam", d, False, None, None, str(exc))
    return results
