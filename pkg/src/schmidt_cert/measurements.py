"""Mutually unbiased bases and equiangular measurement frames.

A MUB family is stored as an array of shape ``(m, d, d)`` where
``bases[z, a]`` is the a-th vector of basis z. An equiangular frame is an
array of shape ``(n, d)`` of unit vectors; the POVM elements are
``(d/n) |psi_a><psi_a|``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DimensionError, NotASicError, UnsupportedDimensionError, ValidationError

ANALYTIC_TOL = 1e-10
SIC_TOL = 1e-8


@dataclass(frozen=True)
class MubFamily:
    dim_local: int
    bases: np.ndarray

    @property
    def m(self) -> int:
        return self.bases.shape[0]

    @property
    def kind(self) -> str:
        return "mub"

    @property
    def settings_count(self) -> int:
        return self.m

    def vectors(self) -> np.ndarray:
        """All m*d filter vectors, ordered by (basis, outcome)."""
        return self.bases.reshape(-1, self.dim_local)


@dataclass(frozen=True)
class EamFrame:
    dim_local: int
    vectors_: np.ndarray

    @property
    def n(self) -> int:
        return self.vectors_.shape[0]

    @property
    def weight(self) -> float:
        return self.dim_local / self.n

    @property
    def kind(self) -> str:
        return "eam"

    @property
    def settings_count(self) -> int:
        return self.n

    def vectors(self) -> np.ndarray:
        return self.vectors_


@dataclass(frozen=True)
class ValidationReport:
    passed: bool
    tolerance: float
    max_norm_deviation: float
    max_orthonormality_deviation: float = 0.0
    max_unbiasedness_deviation: float = 0.0
    max_overlap_deviation: float = 0.0
    max_resolution_deviation: float = 0.0

    def to_dict(self) -> dict:
        return dict(self.__dict__)


def welch_bound(n: int, d: int) -> float:
    """Minimal constant squared overlap (n - d) / (d (n - 1)) of n unit vectors in C^d."""
    if d < 2:
        raise DimensionError("d must be >= 2")
    if not d <= n <= d * d:
        raise DimensionError(f"n={n} outside [d, d^2] = [{d}, {d * d}]")
    if n == d:
        return 0.0
    return (n - d) / (d * (n - 1))


def is_prime(p: int) -> bool:
    if p < 2:
        return False
    return all(p % q for q in range(2, math.isqrt(p) + 1))


def computational_basis(d: int) -> np.ndarray:
    return np.eye(d, dtype=complex)


def fourier_matrix(d: int) -> np.ndarray:
    """F = (1/sqrt(d)) sum_{s,t} exp(2 pi i s t / d) |s><t|."""
    s = np.arange(d)
    return np.exp(2j * np.pi * np.outer(s, s) / d) / math.sqrt(d)


def fourier_basis(d: int) -> np.ndarray:
    """The vectors F|a>, one per row."""
    if d < 2:
        raise DimensionError("d must be >= 2")
    return fourier_matrix(d).T.copy()


def mub_pair(d: int) -> MubFamily:
    """Computational basis and its Fourier transform; valid for every d."""
    if d < 2:
        raise DimensionError("d must be >= 2")
    return MubFamily(d, np.stack([computational_basis(d), fourier_basis(d)]))


def mub_full_prime(d: int, m: int | None = None) -> MubFamily:
    """First ``m`` bases of the complete prime-dimension MUB set.

    Basis 0 is computational; for odd prime d, basis z+1 holds the vectors
    (1/sqrt(d)) sum_l omega^(z l^2 + a l) |l>, z = 0..d-1 (z = 0 is the
    Fourier basis). For d = 2 the Z, X, Y eigenbases are used.
    """
    if not is_prime(d):
        raise UnsupportedDimensionError(
            f"d={d} is not prime; use mub_pair(d) for m=2 or supply validated bases"
        )
    if m is None:
        m = d + 1
    if not 2 <= m <= d + 1:
        raise DimensionError(f"m={m} outside [2, d+1] = [2, {d + 1}]")
    if d == 2:
        r = 1 / math.sqrt(2)
        full = np.array(
            [
                [[1, 0], [0, 1]],
                [[r, r], [r, -r]],
                [[r, 1j * r], [r, -1j * r]],
            ],
            dtype=complex,
        )
        return MubFamily(2, full[:m].copy())

    l = np.arange(d)
    bases = [computational_basis(d)]
    for z in range(m - 1):
        exponents = (z * l * l)[None, :] + np.outer(l, l)  # [a, l]
        bases.append(np.exp(2j * np.pi * (exponents % d) / d) / math.sqrt(d))
    return MubFamily(d, np.stack(bases))


def _as_bases(bases) -> np.ndarray:
    if isinstance(bases, MubFamily):
        return bases.bases
    try:
        arr = np.asarray(bases, dtype=complex)
    except (ValueError, TypeError) as exc:
        raise ValidationError(f"ragged or non-numeric MUB input: {exc}") from exc
    if arr.ndim != 3 or arr.shape[1] != arr.shape[2]:
        raise ValidationError(f"MUB input must have shape (m, d, d), got {arr.shape}")
    return arr


def validate_mub(bases, tol: float = ANALYTIC_TOL) -> ValidationReport:
    """Check orthonormality within each basis and unbiasedness across bases."""
    arr = _as_bases(bases)
    m, d, _ = arr.shape
    norm_dev = float(np.abs(np.linalg.norm(arr, axis=2) - 1.0).max())
    ortho_dev = 0.0
    for z in range(m):
        gram = arr[z].conj() @ arr[z].T
        ortho_dev = max(ortho_dev, float(np.abs(gram - np.eye(d)).max()))
    unbias_dev = 0.0
    for z in range(m):
        for w in range(z + 1, m):
            overlaps = np.abs(arr[z].conj() @ arr[w].T) ** 2
            unbias_dev = max(unbias_dev, float(np.abs(overlaps - 1.0 / d).max()))
    passed = 2 <= m <= d + 1 and max(norm_dev, ortho_dev, unbias_dev) <= tol
    return ValidationReport(
        passed=passed,
        tolerance=tol,
        max_norm_deviation=norm_dev,
        max_orthonormality_deviation=ortho_dev,
        max_unbiasedness_deviation=unbias_dev,
    )


def make_mub_family(bases, tol: float = ANALYTIC_TOL) -> MubFamily:
    """Wrap user-supplied bases after validation."""
    arr = _as_bases(bases)
    report = validate_mub(arr, tol)
    if not report.passed:
        raise ValidationError(f"bases are not a valid MUB family: {report.to_dict()}")
    return MubFamily(arr.shape[1], arr)


def validate_eam(frame, tol: float = ANALYTIC_TOL) -> ValidationReport:
    """Check unit norms, equiangularity at the Welch bound and (d/n)-weighted identity resolution."""
    vecs = frame.vectors() if isinstance(frame, EamFrame) else np.asarray(frame, dtype=complex)
    if vecs.ndim != 2:
        raise ValidationError(f"frame must have shape (n, d), got {vecs.shape}")
    n, d = vecs.shape
    norm_dev = float(np.abs(np.linalg.norm(vecs, axis=1) - 1.0).max())
    if not d <= n <= d * d:
        return ValidationReport(False, tol, norm_dev, max_overlap_deviation=math.inf)
    t = welch_bound(n, d)
    overlaps = np.abs(vecs.conj() @ vecs.T) ** 2
    off = ~np.eye(n, dtype=bool)
    overlap_dev = float(np.abs(overlaps[off] - t).max()) if n > 1 else 0.0
    resolution = (d / n) * (vecs.T @ vecs.conj())
    res_dev = float(np.abs(resolution - np.eye(d)).max())
    passed = max(norm_dev, overlap_dev, res_dev) <= tol
    return ValidationReport(
        passed=passed,
        tolerance=tol,
        max_norm_deviation=norm_dev,
        max_overlap_deviation=overlap_dev,
        max_resolution_deviation=res_dev,
    )


def make_eam_frame(vectors, tol: float = ANALYTIC_TOL) -> EamFrame:
    vecs = np.asarray(vectors, dtype=complex)
    report = validate_eam(vecs, tol)
    if not report.passed:
        raise ValidationError(f"vectors are not an equiangular tight frame: {report.to_dict()}")
    return EamFrame(vecs.shape[1], vecs)


def eam_fourier_drop_row(d: int) -> EamFrame:
    """n = d+1 frame: the (d+1)-point Fourier matrix with its last row removed, columns renormalised."""
    if d < 2:
        raise DimensionError("d must be >= 2")
    l = np.arange(d)
    a = np.arange(d + 1)
    vecs = np.exp(2j * np.pi * np.outer(a, l) / (d + 1)) / math.sqrt(d)
    return EamFrame(d, vecs)


def eam_dephasing_tuned(d: int) -> EamFrame:
    """The drop-row frame rotated by the d-point Fourier unitary, |psi_a> = F|psi'_a>."""
    base = eam_fourier_drop_row(d)
    rotated = base.vectors_ @ fourier_matrix(d).T
    return EamFrame(d, rotated)


def _shift_and_clock(d: int) -> tuple[np.ndarray, np.ndarray]:
    x = np.roll(np.eye(d, dtype=complex), 1, axis=0)  # X|l> = |l+1>
    z = np.diag(np.exp(2j * np.pi * np.arange(d) / d))
    return x, z


def bundled_fiducial(d: int) -> np.ndarray:
    if d == 2:
        # Bloch vector (1, 1, 1)/sqrt(3)
        theta = math.acos(1 / math.sqrt(3))
        return np.array([math.cos(theta / 2), np.exp(1j * math.pi / 4) * math.sin(theta / 2)])
    if d == 3:
        return np.array([0, 1, -1], dtype=complex) / math.sqrt(2)
    raise UnsupportedDimensionError(
        f"no bundled SIC fiducial for d={d}; pass a fiducial vector explicitly"
    )


def sic_from_fiducial(d: int, fiducial=None, tol: float = SIC_TOL) -> EamFrame:
    """Weyl-Heisenberg orbit X^p Z^q |fiducial>, p, q = 0..d-1.

    Raises
    ------
    NotASicError
        If the orbit is not equiangular at 1/(d+1) within ``tol``.
    """
    if d < 2:
        raise DimensionError("d must be >= 2")
    fid = bundled_fiducial(d) if fiducial is None else np.asarray(fiducial, dtype=complex).ravel()
    if fid.size != d:
        raise DimensionError(f"fiducial has length {fid.size}, expected {d}")
    if abs(np.linalg.norm(fid) - 1.0) > tol:
        raise ValidationError("fiducial must have unit norm")
    x, z = _shift_and_clock(d)
    vecs = []
    for p in range(d):
        xp = np.linalg.matrix_power(x, p)
        for q in range(d):
            vecs.append(xp @ np.linalg.matrix_power(z, q) @ fid)
    vecs = np.array(vecs)
    report = validate_eam(vecs, tol)
    if not report.passed:
        worst = max(report.max_overlap_deviation, report.max_resolution_deviation)
        raise NotASicError(f"orbit is not a SIC (worst overlap deviation {worst:.3e})", worst)
    return EamFrame(d, vecs)


# -- JSON interchange -------------------------------------------------------


def _encode(arr: np.ndarray):
    return np.stack([arr.real, arr.imag], axis=-1).tolist()


def _decode(nested) -> np.ndarray:
    arr = np.asarray(nested, dtype=float)
    if arr.shape[-1] != 2:
        raise ValidationError("complex entries must be [re, im] pairs")
    return arr[..., 0] + 1j * arr[..., 1]


def measurement_to_dict(meas: MubFamily | EamFrame) -> dict:
    return {
        "dim": meas.dim_local,
        "kind": meas.kind,
        "vectors": _encode(meas.bases if isinstance(meas, MubFamily) else meas.vectors_),
    }


def measurement_from_dict(
    data: dict, tol: float | None = None, validate: bool = True
) -> MubFamily | EamFrame:
    """Decode a serialized family or frame, validating it unless ``validate`` is False."""
    try:
        d = int(data["dim"])
        kind = data["kind"]
        raw = data["vectors"]
    except (KeyError, TypeError, ValueError) as exc:
        raise ValidationError(f"measurement file missing field: {exc}") from exc
    try:
        vecs = _decode(raw)
    except ValueError as exc:
        raise ValidationError(f"malformed vector array: {exc}") from exc
    if not validate:
        if kind == "mub" and vecs.ndim == 3:
            return MubFamily(vecs.shape[-1], vecs)
        if kind == "eam" and vecs.ndim == 2:
            return EamFrame(vecs.shape[-1], vecs)
        raise ValidationError(f"cannot interpret vectors of shape {vecs.shape} as {kind!r}")
    if kind == "mub":
        fam = make_mub_family(vecs, ANALYTIC_TOL if tol is None else tol)
        if fam.dim_local != d:
            raise DimensionError(f"declared dim {d} but vectors have dimension {fam.dim_local}")
        return fam
    if kind == "eam":
        frame = make_eam_frame(vecs, SIC_TOL if tol is None else tol)
        if frame.dim_local != d:
            raise DimensionError(f"declared dim {d} but vectors have dimension {frame.dim_local}")
        return frame
    raise ValidationError(f"unknown measurement kind {kind!r}")


def load_measurement(path, tol: float | None = None, validate: bool = True) -> MubFamily | EamFrame:
    return measurement_from_dict(json.loads(Path(path).read_text()), tol, validate)


def save_measurement(meas: MubFamily | EamFrame, path) -> None:
    Path(path).write_text(json.dumps(measurement_to_dict(meas)))


def construct_measurement(
    kind: str,
    d: int,
    settings: int | None = None,
    variant: str = "standard",
    fiducial=None,
) -> MubFamily | EamFrame:
    """Build a family or frame from the internal constructions.

    MUBs: complete prime-dimension sets, or the computational + Fourier pair
    for any d. Frames: n = d (a basis), n = d+1 (drop-row Fourier frame,
    ``variant="dephasing"`` for its Fourier-rotated form) and n = d^2 (SIC
    from a bundled or supplied fiducial).
    """
    if d < 2:
        raise DimensionError("d must be >= 2")
    if kind == "mub":
        m = 2 if settings is None else settings
        if is_prime(d):
            return mub_full_prime(d, m)
        if m == 2:
            return mub_pair(d)
        raise UnsupportedDimensionError(
            f"no internal construction of {m} MUBs for non-prime d={d}; "
            "use m=2 (computational + Fourier) or supply validated bases as a JSON file"
        )
    if kind == "eam":
        n = d + 1 if settings is None else settings
        if n == d + 1:
            return eam_dephasing_tuned(d) if variant == "dephasing" else eam_fourier_drop_row(d)
        if n == d * d:
            return sic_from_fiducial(d, fiducial)
        if n == d:
            return EamFrame(d, computational_basis(d))
        raise UnsupportedDimensionError(
            f"no internal equiangular frame with n={n} in d={d}; supply vectors as a JSON file"
        )
    raise ValueError(f"unknown measurement kind {kind!r}")
