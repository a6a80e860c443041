"""Markovian open-system dynamics on the central A ⊗ B factors.

The generator is the usual GKSL form

    L(rho) = -i[H, rho] + sum_k ( L_k rho L_k† - {L_k† L_k, rho} / 2 )

with H and the jump operators acting on A ⊗ B and embedded as
I_a ⊗ (·) ⊗ I_b on the full space.  Integration is fixed-step RK4 with no
renormalization; drift in the trace or spectrum is reported, never hidden.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linalg import ShapeError, as_matrix, dag, hermitize, tensor
from .states import DensityMatrix, DimensionSignature, matrix_from_json, matrix_to_json

__all__ = [
    "IntegrationError",
    "LindbladGenerator",
    "embed_ab",
    "apply_generator",
    "evolve",
    "convergence_order",
    "generator_to_json",
    "generator_from_json",
]

# post-integration sanity thresholds on trace and positivity drift
DRIFT_TOL = 1e-8


class IntegrationError(RuntimeError):
    """Integrator drifted out of tolerance.  Carries a step-count suggestion."""

    def __init__(self, msg: str, drift: float, suggested_steps: int):
        super().__init__(msg)
        self.drift = drift
        self.suggested_steps = suggested_steps


def embed_ab(op: np.ndarray, dims: DimensionSignature) -> np.ndarray:
    """Lift an operator on A ⊗ B to I_a ⊗ op ⊗ I_b on the full space."""
    op = as_matrix(op, name="A⊗B operator")
    ab = dims.d_A * dims.d_B
    if op.shape[0] != ab:
        raise ShapeError(f"operator dim {op.shape[0]} does not match d_A*d_B = {ab}")
    return tensor(np.eye(dims.d_a), op, np.eye(dims.d_b))


@dataclass(frozen=True, eq=False)
class LindbladGenerator:
    """GKSL generator with H and jump operators given on the A ⊗ B factors.

    Embedded full-space copies are built once at construction; ``hamiltonian``
    may be None for purely dissipative dynamics, and an empty ``lindblad_ops``
    tuple gives closed (unitary) dynamics.
    """

    dims: DimensionSignature
    hamiltonian: np.ndarray | None = None
    lindblad_ops: tuple[np.ndarray, ...] = ()
    h_full: np.ndarray = field(init=False, repr=False)
    ls_full: tuple[np.ndarray, ...] = field(init=False, repr=False)

    def __post_init__(self):
        h = self.hamiltonian
        if h is not None:
            h = as_matrix(h, name="hamiltonian")
            herm = float(np.abs(h - dag(h)).max())
            if herm > 1e-12:
                raise ValueError(f"hamiltonian not Hermitian: max |H - H†| = {herm:.3e}")
        ls = tuple(as_matrix(l, name="lindblad op") for l in self.lindblad_ops)
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "lindblad_ops", ls)
        full = self.dims.total
        h_full = np.zeros((full, full), dtype=complex) if h is None else embed_ab(h, self.dims)
        object.__setattr__(self, "h_full", h_full)
        object.__setattr__(self, "ls_full", tuple(embed_ab(l, self.dims) for l in ls))


def apply_generator(gen: LindbladGenerator, rho: np.ndarray) -> np.ndarray:
    out = -1j * (gen.h_full @ rho - rho @ gen.h_full)
    for l in gen.ls_full:
        ld = dag(l)
        ldl = ld @ l
        out += l @ rho @ ld - 0.5 * (ldl @ rho + rho @ ldl)
    return out


def _integrate(gen: LindbladGenerator, rho: np.ndarray, t: float, steps: int) -> np.ndarray:
    h = t / steps
    for _ in range(steps):
        k1 = apply_generator(gen, rho)
        k2 = apply_generator(gen, rho + 0.5 * h * k1)
        k3 = apply_generator(gen, rho + 0.5 * h * k2)
        k4 = apply_generator(gen, rho + h * k3)
        rho = rho + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    return rho


def evolve(gen: LindbladGenerator, rho0: DensityMatrix, t: float, steps: int = 1000) -> DensityMatrix:
    """Integrate for time ``t`` with fixed-step RK4.

    Raises IntegrationError (with a suggested step count scaled by the
    fourth root of the overshoot) if trace or positivity drift exceeds 1e-8.
    """
    if gen.dims != rho0.dims:
        raise ShapeError("generator and state live on different spaces")
    if t < 0:
        raise ValueError(f"t must be >= 0, got {t}")
    if steps < 1:
        raise ValueError(f"steps must be >= 1, got {steps}")
    if t == 0:
        return rho0
    out = _integrate(gen, rho0.matrix, t, steps)
    trace_drift = abs(float(np.real(out.trace())) - 1.0) + abs(float(np.imag(out.trace())))
    min_eig = float(np.linalg.eigvalsh(hermitize(out)).min())
    drift = max(trace_drift, -min_eig, 0.0)
    if drift > DRIFT_TOL:
        grow = (drift / DRIFT_TOL) ** 0.25
        suggested = max(2 * steps, int(math.ceil(steps * grow)))
        raise IntegrationError(
            f"drift {drift:.3e} exceeds {DRIFT_TOL}; retry with more steps",
            drift=drift,
            suggested_steps=suggested,
        )
    return DensityMatrix(rho0.dims, out, trace_tol=DRIFT_TOL, psd_tol=DRIFT_TOL)


def convergence_order(gen: LindbladGenerator, rho0: DensityMatrix, t: float, steps: int) -> float | None:
    """Empirical order from errors at ``steps`` and ``2*steps`` against a
    reference at ``16*steps``.  Returns None when the errors are too close to
    roundoff to resolve a slope."""
    if t <= 0:
        raise ValueError(f"t must be > 0, got {t}")
    ref = _integrate(gen, rho0.matrix, t, 16 * steps)
    e1 = float(np.linalg.norm(_integrate(gen, rho0.matrix, t, steps) - ref))
    e2 = float(np.linalg.norm(_integrate(gen, rho0.matrix, t, 2 * steps) - ref))
    if e1 < 1e-13 or e2 < 1e-14:
        return None
    return math.log2(e1 / e2)


def generator_to_json(gen: LindbladGenerator) -> dict:
    """Schema: {"dims": [...], "H": {re, im} | null, "Ls": [{re, im}, ...]}."""
    return {
        "dims": list(gen.dims.factors()),
        "H": None if gen.hamiltonian is None else matrix_to_json(gen.hamiltonian),
        "Ls": [matrix_to_json(l) for l in gen.lindblad_ops],
    }


def generator_from_json(obj) -> LindbladGenerator:
    if not isinstance(obj, dict) or "dims" not in obj:
        raise ValueError("generator object must have a 'dims' field")
    dims = obj["dims"]
    if not (isinstance(dims, list) and len(dims) == 4):
        raise ValueError(f"dims must be a list of four factors, got {dims!r}")
    sig = DimensionSignature(*(int(d) for d in dims))
    h = obj.get("H")
    ls = obj.get("Ls", [])
    if not isinstance(ls, list):
        raise ValueError("'Ls' must be a list")
    return LindbladGenerator(
        sig,
        None if h is None else matrix_from_json(h),
        tuple(matrix_from_json(l) for l in ls),
    )
