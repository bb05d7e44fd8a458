"""Dense multilinear algebra at a point.

Symmetric 2-tensors are ``(..., n, n)`` arrays and covariant 4-tensors are
``(..., n, n, n, n)`` arrays; leading axes are batch axes.  The
Kulkarni-Nomizu product is normalised so that for a unit vector ``T`` and a
unit ``X`` orthogonal to it, ``(g ⍉ T♭⊗T♭)(X, T, T, X) = 1`` and
``(½ g ⍉ g)(X, T, T, X) = 1``; a space form of curvature ``k`` then has
``Rm = ½ k g ⍉ g``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch


def _check_square(A: np.ndarray, name: str) -> None:
    if A.ndim < 2 or A.shape[-1] != A.shape[-2]:
        raise DimensionMismatch(f"{name} must be square, got shape {A.shape}")


def symmetrize(A) -> np.ndarray:
    A = np.asarray(A, dtype=float)
    return 0.5 * (A + np.swapaxes(A, -1, -2))


def kn_product(A, B) -> np.ndarray:
    """Kulkarni-Nomizu product of two symmetric 2-tensors.

    (A ⍉ B)(x,y,z,w) = A(x,w)B(y,z) + A(y,z)B(x,w) - A(x,z)B(y,w) - A(y,w)B(x,z)
    """
    A = np.asarray(A, dtype=float)
    B = np.asarray(B, dtype=float)
    _check_square(A, "A")
    _check_square(B, "B")
    if A.shape[-1] != B.shape[-1]:
        raise DimensionMismatch(f"dimensions differ: {A.shape[-1]} vs {B.shape[-1]}")
    t1 = np.einsum("...xw,...yz->...xyzw", A, B)
    t2 = np.einsum("...yz,...xw->...xyzw", A, B)
    t3 = np.einsum("...xz,...yw->...xyzw", A, B)
    t4 = np.einsum("...yw,...xz->...xyzw", A, B)
    return (t1 + t2) - (t3 + t4)


def outer(u, v) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    v = np.asarray(v, dtype=float)
    return u[..., :, None] * v[..., None, :]


def lower(g, v) -> np.ndarray:
    """Index lowering: v♭_i = g_ij v^j."""
    return np.einsum("...ij,...j->...i", g, v)


def raise_index(g_inv, w) -> np.ndarray:
    return np.einsum("...ij,...j->...i", g_inv, w)


def inner(g, u, v) -> np.ndarray:
    return np.einsum("...ij,...i,...j->...", g, u, v)


def trace_with_metric(R, g_inv, slots: tuple[int, int] = (0, 3)) -> np.ndarray:
    """Contract two slots of a 4-tensor with the inverse metric.

    With the default slots this is the Ricci tensor,
    Ric(Y, Z) = Σ g^{ab} R(∂_a, Y, Z, ∂_b).  The remaining two slots keep
    their relative order.
    """
    R = np.asarray(R, dtype=float)
    g_inv = np.asarray(g_inv, dtype=float)
    _check_square(g_inv, "g_inv")
    n = g_inv.shape[-1]
    if R.ndim < 4 or R.shape[-4:] != (n, n, n, n):
        raise DimensionMismatch(f"4-tensor of shape {R.shape} does not match dimension {n}")
    a, b = slots
    if a == b or not (0 <= a < 4 and 0 <= b < 4):
        raise ValueError(f"bad slot pair {slots}")
    letters = ["p", "q", "r", "s"]
    letters[a], letters[b] = "a", "b"
    rest = "".join(ch for ch in letters if ch not in "ab")
    return np.einsum(f"...{''.join(letters)},...ab->...{rest}", R, g_inv)


def evaluate4(R, x, y, z, w) -> np.ndarray:
    """R(x, y, z, w) for vectors given by their components."""
    return np.einsum("...abcd,...a,...b,...c,...d->...", R, x, y, z, w)


def frame_components(R, frame) -> np.ndarray:
    """Components of a 4-tensor in a frame (``frame[..., i, :]`` is the i-th vector)."""
    return np.einsum("...abcd,...ia,...jb,...kc,...ld->...ijkl", R, frame, frame, frame, frame)


def bilinear_components(A, frame) -> np.ndarray:
    return np.einsum("...ab,...ia,...jb->...ij", A, frame, frame)


@dataclass(frozen=True)
class SymmetryReport:
    """Largest violation of each algebraic curvature symmetry."""

    antisymmetry: float
    pair_symmetry: float
    bianchi: float
    scale: float
    tol: float

    @property
    def passed(self) -> bool:
        bound = self.tol * (1.0 + self.scale)
        return max(self.antisymmetry, self.pair_symmetry, self.bianchi) < bound


def check_riemann_symmetries(R, tol: float = 1e-10) -> SymmetryReport:
    R = np.asarray(R, dtype=float)
    if R.size == 0:
        return SymmetryReport(0.0, 0.0, 0.0, 0.0, tol)
    anti = max(
        np.max(np.abs(R + np.swapaxes(R, -4, -3))),
        np.max(np.abs(R + np.swapaxes(R, -2, -1))),
    )
    pair = np.max(np.abs(R - np.moveaxis(R, (-4, -3), (-2, -1))))
    # R_abcd + R_bcad + R_cabd
    cyc1 = np.einsum("...bcad->...abcd", R)
    cyc2 = np.einsum("...cabd->...abcd", R)
    bianchi = np.max(np.abs(R + cyc1 + cyc2))
    return SymmetryReport(float(anti), float(pair), float(bianchi), float(np.max(np.abs(R))), tol)


def max_abs(*arrays) -> float:
    return max((float(np.max(np.abs(a))) if np.size(a) else 0.0) for a in arrays)


def scaled_residual(diff, *terms) -> float:
    """Max-norm of ``diff`` over ``1 + max |term|``."""
    return max_abs(diff) / (1.0 + max_abs(*terms)) if terms else max_abs(diff)
