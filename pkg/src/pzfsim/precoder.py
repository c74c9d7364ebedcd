"""BS activation rule and partial zero-forcing beamformers."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

RANK_TOL = 1e-10
COLLAPSE_TOL = 1e-10


class ProjectionCollapse(ArithmeticError):
    """The target channel lies (numerically) inside the span being nulled."""


def activation_flag(n_nulled: int, served_inside: bool, L: int) -> bool:
    """Whether a BS transmits.

    With all served mobiles inside the nulling disk the union of the two sets
    is just the disk set, so the rule reads ``n < L or (n <= L and inside)``.
    """
    return n_nulled < L or (served_inside and n_nulled <= L)


def orthonormal_span(vectors: np.ndarray, tol: float = RANK_TOL) -> np.ndarray:
    """Orthonormal basis (L, r) for the column span of ``vectors`` (L, n).

    Column-pivoted QR; columns whose pivot falls below ``tol`` times the
    largest pivot are treated as dependent.
    """
    L, n = vectors.shape
    if n == 0:
        return np.zeros((L, 0), dtype=complex)
    q, r, _ = scipy.linalg.qr(vectors, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.sum(diag > tol * diag[0])) if diag[0] > 0 else 0
    return q[:, :rank]


def zf_weight(target: np.ndarray, interference: np.ndarray | None = None) -> np.ndarray:
    """Unit vector maximizing |target^H w| subject to w being orthogonal to
    every column of ``interference`` (shape (L, n), n <= L - 1)."""
    target = np.asarray(target, dtype=complex)
    L = target.shape[0]
    if interference is None:
        interference = np.zeros((L, 0), dtype=complex)
    interference = np.asarray(interference, dtype=complex).reshape(L, -1)
    if interference.shape[1] > L - 1:
        raise ValueError(f"cannot null {interference.shape[1]} directions with {L} antennas")
    basis = orthonormal_span(interference)
    qg = target - basis @ (basis.conj().T @ target)
    nrm = np.linalg.norm(qg)
    if nrm <= COLLAPSE_TOL * np.linalg.norm(target):
        raise ProjectionCollapse("target vector lies in the nulled subspace")
    return qg / nrm


@dataclass
class PrecoderSet:
    """Activation flags and unit beamformers.

    ``weights[k]`` is an (L, M) array whose m-th column serves mobile
    ``k*M + m``; inactive BSs have no entry.
    """

    active: np.ndarray
    weights: dict = field(default_factory=dict)

    def weight(self, k: int, i: int, M: int) -> np.ndarray:
        return self.weights[k][:, i - k * M]


def bs_precoders(fading: np.ndarray, served: np.ndarray, nulled: np.ndarray, L: int):
    """Beamformers of one BS from its fading rows.

    ``fading`` maps mobile id -> row (any indexable with shape (., L)).
    Returns None when the BS is inactive.
    """
    nulled = np.asarray(nulled)
    served_inside = bool(np.isin(served, nulled).all())
    if not activation_flag(len(nulled), served_inside, L):
        return None
    G = fading[nulled].T  # (L, n)
    W = np.empty((L, len(served)), dtype=complex)
    for col, i in enumerate(served):
        others = G[:, nulled != i]
        W[:, col] = zf_weight(fading[i], others)
    return W


def build_precoders(net, L: int, fading_for_bs) -> PrecoderSet:
    """Evaluate activation and beamformers for every BS of ``net``.

    ``fading_for_bs(k)`` returns the (n_mobiles, L) fading block of BS k.
    """
    active = np.zeros(net.n_bs, dtype=bool)
    weights = {}
    for k in range(net.n_bs):
        W = bs_precoders(fading_for_bs(k), net.served_set(k), net.nulled_sets[k], L)
        if W is not None:
            active[k] = True
            weights[k] = W
    return PrecoderSet(active=active, weights=weights)
