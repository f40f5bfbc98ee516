# Copyright (c) 2026, The treespark developers
#
# All rights reserved.
#
# See the file "LICENCE" for information about the copyright
# and warranty status of this software.

'''Dense symmetric eigen-decomposition, Laplacian pseudoinverse powers and
PSD-order certification.

Eigen-solving is LAPACK's symmetric driver through numpy.linalg.eigh, which
returns eigenvalues in nondecreasing order with an orthonormal basis.
'''

from dataclasses import dataclass

import numpy as np
from scipy.linalg import null_space

from treespark.lib.util import cachedproperty

DEFAULT_PSD_TOL = 1e-9
SYMMETRY_TOL = 1e-12
MACHINE_EPS = float(np.finfo(np.float64).eps)


class SpectralError(Exception):
    '''Base class of spectral errors.'''


class NotSymmetricError(SpectralError):
    '''A matrix that must be symmetric is not.'''


class NotPsdError(SpectralError):
    '''A matrix that must be positive semidefinite has a materially
    negative eigenvalue.'''


class DimensionError(SpectralError):
    '''Matrix dimensions do not agree.'''


def _square(A, what='matrix'):
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise DimensionError(f'{what} must be square, got shape {A.shape}')
    return A


def symmetrized(A, what='matrix'):
    '''Return (A + A^T)/2 after checking A is symmetric to 1e-12 relative.'''
    A = _square(A, what)
    scale = float(np.max(np.abs(A), initial=0.0))
    asymmetry = float(np.max(np.abs(A - A.T), initial=0.0))
    # The zero matrix has scale 0 and asymmetry 0, and passes.
    if asymmetry > SYMMETRY_TOL * scale:
        raise NotSymmetricError(f'{what} is not symmetric: max |A - A^T| = {asymmetry:.3e}')
    return (A + A.T) / 2


def default_rank_tol(n):
    return n * MACHINE_EPS


@dataclass(frozen=True)
class SpectralDecomposition:
    '''Eigenvalues (nondecreasing) and orthonormal eigenvectors (columns)
    of a symmetric matrix.  Eigenvalues with magnitude at most
    rank_tol * max|lambda| count as zero.'''
    eigenvalues: np.ndarray
    basis: np.ndarray
    rank_tol: float

    @property
    def n(self):
        return len(self.eigenvalues)

    @property
    def lambda_max(self):
        return float(self.eigenvalues[-1])

    @property
    def lambda_min(self):
        return float(self.eigenvalues[0])

    @property
    def cutoff(self):
        return self.rank_tol * float(np.max(np.abs(self.eigenvalues), initial=0.0))

    def rank(self):
        return int(np.sum(np.abs(self.eigenvalues) > self.cutoff))

    def reconstruct(self):
        return (self.basis * self.eigenvalues) @ self.basis.T

    def spectral_map(self, values):
        '''Q diag(values) Q^T for a replacement eigenvalue vector.'''
        return (self.basis * values) @ self.basis.T

    def check_psd(self):
        if self.lambda_min < -self.cutoff:
            raise NotPsdError(f'eigenvalue {self.lambda_min:.3e} is below '
                              f'-{self.cutoff:.3e}')


def eig_sym(A, rank_tol=None):
    '''Full eigen-decomposition of a symmetric matrix.'''
    A = symmetrized(A)
    eigenvalues, basis = np.linalg.eigh(A)
    if rank_tol is None:
        rank_tol = default_rank_tol(A.shape[0])
    return SpectralDecomposition(eigenvalues, basis, float(rank_tol))


def _inverse_power(dec, power):
    dec.check_psd()
    values = np.zeros(dec.n)
    keep = dec.eigenvalues > dec.cutoff
    values[keep] = dec.eigenvalues[keep] ** power
    return dec.spectral_map(values)


def pinv_sqrt(dec):
    '''(A^+)^{1/2}: eigenvalues at or below the cutoff map to zero, the
    rest to lambda^{-1/2}.'''
    return _inverse_power(dec, -0.5)


def pinv(dec):
    '''Moore-Penrose pseudoinverse of a PSD matrix from its decomposition.'''
    return _inverse_power(dec, -1.0)


def deflation_basis(n):
    '''Orthonormal basis (n x n-1) of the complement of the all-ones vector.'''
    return null_space(np.ones((1, n)))


class NormalizedFrame(object):
    '''Conjugation by (L_G^+)^{1/2} for the Laplacian of a connected graph.

    The all-ones direction is deflated explicitly: everything is computed in
    the (n-1)-dimensional complement of 1, where L_G is positive definite.
    In this frame L_G becomes the projection I - 11^T/n.
    '''

    def __init__(self, L_G, rank_tol=None):
        L_G = symmetrized(L_G, 'L_G')
        self.n = L_G.shape[0]
        self.rank_tol = default_rank_tol(self.n) if rank_tol is None else rank_tol
        self.deflation = deflation_basis(self.n)
        dec = eig_sym(self.deflation.T @ L_G @ self.deflation, self.rank_tol)
        dec.check_psd()
        if dec.rank() < dec.n:
            raise SpectralError('L_G has a null direction besides the all-ones vector')
        self.reduced_whitener = dec.spectral_map(dec.eigenvalues ** -0.5)
        self.lambda_max_G = dec.lambda_max

    @cachedproperty
    def whitener(self):
        '''(L_G^+)^{1/2} as an n x n matrix.'''
        return self.deflation @ self.reduced_whitener @ self.deflation.T

    def conjugate(self, L_H):
        '''(L_G^+)^{1/2} L_H (L_G^+)^{1/2} restricted to the range of L_G.'''
        L_H = _square(L_H, 'L_H')
        if L_H.shape[0] != self.n:
            raise DimensionError(f'L_H is {L_H.shape[0]}x{L_H.shape[0]}, frame is {self.n}')
        C = self.reduced_whitener @ (self.deflation.T @ L_H @ self.deflation) \
            @ self.reduced_whitener
        return (C + C.T) / 2

    def extremes(self, L_H):
        '''Return (lambda_min_pos, lambda_max) of the normalized pencil.

        A smallest eigenvalue within tolerance of zero is reported as 0: the
        average lost connectivity, which is a legitimate outcome.'''
        eigenvalues = np.linalg.eigvalsh(self.conjugate(L_H))
        lo, hi = float(eigenvalues[0]), float(eigenvalues[-1])
        if lo <= DEFAULT_PSD_TOL * max(hi, 1.0):
            lo = 0.0
        return lo, hi


def normalized_pencil(L_G, L_H, rank_tol=None):
    '''Extreme eigenvalues of (L_G^+)^{1/2} L_H (L_G^+)^{1/2} on range(L_G).

    (1-eps) L_G <= L_H <= (1+eps) L_G exactly when both lie in
    [1-eps, 1+eps].'''
    L_H = symmetrized(L_H, 'L_H')
    frame = NormalizedFrame(L_G, rank_tol)
    ones = np.ones(L_H.shape[0])
    scale = max(float(np.max(np.abs(L_H), initial=0.0)), 1.0)
    if L_H.shape[0] == frame.n and np.max(np.abs(L_H @ ones)) > 1e-9 * scale * frame.n:
        raise SpectralError('L_H does not annihilate the all-ones vector')
    return frame.extremes(L_H)


@dataclass(frozen=True)
class PsdOrderVerdict:
    holds: bool
    witness_gap: float
    tol: float


def _norm2(A):
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvalsh(A))))


def psd_leq(A, B, tol=DEFAULT_PSD_TOL):
    '''Decide A <= B in the PSD order.

    The witness gap is the smallest eigenvalue of B - A on the complement of
    the null space shared by A and B; the order holds when the gap is at
    least -tol times the larger operator norm (and at least -tol).'''
    A = symmetrized(A, 'A')
    B = symmetrized(B, 'B')
    if A.shape != B.shape:
        raise DimensionError(f'A is {A.shape}, B is {B.shape}')
    shared = null_space(np.vstack((A, B)))
    if shared.shape[1] == 0:
        complement = np.eye(A.shape[0])
    else:
        complement = null_space(shared.T)
    if complement.shape[1] == 0:
        gap = 0.0
    else:
        D = complement.T @ (B - A) @ complement
        gap = float(np.linalg.eigvalsh((D + D.T) / 2)[0])
    scale = max(_norm2(A), _norm2(B), 1.0)
    return PsdOrderVerdict(gap >= -tol * scale, gap, tol)


def symmetric_triangle_verdict(A, B, tol=DEFAULT_PSD_TOL):
    '''Verdict for (A - B)^2 <= 2A^2 + 2B^2.'''
    A = symmetrized(A, 'A')
    B = symmetrized(B, 'B')
    D = A - B
    return psd_leq(D @ D, 2 * (A @ A) + 2 * (B @ B), tol)


def check_symmetric_triangle(A, B, tol=DEFAULT_PSD_TOL):
    '''Property oracle: (A - B)^2 <= 2A^2 + 2B^2 for symmetric A, B.'''
    return symmetric_triangle_verdict(A, B, tol).holds
