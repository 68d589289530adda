"""
Uniform-grid discretization of H = -d^2/dx^2 + V with Dirichlet ends, and the
tridiagonal eigensolvers used on it.

Real operators go to LAPACK's symmetric tridiagonal routines (stemr for the
eigenvalues, stebz/stein bisection + inverse iteration for the bound
eigenvectors). Complex symmetric operators are located by a dense balanced
Hessenberg QR on a coarsened copy of the matrix and polished on the full grid
by inverse iteration with a bilinear Rayleigh-quotient shift.
"""

import logging
import math
import numbers
from dataclasses import dataclass, field
from multiprocessing.pool import ThreadPool
from typing import Optional

import numpy as np
import scipy.linalg

from ptsusy.errors import ParameterError, SolverError

log = logging.getLogger(__name__)

# largest matrix handed to the dense QR when seeding the complex solver
COARSE_LIMIT = 801
BOUND_MARGIN = 10.0
MAX_POLISH_STEPS = 60
SEED = 20000101


@dataclass(frozen=True)
class Grid:
    """
    n_points nodes on [-half_width, half_width]; n_points is odd so x = 0 is a
    node.
    """

    half_width: float
    n_points: int

    @property
    def spacing(self):
        return 2.0 * self.half_width / (self.n_points - 1)

    @property
    def nodes(self):
        m = (self.n_points - 1) // 2
        # h*(i - m) is exactly antisymmetric about the middle node
        return self.spacing * np.arange(-m, m + 1, dtype=float)

    def halved(self):
        """
        Same interval, spacing h/2.
        """
        return Grid(self.half_width, 2 * self.n_points - 1)


@dataclass(frozen=True)
class TridiagonalOperator:
    """
    Symmetric tridiagonal matrix: complex diagonal 2/h^2 + V(x_i), constant
    off-diagonal -1/h^2.
    """

    diagonal: np.ndarray
    off_diagonal: float
    grid: Grid
    is_real: bool

    @property
    def potential(self):
        return self.diagonal - 2.0 / self.grid.spacing ** 2

    @property
    def bound_norm(self):
        """
        Upper bound of the 2-norm (Gershgorin).
        """
        return float(np.max(np.abs(self.diagonal))) + 2.0 * abs(self.off_diagonal)

    def dense(self):
        n = self.grid.n_points
        return (np.diag(self.diagonal)
                + np.diag(np.full(n - 1, self.off_diagonal), 1)
                + np.diag(np.full(n - 1, self.off_diagonal), -1))


@dataclass(frozen=True)
class SampledWavefunction:
    """
    Values on the grid nodes; the function is taken as 0 outside the grid.

    origin is "closed-form" for samples of an analytic function and "solver"
    for computed eigenvectors.
    """

    grid: Grid
    values: np.ndarray
    origin: str = "closed-form"


@dataclass(frozen=True)
class SpectrumEntry:
    energy: complex
    residual: Optional[float]
    bound: bool
    vector: Optional[np.ndarray] = field(default=None, repr=False, compare=False)


@dataclass(frozen=True)
class Spectrum:
    """
    Entries sorted by real part, ties by imaginary part.
    """

    entries: tuple
    continuum_edge: float
    grid: Optional[Grid] = None

    @property
    def bound(self):
        return [e for e in self.entries if e.bound]

    @property
    def bound_energies(self):
        return [e.energy for e in self.entries if e.bound]

    def wavefunction(self, index):
        """
        Eigenvector of the index-th bound entry as a SampledWavefunction.
        """
        entry = self.bound[index]
        if entry.vector is None or self.grid is None:
            raise SolverError("no eigenvector stored for bound state {}".format(index), index)
        return SampledWavefunction(self.grid, entry.vector, origin="solver")


def make_grid(half_width, n_points):
    if not (isinstance(half_width, numbers.Real) and math.isfinite(half_width) and half_width > 0):
        raise ParameterError("half_width must be a positive number, got {!r}".format(half_width))
    if (not isinstance(n_points, numbers.Integral)) or n_points < 3 or n_points % 2 == 0:
        raise ParameterError("n_points must be an odd integer >= 3, got {!r}".format(n_points))
    return Grid(float(half_width), int(n_points))


def default_grid(mu, n_points=4001):
    return make_grid(16.0 / abs(mu), n_points)


def assemble(grid, V):
    """
    Three-point Laplacian plus diagonal potential.
    """
    h = grid.spacing
    samples = np.asarray(V(grid.nodes), dtype=complex)
    if samples.shape != (grid.n_points,):
        samples = np.broadcast_to(samples, (grid.n_points,)).astype(complex)
    if not np.all(np.isfinite(samples)):
        bad = int(np.flatnonzero(~np.isfinite(samples))[0])
        raise ParameterError("potential is not finite at x = {:.6g}".format(grid.nodes[bad]))
    return TridiagonalOperator(diagonal=2.0 / h ** 2 + samples,
                               off_diagonal=-1.0 / h ** 2,
                               grid=grid,
                               is_real=not np.any(samples.imag != 0.0))


def bound_margin(grid, continuum_edge):
    return BOUND_MARGIN * grid.spacing ** 2 * max(1.0, abs(continuum_edge))


def _matvec(diagonal, off, x):
    y = diagonal * x
    y[1:] += off * x[:-1]
    y[:-1] += off * x[1:]
    return y


def _check_grids(u, v):
    if u.grid != v.grid:
        raise ParameterError("grid mismatch: {} vs {}".format(u.grid, v.grid))


def apply(op, psi):
    """
    H psi with Dirichlet ends.
    """
    if op.grid != psi.grid:
        raise ParameterError("grid mismatch: {} vs {}".format(op.grid, psi.grid))
    values = np.asarray(psi.values, dtype=complex)
    return SampledWavefunction(op.grid, _matvec(op.diagonal, op.off_diagonal, values), psi.origin)


def inner(u, v, form="hermitian"):
    """
    Trapezoidal integral of conj(u) v ('hermitian') or u v ('bilinear').
    Dirichlet ends make the trapezoid weights all equal to h.
    """
    _check_grids(u, v)
    uu = np.asarray(u.values, dtype=complex)
    if form == "hermitian":
        uu = np.conj(uu)
    elif form != "bilinear":
        raise ParameterError("unknown form {!r}".format(form))
    return complex(u.grid.spacing * np.sum(uu * np.asarray(v.values, dtype=complex)))


def norm(psi):
    return math.sqrt(max(inner(psi, psi).real, 0.0))


def sample(grid, func):
    return SampledWavefunction(grid, np.asarray(func(grid.nodes), dtype=complex) + 0j)


def normalize_sampled(psi):
    n = norm(psi)
    if n == 0.0:
        return psi
    return SampledWavefunction(psi.grid, psi.values / n, psi.origin)


def derivative(psi):
    """
    Fourth-order central difference, zeros beyond the ends.
    """
    f = np.concatenate([np.zeros(2), np.asarray(psi.values, dtype=complex), np.zeros(2)])
    h = psi.grid.spacing
    d = (-f[4:] + 8.0 * f[3:-1] - 8.0 * f[1:-3] + f[:-4]) / (12.0 * h)
    return SampledWavefunction(psi.grid, d, psi.origin)


def residual(op, psi, energy, rows="all"):
    """
    ||H psi - E psi|| / ||psi||. rows="interior" drops the two boundary rows,
    which is what a closed-form function that does not vanish at +-L needs.
    """
    r = apply(op, psi).values - energy * np.asarray(psi.values, dtype=complex)
    v = np.asarray(psi.values, dtype=complex)
    if rows == "interior":
        r, v = r[1:-1], v[1:-1]
    denominator = np.linalg.norm(v)
    if denominator == 0.0:
        return 0.0
    return float(np.linalg.norm(r) / denominator)


def rayleigh_quotient(op, psi):
    """
    Bilinear Rayleigh quotient psi^T H psi / psi^T psi, stationary at the
    eigenvectors of a complex symmetric operator.
    """
    hpsi = apply(op, psi)
    return inner(psi, hpsi, "bilinear") / inner(psi, psi, "bilinear")


def refine(E_h, E_h2):
    """
    Richardson extrapolation for the O(h^2) stencil.
    """
    return (4.0 * E_h2 - E_h) / 3.0


def _sort_key(e):
    return (round(e.real, 12), e.imag)


def eigen_real(op, continuum_edge=math.inf, margin=None, vectors=True):
    """
    All eigenvalues of a real operator, ascending. Eigenvectors and residuals
    are filled for the bound states (Re E < continuum_edge - margin).
    """
    if not op.is_real:
        raise ParameterError("eigen_real needs a real operator")
    d = op.diagonal.real.copy()
    e = np.full(op.grid.n_points - 1, op.off_diagonal)
    try:
        # sterf keeps O(n) memory; stemr's wrapper allocates an n x n workspace
        w = scipy.linalg.eigh_tridiagonal(d, e, eigvals_only=True, lapack_driver="sterf")
    except np.linalg.LinAlgError as err:
        raise SolverError("symmetric tridiagonal QL/QR did not converge: {}".format(err)) from err

    if margin is None:
        margin = bound_margin(op.grid, continuum_edge) if math.isfinite(continuum_edge) else 0.0
    limit = continuum_edge - margin
    count = int(np.count_nonzero(w < limit))

    vecs = None
    if vectors and count:
        try:
            wb, vecs = scipy.linalg.eigh_tridiagonal(d, e, select="i", select_range=(0, count - 1),
                                                     lapack_driver="stebz")
        except np.linalg.LinAlgError as err:
            raise SolverError("inverse iteration failed: {}".format(err)) from err
        # keep the bisection values, they belong to the vectors
        w = w.copy()
        w[:count] = wb

    entries = []
    for i, value in enumerate(w):
        res = None
        vec = None
        if vecs is not None and i < count:
            vec = vecs[:, i].astype(complex)
            r = _matvec(op.diagonal, op.off_diagonal, vec) - value * vec
            res = float(np.linalg.norm(r) / np.linalg.norm(vec))
        entries.append(SpectrumEntry(complex(value), res, i < count, vec))
    log.debug("[*] real solve n={} found {} bound states".format(op.grid.n_points, count))
    return Spectrum(tuple(entries), continuum_edge, op.grid)


def _coarse_seeds(op):
    """
    Eigenvalues of the operator restricted to every k-th node, by LAPACK's
    balanced Hessenberg QR (the matrix is already Hessenberg).
    """
    n = op.grid.n_points
    stride = max(1, math.ceil((n - 1) / (COARSE_LIMIT - 1)))
    if stride == 1:
        matrix = op.dense()
        h = op.grid.spacing
    else:
        index = np.arange(0, n, stride)
        h = op.grid.spacing * stride
        potential = op.potential[index]
        m = len(index)
        matrix = (np.diag(potential + 2.0 / h ** 2)
                  + np.diag(np.full(m - 1, -1.0 / h ** 2), 1)
                  + np.diag(np.full(m - 1, -1.0 / h ** 2), -1))
    try:
        seeds = np.linalg.eigvals(matrix)
    except np.linalg.LinAlgError as err:
        raise SolverError("Hessenberg QR did not converge: {}".format(err)) from err
    return seeds, h


def _shifted_solve(band, diagonal, sigma, x, scale):
    band[1] = diagonal - sigma
    try:
        return scipy.linalg.solve_banded((1, 1), band, x, check_finite=False)
    except np.linalg.LinAlgError:
        # sigma is an eigenvalue to working precision: nudge it off
        band[1] = diagonal - (sigma + 1e-13 * scale)
        return scipy.linalg.solve_banded((1, 1), band, x, check_finite=False)


def _polish(op, shift, start, index):
    """
    Inverse iteration from 'shift'; after two fixed-shift steps the shift
    follows the bilinear Rayleigh quotient.
    """
    n = op.grid.n_points
    off = op.off_diagonal
    scale = op.bound_norm
    band = np.zeros((3, n), dtype=complex)
    band[0, 1:] = off
    band[2, :-1] = off
    x = start / np.linalg.norm(start)
    sigma = complex(shift)
    r = math.inf
    for step in range(MAX_POLISH_STEPS):
        try:
            y = _shifted_solve(band, op.diagonal, sigma, x, scale)
        except np.linalg.LinAlgError as err:
            raise SolverError("shifted solve failed for seed {}: {}".format(index, err), index) from err
        x = y / np.linalg.norm(y)
        hx = _matvec(op.diagonal, off, x)
        if step >= 2:
            sigma = complex(np.sum(x * hx) / np.sum(x * x))
        r = np.linalg.norm(hx - sigma * x)
        if step >= 2 and r <= 1e-13 * scale:
            break
    if r > 1e-9 * scale:
        raise SolverError("inverse iteration did not converge for seed {} (residual {:.3g})"
                          .format(index, r), index)
    hx = _matvec(op.diagonal, off, x)
    sigma = complex(np.sum(x * hx) / np.sum(x * x))
    return sigma, x, float(np.linalg.norm(hx - sigma * x))


def eigen_complex(op, search_window=None, continuum_edge=math.inf, margin=None):
    """
    Eigenvalues with real part inside search_window = (lo, hi), with
    eigenvectors and residuals. The default window runs from the Gershgorin
    lower bound up to continuum_edge - margin.
    """
    if margin is None:
        margin = bound_margin(op.grid, continuum_edge) if math.isfinite(continuum_edge) else 0.0
    lowest = float(np.min(op.diagonal.real)) - 2.0 * abs(op.off_diagonal)
    hi = continuum_edge - margin if search_window is None else search_window[1]

    seeds, coarse_h = _coarse_seeds(op)
    # slack for the coarse-grid discretization error of the seeds
    slack = max(1e-2, BOUND_MARGIN * coarse_h ** 2 * max(1.0, abs(hi)))
    # polished values may round just below the Gershgorin bound
    lo = lowest - slack if search_window is None else search_window[0]
    seeds = sorted((s for s in seeds if lo - slack <= s.real <= hi + slack), key=_sort_key)

    rng = np.random.default_rng(SEED)
    start = rng.standard_normal(op.grid.n_points) + 0j
    found = []
    for i, s in enumerate(seeds):
        # deflate the start vector against the eigenvectors already found
        x0 = start.copy()
        for _, v, _ in found:
            x0 -= (np.sum(v * x0) / np.sum(v * v)) * v
        energy, vec, res = _polish(op, s, x0, i)
        if not lo <= energy.real <= hi:
            continue
        duplicate = [j for j, (e, _, _) in enumerate(found) if abs(e - energy) <= 1e-8 * max(1.0, abs(energy))]
        if duplicate:
            log.debug("[-] seed {} converged onto E = {:.10g} again".format(i, energy))
            continue
        found.append((energy, vec, res))

    found.sort(key=lambda item: _sort_key(item[0]))
    entries = tuple(SpectrumEntry(e, res, e.real < continuum_edge - margin, v) for e, v, res in found)
    log.debug("[*] complex solve n={} window ({:.4g}, {:.4g}) found {} eigenvalues"
              .format(op.grid.n_points, lo, hi, len(entries)))
    return Spectrum(entries, continuum_edge, op.grid)


def solve(op, continuum_edge, hermitian=None, margin=None):
    """
    Bound spectrum with the solver matching the operator.
    """
    if hermitian is None:
        hermitian = op.is_real
    if hermitian:
        return eigen_real(op, continuum_edge, margin)
    return eigen_complex(op, continuum_edge=continuum_edge, margin=margin)


def solve_refined(potential, grid, continuum_edge, hermitian=None, refine_pass=True):
    """
    Bound spectrum on 'grid' and its h/2 refinement, energies combined by
    Richardson extrapolation. Vectors and residuals come from the fine grid.
    """
    op = assemble(grid, potential)
    margin = bound_margin(grid, continuum_edge)
    if not refine_pass:
        spectrum = solve(op, continuum_edge, hermitian, margin)
        return Spectrum(tuple(spectrum.bound), continuum_edge, grid)

    fine_op = assemble(grid.halved(), potential)
    with ThreadPool(2) as pool:
        coarse, fine = pool.map(lambda o: solve(o, continuum_edge, hermitian, margin), [op, fine_op])
    if len(coarse.bound) != len(fine.bound):
        raise SolverError("bound-state count differs between h and h/2 ({} vs {})"
                          .format(len(coarse.bound), len(fine.bound)))
    entries = tuple(SpectrumEntry(refine(c.energy, f.energy), f.residual, True, f.vector)
                    for c, f in zip(coarse.bound, fine.bound))
    return Spectrum(entries, continuum_edge, fine_op.grid)
