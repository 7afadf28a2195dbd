"""Green-kernel machinery for the linearized problem on J.

The linearized equation -U'' - U = f with U vanishing at both ends of J
is solvable exactly when the forcing is orthogonal to the cosine mode,
int_J f(y) cos y dy = 0.  Writing U(x) = v(x) cos x, the bounded envelope
v admits the split integral representation

    v(x) = v(-pi/2) + int_{-pi/2}^{x} f sin y dy
                    + (sin x / cos x) int_{x}^{pi/2} f cos y dy,

which this module evaluates on the grid.  The ratio sin x / cos x is
0/0-compensated at the interval ends; there the limit values are used
instead (left: v(-pi/2), right: v(-pi/2) + int_J f sin y dy).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument, SolvabilityError
from .quadrature import (
    HALF_PI,
    Grid,
    GridFunction,
    integrate,
    integrate_samples,
    running_integral,
    simpson_weights,
    trig_tables,
)

# nodes this close to +-pi/2 take the limit formula instead of sin/cos
ENDPOINT_COS_CUTOFF = 1e-8

# default absolute solvability tolerance, scaled by sup|f|
TOL_SOLV = 1e-10


def green_kernel(x, y):
    """Two-branch kernel: cos x sin y for y <= x, sin x cos y for y >= x.

    Both branches agree on the diagonal and |g| <= 1 on J x J.
    Accepts scalars or arrays (broadcast)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    slack = 1e-12
    if np.any(np.abs(x) > HALF_PI + slack) or np.any(np.abs(y) > HALF_PI + slack):
        raise InvalidArgument("green_kernel arguments must lie in [-pi/2, pi/2]")
    val = np.where(y <= x, np.cos(x) * np.sin(y), np.sin(x) * np.cos(y))
    if val.ndim == 0:
        return float(val)
    return val


@dataclass(frozen=True)
class KernelPoint:
    """One kernel sample with its arguments attached."""

    x: float
    y: float
    value: float

    def __post_init__(self):
        expect = green_kernel(self.x, self.y)
        if abs(self.value - expect) > 1e-12:
            raise InvalidArgument("value is not the kernel value at (x, y)")

    @classmethod
    def at(cls, x: float, y: float) -> "KernelPoint":
        return cls(x=float(x), y=float(y), value=green_kernel(x, y))


def solvability_residual(f: GridFunction) -> complex:
    """int_J f(y) cos y dy.  Zero (within tolerance) marks f as admissible."""
    _, cos, _, _, _ = trig_tables(f.grid.n_nodes)
    return integrate_samples(f.values * cos, f.grid.n_nodes)


def jump_increment(f: GridFunction) -> complex:
    """int_J f(y) sin y dy: the envelope gain across the half-period.

    Equals v(pi/2) - v(-pi/2) for the solution of the linearized problem,
    and vanishes for even forcing."""
    _, _, sin, _, _ = trig_tables(f.grid.n_nodes)
    return integrate_samples(f.values * sin, f.grid.n_nodes)


def enforce_solvability(f: GridFunction) -> GridFunction:
    """Remove the cosine-mode content of f.

    Returns f - c cos x with c = (int f cos) / (int cos^2), computed with
    the same quadrature, so the residual of the result vanishes to
    roundoff regardless of quadrature error.  Idempotent."""
    n = f.grid.n_nodes
    _, cos, _, cos2, _ = trig_tables(n)
    c = integrate_samples(f.values * cos, n) / integrate_samples(cos2 + 0j, n)
    return GridFunction(f.grid, f.values - c * cos)


def _solve_envelope_raw(f_values: np.ndarray, grid: Grid, v_left: complex) -> np.ndarray:
    """Envelope samples from the split representation (no solvability check)."""
    n = grid.n_nodes
    h = grid.spacing
    x, cos, sin, _, _ = trig_tables(n)
    A = running_integral(f_values * sin, h)
    C = running_integral(f_values * cos, h)
    B = C[-1] - C
    v = np.empty(n, dtype=complex)
    # interior: |cos x| >= sin(h) >> cutoff, so the ratio is safe
    v[1:-1] = v_left + A[1:-1] + (sin[1:-1] / cos[1:-1]) * B[1:-1]
    v[0] = v_left
    v[-1] = v_left + integrate_samples(f_values * sin, n)
    return v


def solve_linear_inhomogeneous(f: GridFunction, v_left: complex = 0.0) -> GridFunction:
    """Solve -U'' - U = f on J with U = v cos x and prescribed v(-pi/2).

    The forcing must satisfy the solvability condition; otherwise no
    solution with bounded envelope exists and the input is rejected.
    """
    resid = solvability_residual(f)
    if abs(resid) > TOL_SOLV * max(1e-300, f.sup_norm):
        raise SolvabilityError(
            f"forcing violates the solvability condition: |int f cos| = {abs(resid):.3e}"
        )
    return GridFunction(f.grid, _solve_envelope_raw(f.values, f.grid, complex(v_left)))


def envelope_residual(
    v_values: np.ndarray, f_values: np.ndarray, grid: Grid
) -> float:
    """Collocation residual of -U'' - U = f in envelope form.

    With U = v cos x the equation is equivalent to
    -v'' cos x + 2 v' sin x = f; v is differentiated by centered
    differences, so the cosine factor carries no discretization error and
    the residual is O(h^2) in the envelope derivatives alone.
    Returns the sup over interior nodes.
    """
    h = grid.spacing
    x, cos, sin, _, _ = trig_tables(grid.n_nodes)
    d1 = (v_values[2:] - v_values[:-2]) / (2 * h)
    d2 = (v_values[2:] - 2 * v_values[1:-1] + v_values[:-2]) / (h * h)
    resid = -d2 * cos[1:-1] + 2 * d1 * sin[1:-1] - f_values[1:-1]
    return float(np.max(np.abs(resid)))


def resample_periodic(u_open: np.ndarray, x0: float, period: float, x_new: np.ndarray) -> np.ndarray:
    """Evaluate the trigonometric interpolant of periodic samples at x_new.

    u_open holds samples on [x0, x0 + period) without the duplicate right
    endpoint.  Exact for trigonometric polynomials below the Nyquist
    frequency of the sample set."""
    m = u_open.shape[0]
    coef = np.fft.fft(u_open) / m
    k = np.fft.fftfreq(m, d=1.0 / m)  # integer wave numbers
    # for even m, split the Nyquist mode symmetrically to keep realness
    phase = np.exp(1j * np.outer(x_new - x0, k) * (2 * np.pi / period))
    if m % 2 == 0:
        ny = m // 2
        sel = np.abs(k) == ny
        phase[:, sel] = np.cos(np.outer(x_new - x0, k[sel]) * (2 * np.pi / period))
    return phase @ coef
