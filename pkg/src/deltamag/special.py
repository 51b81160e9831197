"""Digamma function.

The weak-localization lineshape needs psi(1/2 + x) for x from ~1e-9 up to
~1e8, so the implementation must be accurate over a wide range and cheap to
evaluate on arrays. Arguments below the asymptotic range are lifted with the
recurrence psi(x) = psi(x + 1) - 1/x, then the standard asymptotic series

    psi(x) ~ ln x - 1/(2x) - sum_n B_2n / (2n x^2n)

is summed. Six Bernoulli terms at x >= 10 keep the truncation error below
1e-13 uniformly (the first neglected term is B_14/(14 x^14) ~ 9e-15 at
x = 10).
"""

from __future__ import annotations

import numpy as np

_ASYMPTOTIC_MIN = 10.0

# B_2n/(2n) for 2n = 2, 4, ..., 12, as coefficients of z = 1/x^2
_TAIL_COEFFS = (
    1.0 / 12.0,
    -1.0 / 120.0,
    1.0 / 252.0,
    -1.0 / 240.0,
    1.0 / 132.0,
    -691.0 / 32760.0,
)


def digamma(x):
    """Digamma (psi) function for positive real arguments.

    Parameters
    ----------
    x : float or array_like
        Argument(s), must be finite and > 0.

    Returns
    -------
    float or ndarray
        psi(x), matching the input shape. Scalar in, scalar out.
    """
    arr = np.asarray(x, dtype=float)
    if arr.size and (not np.all(np.isfinite(arr)) or np.any(arr <= 0.0)):
        raise ValueError("digamma requires finite x > 0")
    scalar = arr.ndim == 0
    work = np.atleast_1d(arr).astype(float, copy=True)

    # Lift small arguments into the asymptotic range. At most ten passes are
    # needed for x >= 0.5; tiny x just takes a few more.
    acc = np.zeros_like(work)
    low = work < _ASYMPTOTIC_MIN
    while low.any():
        acc[low] -= 1.0 / work[low]
        work[low] += 1.0
        low = work < _ASYMPTOTIC_MIN

    z = 1.0 / (work * work)
    tail = np.zeros_like(work)
    for c in reversed(_TAIL_COEFFS):
        tail = (tail + c) * z
    result = acc + np.log(work) - 0.5 / work - tail
    return float(result[0]) if scalar else result.reshape(arr.shape)
