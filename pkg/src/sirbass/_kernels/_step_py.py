"""Pure-NumPy discrete-time step kernel (fallback backend).

Semantics are identical to the compiled kernel and both consume the same
uniform array cell-for-cell, so trajectories are bit-identical across
backends.
"""

import numpy as np

BACKEND = "python"


def step_kernel(state: np.ndarray, u: np.ndarray, p_dt: np.ndarray, ql_dt: np.ndarray,
                qr_dt: np.ndarray, r_dt: np.ndarray) -> None:
    """Advance every replication by one time step, in place.

    state : (m, n) uint8, 0=S 1=I 2=R; updated conditionally on the previous
            full state (nodes outside the array count as never infected).
    u     : (m, n) uniforms, one per cell.
    *_dt  : (n,) per-node transition probabilities for this step.
    """
    old = state.copy()
    infected = old == 1

    prob = np.broadcast_to(p_dt, old.shape).copy()
    prob[:, 1:] += ql_dt[1:] * infected[:, :-1]
    prob[:, :-1] += qr_dt[:-1] * infected[:, 1:]

    state[(old == 0) & (u < prob)] = 1
    state[infected & (u < r_dt)] = 2
