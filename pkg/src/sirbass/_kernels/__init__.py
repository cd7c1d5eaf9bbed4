"""Step-kernel backend selection: compiled extension if built, NumPy otherwise."""

try:
    from ._step_cy import BACKEND, step_kernel
except ImportError:  # extension not built; same semantics, slower
    from ._step_py import BACKEND, step_kernel

from ._step_py import step_kernel as step_kernel_py

__all__ = ["BACKEND", "step_kernel", "step_kernel_py"]
