"""hallab: autonomous-lab orchestration with a simulated circuit lab."""

from ._kernels import KERNEL_IMPL

__version__ = "0.1.0"
__all__ = ["KERNEL_IMPL", "__version__"]
