"""Expected zero crossings of kernel-smoother derivative estimates."""

__version__ = "0.1.0"
