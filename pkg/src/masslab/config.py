"""Solver configuration shared by the flow-based solvers."""

from __future__ import annotations

from dataclasses import asdict, dataclass, replace

from .errors import ConfigurationError


@dataclass(frozen=True)
class SolverConfig:
    """Knobs of the constrained gradient flow.

    step: initial flow step tau; grad_tol: projected-gradient threshold
    (quadrature L2 norm, relative to sqrt(c)); energy_tol: relative energy
    change counted as a stall; stall_window: iterations the stall must last.
    """

    step: float = 1.0
    max_iter: int = 4000
    grad_tol: float = 1e-6
    energy_tol: float = 1e-12
    backtracking: float = 0.5
    seed: int = 0
    stall_window: int = 50
    divergence_floor: float = -1e6
    mass_tol: float = 1e-10

    def __post_init__(self):
        if not self.step > 0:
            raise ConfigurationError(f"step must be positive, got {self.step}")
        if self.max_iter < 1:
            raise ConfigurationError(f"max_iter must be >= 1, got {self.max_iter}")
        for name in ("grad_tol", "energy_tol", "mass_tol"):
            if not getattr(self, name) > 0:
                raise ConfigurationError(f"{name} must be positive")
        if not 0 < self.backtracking < 1:
            raise ConfigurationError(f"backtracking must lie in (0, 1), got {self.backtracking}")
        if self.stall_window < 1:
            raise ConfigurationError("stall_window must be >= 1")
        if not self.divergence_floor < 0:
            raise ConfigurationError("divergence_floor must be negative")

    def tightened(self, factor: float = 10.0, iters: int = 4) -> "SolverConfig":
        """Tighter tolerance and longer budget, used where coercivity degenerates."""
        return replace(self, grad_tol=self.grad_tol / factor, max_iter=self.max_iter * iters)

    def describe(self) -> dict:
        return asdict(self)
