from __future__ import annotations

import enum
from dataclasses import dataclass, replace

from .errors import DomainError


class Family(str, enum.Enum):
    JACOBI_ALGEBRAIC = "jacobi-algebraic"
    JACOBI_TRIGONOMETRIC = "jacobi-trig"
    LAGUERRE = "laguerre"

    @property
    def is_jacobi(self) -> bool:
        return self is not Family.LAGUERRE


@dataclass(frozen=True)
class EnsembleParams:
    """Ensemble family, its real parameters and the dimension N.

    Jacobi families use ``alpha`` and ``beta`` (both > -1); the Laguerre
    family uses ``nu`` (> 0). Unused parameters are left as ``None``.
    """

    family: Family
    dim_n: int
    alpha: float | None = None
    beta: float | None = None
    nu: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "family", Family(self.family))
        if int(self.dim_n) != self.dim_n or self.dim_n < 1:
            raise DomainError(f"dim_n must be a positive integer, got {self.dim_n!r}")
        object.__setattr__(self, "dim_n", int(self.dim_n))
        if self.family.is_jacobi:
            if self.alpha is None or self.beta is None:
                raise DomainError("Jacobi ensembles need alpha and beta")
            if not (self.alpha > -1 and self.beta > -1):
                raise DomainError(f"need alpha, beta > -1, got alpha={self.alpha}, beta={self.beta}")
            object.__setattr__(self, "alpha", float(self.alpha))
            object.__setattr__(self, "beta", float(self.beta))
            object.__setattr__(self, "nu", None)
        else:
            if self.nu is None or not self.nu > 0:
                raise DomainError(f"Laguerre ensembles need nu > 0, got nu={self.nu}")
            object.__setattr__(self, "nu", float(self.nu))
            object.__setattr__(self, "alpha", None)
            object.__setattr__(self, "beta", None)

    @classmethod
    def jacobi(cls, alpha: float, beta: float, dim_n: int, trig: bool = False) -> "EnsembleParams":
        fam = Family.JACOBI_TRIGONOMETRIC if trig else Family.JACOBI_ALGEBRAIC
        return cls(fam, dim_n, alpha=alpha, beta=beta)

    @classmethod
    def laguerre(cls, nu: float, dim_n: int) -> "EnsembleParams":
        return cls(Family.LAGUERRE, dim_n, nu=nu)

    def with_n(self, dim_n: int) -> "EnsembleParams":
        return replace(self, dim_n=dim_n)

    @property
    def bessel_order(self) -> float:
        """Order of the Bessel function governing the hard edge."""
        return self.alpha if self.family.is_jacobi else self.nu - 1.0

    def to_dict(self) -> dict:
        out = {"family": self.family.value, "dim_n": self.dim_n}
        if self.family.is_jacobi:
            out.update(alpha=self.alpha, beta=self.beta)
        else:
            out["nu"] = self.nu
        return out
