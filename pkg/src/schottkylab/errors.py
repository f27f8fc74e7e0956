"""Exception types shared across the package."""

from __future__ import annotations


class SchottkyLabError(Exception):
    """Base class for all package-specific errors."""


class InputError(SchottkyLabError):
    """Malformed user input (files, flags, config). CLI maps this to exit code 2."""


class VerificationFailure(SchottkyLabError):
    """A checked identity came out above its tolerance. CLI maps this to exit code 1."""


class OverlappingIntervals(InputError):
    """The 2r boundary intervals are not pairwise disjoint; the data is not Schottky."""


class NonHyperbolicGenerator(InputError):
    """A generator has |trace| <= 2."""


class NonInteriorPoint(InputError):
    """A point that must lie in the open upper half-plane does not."""


class CapacityExceeded(SchottkyLabError):
    """Projected enumeration size exceeds the configured memory budget."""


class PruneBoundViolated(SchottkyLabError):
    """Internal consistency assertion: a pruned orbit subtree contained a closer element."""


class TailDominates(SchottkyLabError):
    """Quadrature truncation tail estimate exceeds the requested tolerance; raise R."""


class TailTooLarge(SchottkyLabError):
    """Series truncation tail bound exceeds the requested tolerance."""


class OutsideConvergence(SchottkyLabError):
    """Spectral parameter outside the convergence half-plane of the product/series."""


class NonDecaying(SchottkyLabError):
    """Fredholm coefficients stopped decaying: trace order too small or s too deep."""


class NoZeroInBracket(SchottkyLabError):
    """No determinant zero found on [0, 1]; signals invalid group data."""


class ContourThroughZero(SchottkyLabError):
    """A contour sample landed on (or within 1e-12 of) a zero; retries exhausted."""


class StripViolation(SchottkyLabError):
    """Product-method evaluation requested outside the two-sided convergence strip."""


class NearZeroOfZ(SchottkyLabError):
    """Determinant log-derivative requested within the unstable neighborhood of a zero."""


class RegimeViolation(SchottkyLabError):
    """Operation requires the negative-critical-exponent regime (or stated Re-lambda range)."""


class QuadratureStall(SchottkyLabError):
    """Kernel quadrature accuracy target unmet at maximum refinement."""


class CacheUnwritable(SchottkyLabError):
    """Cache directory cannot be written; computation falls back to memory."""
