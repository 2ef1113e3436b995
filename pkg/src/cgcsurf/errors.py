"""Exception types shared across the package."""


class CGCError(Exception):
    """Base class for all library errors."""


class AllInfinite(CGCError):
    """A field has no finite sample."""


class EmptyMesh(CGCError):
    """A surface mesh has no vertex."""


class InfiniteCell(CGCError):
    """A Monge-Ampere cell touches an unbounded subgradient."""


class NotRegular(CGCError):
    """Boundary data with fewer than two finite nodes."""


class Wedge(CGCError):
    """Boundary data with exactly two finite nodes (a wedge domain)."""


class NotStrictlyInside(CGCError):
    """A solve region touches the unit circle."""


class StepRejected(CGCError):
    """Frame development drifted beyond tolerance after step halving."""


class BracketFailure(CGCError):
    """No membership flip was found in the K bracket."""


class NotGradientSurjective(CGCError):
    def __init__(self, covered_radius, requested):
        super().__init__(
            f"gradient image covers radius {covered_radius:.6g}, "
            f"requested square of half-width {requested:.6g}"
        )
        self.covered_radius = covered_radius
        self.requested = requested


class NonConvergence(CGCError):
    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class BisectionExhausted(CGCError):
    def __init__(self, message, bracket=None, iterations=None):
        super().__init__(message)
        self.bracket = bracket
        self.iterations = iterations
