"""Exception hierarchy."""


class ImcfError(Exception):
    """Base class for all errors raised by imcflab."""


class InvalidField(ImcfError, ValueError):
    """A node field has the wrong length or non-finite values."""


class InvalidSpec(ImcfError, ValueError):
    """A shape specification or run configuration violates its invariants."""


class InternalError(ImcfError, RuntimeError):
    """A state that valid grids cannot produce was reached."""


class LostMeanConvexity(ImcfError):
    """Mean curvature dropped below the admissible floor.

    Raised by the flow right-hand side and by integrals that divide by H.
    """

    def __init__(self, min_h: float, h_min: float, t: float | None = None):
        self.min_h = min_h
        self.h_min = h_min
        self.t = t
        where = "" if t is None else f" at t={t:.6g}"
        super().__init__(f"min H = {min_h:.6g} < {h_min:.3g}{where}")


class StiffnessFailure(ImcfError):
    """The stable explicit time step underflowed."""
