from __future__ import annotations


class FovTopoError(Exception):
    """Base class for every error raised by fovtopo."""


class InputError(FovTopoError):
    """Bad input rather than a failed computation; the CLI exits with status 2."""


class ConfigError(InputError):
    pass


class EmptyGraphError(InputError):
    pass


class UnsupportedGeometryError(InputError):
    pass


class ResolutionError(InputError):
    pass


class DegenerateConfigurationError(InputError):
    def __init__(self, pair: tuple[int, int], distance: float):
        self.pair = pair
        self.distance = distance
        super().__init__(f"Agents {pair[0]} and {pair[1]} coincide (distance {distance:.3e} m)")


class CertificationError(FovTopoError):
    pass


class IndexingError(FovTopoError):
    """Raised when a Kronecker identity fails, which means the flat ordering is broken."""


class LemmaPreconditionError(FovTopoError):
    def __init__(self, cycle: list[int]):
        self.cycle = list(cycle)
        path = " - ".join(str(v) for v in self.cycle)
        super().__init__(f"Edge Laplacian is singular: undirected cycle {path}")


class ConstraintViolation(FovTopoError):
    """A barrier was evaluated at or through its limit."""

    def __init__(self, edge: tuple[int, int] | None, kind: str, distance: float, limit: float):
        self.edge = edge
        self.kind = kind
        self.distance = distance
        self.limit = limit
        super().__init__(
            f"{kind} barrier violated on edge {edge}: d={distance:.6g}, limit={limit:.6g}"
        )


class CollisionError(FovTopoError):
    def __init__(self, pair: tuple[int, int], distance: float, r_col: float):
        self.pair = pair
        self.distance = distance
        self.r_col = r_col
        super().__init__(
            f"Agents {pair[0]} and {pair[1]} within collision radius: d={distance:.6g} <= {r_col:.6g}"
        )


class TerminalEvent(FovTopoError):
    """A simulation outcome that ends the run early."""

    kind = "terminal"

    def __init__(self, t: float, message: str):
        self.t = t
        super().__init__(f"t={t:.6g}: {message}")


class LinkBreak(TerminalEvent):
    kind = "link-break"

    def __init__(self, t: float, edge: tuple[int, int] | None, barrier: str):
        self.edge = edge
        self.barrier = barrier
        super().__init__(t, f"link {edge} broke ({barrier} barrier)")


class CollisionEvent(TerminalEvent):
    kind = "collision"

    def __init__(self, t: float, pair: tuple[int, int]):
        self.pair = pair
        super().__init__(t, f"collision between {pair}")


class SubstepExhausted(TerminalEvent):
    kind = "integration-substep-exhaustion"

    def __init__(self, t: float):
        super().__init__(t, "integration substep exhausted")


__all__ = [
    "FovTopoError",
    "InputError",
    "ConfigError",
    "EmptyGraphError",
    "UnsupportedGeometryError",
    "ResolutionError",
    "DegenerateConfigurationError",
    "CertificationError",
    "IndexingError",
    "LemmaPreconditionError",
    "ConstraintViolation",
    "CollisionError",
    "TerminalEvent",
    "LinkBreak",
    "CollisionEvent",
    "SubstepExhausted",
]
