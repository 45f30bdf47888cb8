class BottleneckError(Exception):
    """Base class for every error raised by the simulation engine"""


class ParameterError(BottleneckError, ValueError):
    """Invalid physical or numerical parameters"""


class DegeneracyError(BottleneckError):
    """Near-degenerate single-particle pair in an energy denominator"""

    def __init__(self, lam: float, gap: float):
        self.lam = lam
        self.gap = gap
        super().__init__(f"near-degenerate modes at lambda={lam:.12g} (spacing {gap:.3e})")


class SingularSystemError(BottleneckError):
    """Variational coefficient system could not be solved"""

    def __init__(self, lam: float, order: int, detail: str = ""):
        self.lam = lam
        self.order = order
        message = f"order-{order} variational system singular at lambda={lam:.12g}"
        if detail:
            message += f": {detail}"
        super().__init__(message)


class ConvergenceError(BottleneckError):
    """Time-step self-convergence check failed"""


class ConfigError(BottleneckError):
    """Run configuration error with line and field context"""

    def __init__(self, message: str, line: int = None, field: str = None, path: str = None):
        self.line = line
        self.field = field
        self.path = path
        self.message = message
        super().__init__(self.render())

    def render(self) -> str:
        parts = []
        if self.path:
            parts.append(str(self.path) + (f":{self.line}" if self.line else ""))
        elif self.line:
            parts.append(f"line {self.line}")
        if self.field:
            parts.append(self.field)
        parts.append(self.message)
        return ": ".join(parts)


class OutputError(BottleneckError):
    """Result or manifest file could not be written or read"""

    def __init__(self, path, detail: str):
        self.path = str(path)
        super().__init__(f"{self.path}: {detail}")
