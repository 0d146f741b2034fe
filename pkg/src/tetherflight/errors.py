"""Exception hierarchy shared by all tetherflight modules."""


class TetherFlightError(Exception):
    """Base class for every error raised by the package."""


class DegenerateSpeed(TetherFlightError):
    """Ground speed too small for a law that divides by it."""


class OutOfRangeCompression(TetherFlightError):
    """Spring compression outside the physical travel [0, max_compression]."""


class ZeroGain(TetherFlightError):
    """Input gain b is zero, so no feedback gain can place the poles."""


class UnstableRequest(TetherFlightError):
    """Requested closed-loop eigenvalue has a non-negative real part."""


class NonFiniteCost(TetherFlightError):
    """Identification rollout diverged for the trial parameters."""


class ScenarioError(TetherFlightError):
    """Base class for scenario loading problems."""


class ParseError(ScenarioError):
    """Malformed scenario text."""

    def __init__(self, lineno, message):
        self.lineno = lineno
        super().__init__(f"line {lineno}: {message}")


class ValidationError(ScenarioError):
    """A parameter violates an invariant. ``key`` names the offending entry."""

    def __init__(self, key, message):
        self.key = key
        super().__init__(f"{key}: {message}")


class ScenarioInvalid(ScenarioError):
    """Scenario blocks are individually valid but inconsistent as a whole."""


class TelemetryFormatError(TetherFlightError):
    """Telemetry file header or schema version does not match."""
