class CogmapError(Exception):
    pass


class OutOfArena(CogmapError, ValueError):
    pass


class BadIndex(CogmapError, IndexError):
    pass


class InvalidScenario(CogmapError, ValueError):
    pass


class LearningDiverged(CogmapError, ArithmeticError):
    pass


class UnstableIntegration(CogmapError, ArithmeticError):
    pass


class InvalidStart(CogmapError, ValueError):
    pass


class NoVisualAxis(CogmapError, ValueError):
    pass


class DegenerateVelocity(CogmapError, ValueError):
    pass


class NoPath(CogmapError):
    pass


class IncompleteRun(CogmapError, ValueError):
    pass


class EmptyTrajectory(CogmapError, ValueError):
    pass


class TemplateInfeasible(CogmapError, RuntimeError):
    pass


class ConfigError(CogmapError, ValueError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
