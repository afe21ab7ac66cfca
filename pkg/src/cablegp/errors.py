"""Exception hierarchy shared by every stage of the pipeline."""


class CableGPError(Exception):
    """Base class for all library errors."""


class InputError(CableGPError):
    """Bad or malformed user input (CLI exit code 2)."""


class NumericalError(CableGPError):
    """A numerical procedure broke down (CLI exit code 3)."""


class EmptyInput(InputError):
    pass


class NonFiniteValue(InputError):
    pass


class InvalidConfig(InputError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None, path=None):
        self.line = line
        self.path = path
        where = ""
        if path is not None:
            where += f"{path}:"
        if line is not None:
            where += f"{line}:"
        super().__init__(f"{where} {message}" if where else message)


class InvalidGrid(InputError):
    pass


class TooFewSamples(InputError):
    pass


class SampleOutOfGrid(InputError):
    pass


class LengthMismatch(InputError):
    pass


class OutOfRange(InputError):
    pass


class TooFewPoints(InputError):
    pass


class DegenerateCluster(NumericalError):
    pass


class NoConvergence(NumericalError):
    pass


class NonPositiveAxes(NumericalError):
    pass


class SingularKernel(NumericalError):
    pass


class InvalidCluster(InputError):
    pass
