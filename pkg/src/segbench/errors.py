"""Exception types shared across the benchmark suite."""


class SegBenchError(Exception):
    """Base class for all segbench errors."""


class DomainError(SegBenchError):
    """A gene value lies outside its allowed integer domain."""

    def __init__(self, position, value):
        self.position = position
        self.value = value
        super().__init__(f"gene {position} has out-of-domain value {value}")


class DegenerateArchitecture(SegBenchError):
    """All stage depths are zero; the genotype decodes to an empty network."""


class IncompleteTable(SegBenchError):
    """A cost table is missing an entry for the requested key."""

    def __init__(self, key):
        self.key = key
        super().__init__(f"cost table has no entry for {key!r}")


class ShapeError(SegBenchError):
    """Vector/matrix arguments have inconsistent shapes."""


class UndefinedClassIoU(SegBenchError):
    """A class has TP+FP+FN == 0, so its IoU is undefined."""

    def __init__(self, class_index):
        self.class_index = class_index
        super().__init__(f"IoU undefined for class {class_index} (TP+FP+FN == 0)")


class InsufficientData(SegBenchError):
    """Not enough training pairs to fit the surrogate."""


class UnknownProblem(SegBenchError):
    """Problem id outside 1..15."""


class EvaluatorUnavailable(SegBenchError):
    """A required evaluator (LUT table or surrogate model) was not supplied."""

    def __init__(self, kind):
        self.kind = kind
        super().__init__(f"no evaluator available for objective kind {kind}")


class UnsupportedObjectiveCount(SegBenchError):
    """Objective count outside the supported range 2..7."""


class UnknownAlgorithm(SegBenchError):
    """Algorithm name not in the registry."""


class SelectionUnderflow(SegBenchError):
    """Selection pool smaller than the required survivor count."""


class IoError(SegBenchError):
    """Filesystem failure in the experiment orchestrator."""


class ProtocolError(SegBenchError):
    """Malformed message on the evaluation protocol."""
