"""Exception hierarchy shared by all modules."""


class BeliefCrowdError(Exception):
    """Base class for every error raised by this package."""


# evidential machinery
class EmptyFocal(BeliefCrowdError, ValueError):
    pass


class FullFrameFocal(BeliefCrowdError, ValueError):
    pass


class AlphaOutOfRange(BeliefCrowdError, ValueError):
    pass


class FrameMismatch(BeliefCrowdError, ValueError):
    pass


class EmptyInput(BeliefCrowdError, ValueError):
    pass


class TotalConflict(BeliefCrowdError, ArithmeticError):
    pass


class DogmaticMass(BeliefCrowdError, ValueError):
    pass


class NonSeparable(BeliefCrowdError, ValueError):
    pass


class AllConflict(BeliefCrowdError, ArithmeticError):
    pass


class EmptyCandidates(BeliefCrowdError, ValueError):
    pass


class InvalidMass(BeliefCrowdError, ValueError):
    pass


# campaign data
class LikertOutOfRange(BeliefCrowdError, ValueError):
    pass


class InvalidSelection(BeliefCrowdError, ValueError):
    pass


class SchemaError(BeliefCrowdError, ValueError):
    def __init__(self, message, line=None, column=None):
        self.line = line
        self.column = column
        where = []
        if line is not None:
            where.append(f"line {line}")
        if column is not None:
            where.append(f"column {column!r}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)


class DuplicateResponse(SchemaError):
    pass


class DanglingAttentionRef(SchemaError):
    pass


class ConfigError(BeliefCrowdError, ValueError):
    pass


# profiling / fusion
class SelectionTooLarge(BeliefCrowdError, ValueError):
    pass


class ImpMaxTooSmall(BeliefCrowdError, ValueError):
    pass


class ArgOutOfRange(BeliefCrowdError, ValueError):
    pass


class NoResponses(BeliefCrowdError, ValueError):
    pass


class MismatchedQuestions(BeliefCrowdError, ValueError):
    pass


class UnknownFrame(BeliefCrowdError, ValueError):
    pass


class ZeroWeights(BeliefCrowdError, ValueError):
    pass


class NoGoldQuestions(BeliefCrowdError, ValueError):
    pass


class MissingGold(BeliefCrowdError, ValueError):
    pass


class NoGold(BeliefCrowdError, ValueError):
    pass


class UnknownContributor(BeliefCrowdError, KeyError):
    pass


# baselines
class IncompatibleFrames(BeliefCrowdError, ValueError):
    pass


class NonConvergence(BeliefCrowdError, RuntimeWarning):
    """Warning emitted when EM stops at ``max_iter`` before reaching ``tol``."""

    def __init__(self, message, log_likelihood=None):
        super().__init__(message)
        self.log_likelihood = log_likelihood


class DegenerateMatrix(BeliefCrowdError, ValueError):
    pass


class LoneContributor(BeliefCrowdError, ValueError):
    pass


class TooFewContributors(BeliefCrowdError, ValueError):
    pass


# experiments
class SizeExceedsCrowd(BeliefCrowdError, ValueError):
    pass
