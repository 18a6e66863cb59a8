"""Exception hierarchy shared by every layer of the package."""


class ThreadloopError(Exception):
    """Base class for all errors raised by threadloop."""


# --- array layer ---

class IndexOutOfBounds(ThreadloopError, IndexError):
    pass


class NullArrayAccess(ThreadloopError):
    pass


class UnknownDtypeName(ThreadloopError, ValueError):
    pass


# --- types ---

class UnknownTypeLetter(ThreadloopError, ValueError):
    pass


class EmptyGenericList(ThreadloopError, ValueError):
    pass


# --- signatures ---

class SignatureError(ThreadloopError):
    pass


class SignatureSyntaxError(SignatureError):
    def __init__(self, message, pos=None):
        self.pos = pos
        if pos is not None:
            message = f"{message} (at column {pos})"
        super().__init__(message)


class DuplicateParam(SignatureError):
    pass


class ConflictingFlags(SignatureError):
    pass


class UnknownFlag(SignatureError):
    pass


class UnknownType(SignatureError):
    pass


class ConflictingFixedSize(SignatureError):
    pass


class AllTemporaries(SignatureError):
    pass


# --- kernel language ---

class KernelError(ThreadloopError):
    pass


class KernelSyntaxError(KernelError):
    def __init__(self, message, line=None, col=None):
        self.line = line
        self.col = col
        if line is not None:
            message = f"{message} (line {line}, column {col})"
        super().__init__(message)


class UnknownParam(KernelError):
    pass


class UnknownDim(KernelError):
    pass


class UnboundDim(KernelError):
    pass


class UnknownBuiltin(KernelError):
    pass


class UnknownCompField(KernelError):
    pass


class UnknownIdentifier(KernelError):
    pass


class TypeSwitchMissingLetter(KernelError):
    pass


class SizeReadInRedoDims(KernelError):
    pass


class ElementAccessInRedoDims(KernelError):
    pass


# --- engine ---

class EngineError(ThreadloopError):
    pass


class UnknownOp(EngineError, KeyError):
    def __str__(self):
        return Exception.__str__(self)


class DuplicateOpName(EngineError):
    pass


class KernelValidationError(EngineError):
    pass


class PlanError(EngineError):
    rule = None


class ActiveDimMismatch(PlanError):
    pass


class FixedSizeMismatch(PlanError):
    pass


class ThreadDimMismatch(PlanError):
    rule = 3


class UnresolvedDim(PlanError):
    pass


class OutputDimMismatch(PlanError):
    pass


class MissingInput(PlanError):
    pass


class NullInput(EngineError):
    pass


class SuppliedOcaParam(EngineError):
    pass


class MissingNcOutput(EngineError):
    pass


class BadValuesForbidden(EngineError):
    pass


class NegativeAssignedSize(EngineError):
    pass


class InplaceShapeMismatch(EngineError):
    pass


class OtherParError(EngineError):
    pass


# --- dataflow ---

class DataflowError(ThreadloopError):
    pass


class MissingRedoDimsMetadata(DataflowError):
    pass


class IrreversibleWrite(DataflowError):
    pass


class SliceOutOfRange(DataflowError, IndexError):
    pass


class ZeroStep(DataflowError, ValueError):
    pass


class DataflowCycle(DataflowError):
    pass


# --- text formats / cli ---

class FormatError(ThreadloopError, ValueError):
    pass


class CountMismatch(FormatError):
    pass


class OpdefFormatError(FormatError):
    pass


class TypeNotInGenericList(ThreadloopError):
    pass


class NoBadVariant(ThreadloopError):
    pass
