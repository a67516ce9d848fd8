"""Exception types shared across the toolkit."""


class RelaxMapError(Exception):
    pass


class LitmusSyntaxError(RelaxMapError):
    def __init__(self, line: int, col: int, message: str):
        super().__init__(f"{line}:{col}: {message}")
        self.line = line
        self.col = col
        self.message = message


class ArchMismatch(RelaxMapError):
    def __init__(self, instr: str, arch: str):
        super().__init__(f"instruction '{instr}' is not legal under arch {arch}")
        self.instr = instr
        self.arch = arch


class UnresolvedLabel(RelaxMapError):
    def __init__(self, name: str):
        super().__init__(f"branch target '{name}' is not a label of its thread")
        self.name = name


class LoopDetected(RelaxMapError):
    def __init__(self, tid: int):
        super().__init__(f"thread {tid} has a cycle in its control-flow graph")
        self.tid = tid


class BudgetExceeded(RelaxMapError):
    def __init__(self, limit: int, what: str = "candidates"):
        super().__init__(f"enumeration budget exceeded: more than {limit} {what}")
        self.limit = limit
        self.what = what


class PatternMismatch(RelaxMapError):
    pass


class NotAFence(RelaxMapError):
    pass


class NodeNotInCfg(RelaxMapError):
    pass


class UniverseMismatch(RelaxMapError):
    pass


class FenceHasNoLocation(RelaxMapError):
    pass


class MissingMo(RelaxMapError):
    pass


class MissingC11Annotation(RelaxMapError):
    pass


class UnmappableInstruction(RelaxMapError):
    pass


class UnsupportedPair(RelaxMapError):
    pass
