"""Exception hierarchy shared by all laffab modules."""


class LafError(Exception):
    """Base class for every error raised by laffab."""


class InputError(LafError):
    """Problems with input files or formats (CLI exit status 2)."""


class IoError(InputError):
    def __init__(self, path, reason="file not found"):
        self.path = str(path)
        super().__init__(f"{self.path}: {reason}")


class MalformedXml(InputError):
    def __init__(self, path, line, column, reason):
        self.path, self.line, self.column = str(path), line, column
        super().__init__(f"{self.path}:{line}:{column}: {reason}")


class MissingPrimaryData(InputError):
    pass


class MissingAnnotationFiles(InputError):
    pass


class GrafFormatError(InputError):
    """Well-formed XML that falls outside the supported GrAF vocabulary."""


class NestedFeatureStructure(GrafFormatError):
    pass


class DanglingReference(GrafFormatError):
    pass


class AnchorOutOfBounds(GrafFormatError):
    pass


class DuplicateId(GrafFormatError):
    pass


class InvalidGraph(LafError):
    def __init__(self, violations):
        self.violations = list(violations)
        shown = "; ".join(self.violations[:5])
        more = len(self.violations) - 5
        if more > 0:
            shown += f"; ... {more} more"
        super().__init__(f"invalid graph: {shown}")


class BundleError(InputError):
    pass


class ChecksumMismatch(BundleError):
    def __init__(self, section):
        self.section = section
        super().__init__(f"checksum mismatch in section {section!r}")


class VersionMismatch(BundleError):
    pass


class UnknownFeatureKey(LafError, KeyError):
    def __str__(self):
        return f"unknown feature key {self.args[0]}"


class FeatureNotLoaded(LafError, KeyError):
    def __str__(self):
        return f"feature {self.args[0]} exists in the bundle but was not loaded"


class InconsistentHierarchy(LafError):
    def __init__(self, sentence, nodes, reason="properly overlapping constituents"):
        self.sentence, self.nodes = sentence, tuple(nodes)
        super().__init__(f"sentence {sentence}: {reason}: {', '.join(self.nodes)}")


class TreeError(InputError):
    """Malformed or invalid tree text."""


class TooManyNodes(TreeError):
    pass


class AlignmentError(LafError):
    pass


class TreeTooLarge(LafError):
    pass


class InsufficientTrees(LafError):
    pass
