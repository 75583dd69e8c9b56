"""Exception hierarchy shared across the package."""


class OilEventsError(Exception):
    """Base class for every error raised by this package."""


# corpus ingest
class StandoffError(OilEventsError):
    pass


class MalformedLine(StandoffError):
    def __init__(self, line_no, line=""):
        self.line_no = line_no
        self.line = line
        super().__init__(f"malformed annotation at line {line_no}: {line!r}")


class DanglingReference(StandoffError):
    def __init__(self, ref_id):
        self.ref_id = ref_id
        super().__init__(f"reference to undeclared annotation {ref_id!r}")


class SpanOutOfBounds(StandoffError):
    def __init__(self, ann_id):
        self.ann_id = ann_id
        super().__init__(f"span of {ann_id!r} lies outside the document text")


class AnnotatorFailure(OilEventsError):
    pass


class UnalignableSpan(OilEventsError):
    def __init__(self, ann_id):
        self.ann_id = ann_id
        super().__init__(f"span of {ann_id!r} cannot be covered by tokens of one sentence")


class UnsupportedFormat(OilEventsError):
    pass


class EmptyDataset(OilEventsError):
    pass


# labels
class OverlappingSpans(OilEventsError):
    def __init__(self, a, b):
        self.a, self.b = a, b
        super().__init__(f"spans overlap: {a} and {b}")


# features
class EncoderFailure(OilEventsError):
    pass


class TokenCountMismatch(OilEventsError):
    pass


# graph / models
class IndexOutOfRange(OilEventsError, IndexError):
    pass


class ShapeMismatch(OilEventsError, ValueError):
    pass


class PruningFailure(OilEventsError):
    pass


class EmptyTrainingSet(OilEventsError):
    pass


class DivergedLoss(OilEventsError):
    pass


class SingleClassTrainingSet(OilEventsError):
    pass


# transfer
class StageFailure(OilEventsError):
    def __init__(self, stage, cause):
        self.stage = stage
        self.cause = cause
        super().__init__(f"stage {stage} failed: {cause}")


class NonFiniteLoss(OilEventsError, ValueError):
    pass


class IncompatibleSource(OilEventsError):
    pass


class SourceTooSmall(OilEventsError):
    pass


# evaluation
class LengthMismatch(OilEventsError, ValueError):
    pass


class UnknownLabel(OilEventsError, ValueError):
    pass


class EmptyInput(OilEventsError, ValueError):
    pass


class ClassTooSmall(OilEventsError, ValueError):
    def __init__(self, label, count):
        self.label = label
        self.count = count
        super().__init__(f"class {label!r} has only {count} members")


# domain similarity
class EmptyCorpus(OilEventsError, ValueError):
    pass


class ProfileMismatch(OilEventsError, ValueError):
    pass


class ManifestMismatch(OilEventsError):
    """Saved model and runtime environment disagree (encoder, vocabulary, format)."""


class ConfigError(OilEventsError, ValueError):
    pass
