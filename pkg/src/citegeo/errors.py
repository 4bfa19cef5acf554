"""Error types shared by the pipeline stages."""


class PipelineError(Exception):
    """Base class for every stage-level failure."""


class FormatError(PipelineError):
    """Input file does not match the declared format."""


class RowError(PipelineError):
    """A single input row could not be read."""

    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class AlignmentError(PipelineError):
    """Two order-matched sequences differ in length or keys; order is the join key."""


class IntegrityError(PipelineError):
    """Cross-stage inputs reference data that is not present."""


class TransportError(PipelineError):
    """Remote backend unreachable after the configured retries."""


class SourceError(PipelineError):
    """A geocoding backend returned a malformed response."""


class StageError(PipelineError):
    """Wraps a failure with the pipeline stage name and a remediation hint."""

    def __init__(self, stage: str, message: str, hint: str = ""):
        text = f"{stage}: {message}"
        if hint:
            text += f" ({hint})"
        super().__init__(text)
        self.stage = stage
        self.hint = hint
