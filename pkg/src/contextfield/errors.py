"""Exception types shared across the pipeline."""


class ContextFieldError(Exception):
    """Base class for all errors raised by this package."""


class EmptyDataset(ContextFieldError):
    """CSV contained a header but no data rows."""


class NonNumericCell(ContextFieldError):
    def __init__(self, row, column, text):
        self.row = row
        self.column = column
        self.text = text
        super().__init__(
            f"non-numeric cell at row {row}, column {column!r}: {text!r}"
        )


class RaggedRow(ContextFieldError):
    def __init__(self, row, expected, got):
        self.row = row
        super().__init__(f"row {row} has {got} fields, expected {expected}")


class UnknownAttribute(ContextFieldError):
    def __init__(self, name, valid):
        self.name = name
        self.valid = list(valid)
        super().__init__(
            f"unknown attribute {name!r}; valid attributes: {', '.join(self.valid)}"
        )


class MalformedClause(ContextFieldError):
    def __init__(self, clause):
        self.clause = clause
        super().__init__(f"malformed filter clause: {clause!r}")


class ShapeMismatch(ContextFieldError):
    pass


class DegenerateRange(ContextFieldError):
    pass


class MalformedDump(ContextFieldError):
    """An intermediate stage file failed validation.

    ``offset`` is the byte offset at which parsing failed, when known.
    """

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte offset {offset})"
        super().__init__(message)


class UnsupportedFeature(ContextFieldError):
    pass
