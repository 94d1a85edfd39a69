"""Exception types for the figure renderer."""


class SchemaMismatch(Exception):
    """Input CSV header does not match the trajectory contract."""


class EmptyInput(Exception):
    """Input carries a valid header but zero data rows."""
