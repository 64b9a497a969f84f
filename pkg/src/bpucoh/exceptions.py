class InvariantViolation(RuntimeError):
    """An internal consistency check failed; this always indicates a bug."""
