class OrderError(ValueError):
    """A relation or table does not have the order-theoretic shape it claims."""


class ResourceError(RuntimeError):
    """A construction would exceed a configured size cap."""
