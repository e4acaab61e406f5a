class DomainError(ValueError):
    """
    Raised when an operation receives arguments outside its domain
    (sites outside a region, mismatched regions, bad radii, bad config keys)
    """
