"""
strategy_registry.py

Registry of measurement-shift strategies for the HG simulation.
Strategy classes are registered with the `register_strategy` decorator so the
configuration can name them.
"""

# Registered strategy classes, keyed by class name.
STRATEGY_REGISTRY = {}

def register_strategy(cls):
    """
    Decorator to register a strategy class in the STRATEGY_REGISTRY.

    Only classes whose name ends with "Strategy" are registered.

    Args:
        cls (type): The strategy class to register.

    Returns:
        type: The registered class (unmodified).
    """
    name = cls.__name__
    if name.endswith("Strategy"):
        STRATEGY_REGISTRY[name] = cls
    return cls


def get_strategy_class(name: str):
    """
    Look up a registered strategy class.

    Raises:
        KeyError: If no strategy of that name is registered.
    """
    try:
        return STRATEGY_REGISTRY[name]
    except KeyError:
        raise KeyError(f"Unknown strategy: {name}") from None
