"""Exception hierarchy for the selfish caching toolkit."""


class CachingError(Exception):
    """Base class for all library errors."""


class NetworkFormatError(CachingError, ValueError):
    """A network description could not be parsed."""


class MissingPathError(CachingError, KeyError):
    """A request with positive rate has no forwarding path."""

    def __init__(self, node, item):
        self.node = node
        self.item = item
        super().__init__(f"request ({node}, {item}) has no forwarding path")

    def __str__(self):
        return self.args[0]


class UnsupportedOperationError(CachingError):
    """The operation is not defined for this kind of instance."""


class InfeasibleProfileError(CachingError, ValueError):
    """A strategy profile violates a cache capacity."""


class NonTerminationError(CachingError):
    """The state-graph search exceeded its arc budget.

    ``loop`` holds the mixed request loop witness (node ids) when the
    detector finds one, otherwise ``None``.
    """

    def __init__(self, arcs, budget, loop=None):
        self.arcs = arcs
        self.budget = budget
        self.loop = loop
        msg = f"state-graph search exceeded arc budget {budget} after {arcs} arcs"
        if loop is not None:
            msg += "; suspected mixed request loop " + "->".join(loop)
        else:
            msg += "; no mixed request loop detected"
        super().__init__(msg)


class SearchLimitError(CachingError):
    """An exhaustive search space is larger than the allowed limit."""

    def __init__(self, size, limit):
        self.size = size
        self.limit = limit
        super().__init__(f"search space has {size} profiles, limit is {limit}")


class PropertyViolationError(CachingError):
    """A structural precondition (cloud, path overlap, ...) does not hold."""

    def __init__(self, prop, witness=None):
        self.prop = prop
        self.witness = witness
        msg = f"required property {prop!r} does not hold"
        if witness is not None:
            msg += f" (witness: {witness})"
        super().__init__(msg)


class ScenarioError(CachingError, ValueError):
    """Unknown scenario name or invalid scenario parameters."""
