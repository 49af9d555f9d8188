"""Dynamic weighted sampling over a growing index set."""

from .errors import DomainError


class WeightIndex:
    """Fenwick (binary indexed) tree of nonnegative weights.

    Supports add-weight and sample-by-cumulative-weight in O(log n).
    """

    __slots__ = ("_tree", "_weights", "_top")

    def __init__(self, capacity: int):
        if capacity < 1:
            raise DomainError(f"capacity must be positive, got {capacity}")
        self._tree = [0.0] * (capacity + 1)
        self._weights = [0.0] * capacity
        self._top = 1 << (capacity.bit_length() - 1)

    def __len__(self) -> int:
        return len(self._weights)

    def __getitem__(self, i: int) -> float:
        return self._weights[i]

    def __setitem__(self, i: int, value: float):
        self.add(i, value - self._weights[i])

    @property
    def total(self) -> float:
        return self.prefix(len(self._tree) - 1)

    def add(self, i: int, delta: float) -> None:
        """Add delta to the weight of slot i."""
        if self._weights[i] + delta < -1e-12:
            raise DomainError(f"weight of slot {i} would become negative")
        self._weights[i] += delta
        j = i + 1
        tree = self._tree
        while j < len(tree):
            tree[j] += delta
            j += j & -j

    def prefix(self, count: int) -> float:
        """Sum of the first count weights."""
        total = 0.0
        j = count
        tree = self._tree
        while j > 0:
            total += tree[j]
            j -= j & -j
        return total

    def find(self, target: float) -> int:
        """Smallest slot whose cumulative weight exceeds target."""
        pos = 0
        step = self._top
        tree = self._tree
        size = len(tree)
        while step:
            nxt = pos + step
            if nxt < size and tree[nxt] <= target:
                pos = nxt
                target -= tree[nxt]
            step >>= 1
        # rounding can land on an empty slot or past the end
        slot = min(pos, len(self._weights) - 1)
        while slot > 0 and self._weights[slot] <= 0.0:
            slot -= 1
        return slot

    def sample(self, u: float) -> int:
        """Slot chosen with probability proportional to weight, for u uniform in [0, 1)."""
        total = self.total
        if total <= 0:
            raise DomainError("cannot sample with all weights zero")
        return self.find(u * total)
