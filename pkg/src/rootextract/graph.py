"""Tree-structured root graphs."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional

import numpy as np


@dataclass(eq=False)
class RootNode:
    pos: tuple
    radius: float
    branch_id: int
    children: list["RootNode"] = field(default_factory=list)
    parent: Optional["RootNode"] = field(default=None, repr=False)

    def add_child(self, child: "RootNode") -> "RootNode":
        if child.parent is not None:
            raise ValueError("node already has a parent")
        child.parent = self
        self.children.append(child)
        return child

    def detach(self) -> None:
        if self.parent is not None:
            self.parent.children.remove(self)
            self.parent = None

    @property
    def position(self) -> np.ndarray:
        return np.asarray(self.pos, dtype=np.float64)


class RootGraph:
    """A rooted tree of :class:`RootNode`.

    ``branch_count`` is one past the largest branch id handed out, which for
    an extracted graph is the final value of the running branch counter.
    """

    def __init__(self, root: RootNode, branch_count: int | None = None):
        if root.parent is not None:
            raise ValueError("root node must not have a parent")
        self.root = root
        self._branch_count = branch_count

    @classmethod
    def single(cls, pos, radius: float = 0.0) -> "RootGraph":
        return cls(RootNode(tuple(pos), float(radius), 0))

    def nodes(self) -> Iterator[RootNode]:
        """Pre-order traversal, children in stored order."""
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))

    def edges(self) -> Iterator[tuple[RootNode, RootNode]]:
        for node in self.nodes():
            for child in node.children:
                yield node, child

    @property
    def node_count(self) -> int:
        return sum(1 for _ in self.nodes())

    @property
    def edge_count(self) -> int:
        return sum(len(n.children) for n in self.nodes())

    @property
    def branch_count(self) -> int:
        if self._branch_count is not None:
            return self._branch_count
        return max(n.branch_id for n in self.nodes()) + 1

    def leaves(self) -> list[RootNode]:
        return [n for n in self.nodes() if not n.children]

    def depth_of(self) -> dict[int, int]:
        depth = {id(self.root): 0}
        for node in self.nodes():
            for child in node.children:
                depth[id(child)] = depth[id(node)] + 1
        return depth

    def is_tree(self) -> bool:
        seen: set[int] = set()
        stack = [self.root]
        while stack:
            node = stack.pop()
            if id(node) in seen:
                return False
            seen.add(id(node))
            for child in node.children:
                if child.parent is not node:
                    return False
                stack.append(child)
        return len(seen) == self.edge_count + 1

    def records(self) -> list[tuple[int, int, tuple, float, int]]:
        """``(id, parent_id, pos, radius, branch_id)`` in pre-order; root parent is -1."""
        ids: dict[int, int] = {}
        out = []
        for i, node in enumerate(self.nodes()):
            ids[id(node)] = i
            parent = -1 if node.parent is None else ids[id(node.parent)]
            out.append((i, parent, tuple(float(c) for c in node.pos), float(node.radius), int(node.branch_id)))
        return out

    def structurally_equal(self, other: "RootGraph") -> bool:
        return self.records() == other.records()

    def copy(self) -> "RootGraph":
        clone = {}
        for node in self.nodes():
            new = RootNode(node.pos, node.radius, node.branch_id)
            clone[id(node)] = new
            if node.parent is not None:
                clone[id(node.parent)].add_child(new)
        return RootGraph(clone[id(self.root)], self._branch_count)

    def __repr__(self) -> str:
        return f"RootGraph(nodes={self.node_count}, branches={self.branch_count})"
