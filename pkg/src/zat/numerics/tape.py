"""Reverse-mode differentiation over a linear record of numpy operations.

A :class:`Tape` stores nodes in creation order, which is already a
topological order: an op can only consume nodes that exist. ``backward``
walks the record once, from the loss node back to the start.
"""
from __future__ import annotations

import numpy as np


class Node:
    __slots__ = ("tape", "id", "value", "parents", "vjp", "name", "requires_grad")

    def __init__(self, tape, id, value, parents=(), vjp=None, name=None, requires_grad=False):
        self.tape = tape
        self.id = id
        self.value = value
        self.parents = parents
        self.vjp = vjp
        self.name = name
        self.requires_grad = requires_grad

    @property
    def shape(self):
        return self.value.shape

    def __repr__(self):
        label = f" {self.name!r}" if self.name else ""
        return f"<Node {self.id}{label} shape={self.value.shape}>"


class Tape:
    """Ordered record of primitive operations for one forward pass."""

    def __init__(self):
        self.nodes: list[Node] = []

    def __len__(self):
        return len(self.nodes)

    def _push(self, value, parents=(), vjp=None, name=None, requires_grad=False):
        node = Node(self, len(self.nodes), value, parents, vjp, name, requires_grad)
        self.nodes.append(node)
        return node

    def leaf(self, value, name=None) -> Node:
        """A differentiable input (a parameter)."""
        return self._push(np.asarray(value, dtype=np.float64), name=name, requires_grad=True)

    def const(self, value, name=None) -> Node:
        return self._push(np.asarray(value, dtype=np.float64), name=name)

    def record(self, value, parents, vjp, name=None) -> Node:
        """Append an op result.

        ``vjp(g)`` must return one gradient (or ``None``) per parent. When no
        parent needs a gradient the node is stored as a constant.
        """
        if not any(p.requires_grad for p in parents):
            return self._push(value, name=name)
        return self._push(value, tuple(parents), vjp, name=name, requires_grad=True)

    def leaves(self) -> list[Node]:
        return [n for n in self.nodes if n.requires_grad and n.vjp is None]


def backward(tape: Tape, loss: Node) -> dict[int, np.ndarray]:
    """Gradient of a scalar ``loss`` with respect to every leaf on ``tape``.

    Leaves the loss does not depend on get an exact zero gradient.
    Raises ``FloatingPointError`` naming the earliest NaN-valued node.
    """
    if loss.tape is not tape:
        raise ValueError("loss node does not belong to this tape")
    if loss.value.size != 1:
        raise ValueError(f"loss must be scalar, got shape {loss.value.shape}")

    grads: dict[int, np.ndarray] = {loss.id: np.ones_like(loss.value)}
    for node in reversed(tape.nodes[: loss.id + 1]):
        g = grads.get(node.id)
        if g is None or not node.requires_grad:
            continue
        if np.isnan(node.value).any():
            origin = next(n for n in tape.nodes if np.isnan(n.value).any())
            label = f" ({origin.name})" if origin.name else ""
            raise FloatingPointError(f"NaN in forward value of node {origin.id}{label}")
        if node.vjp is None:
            continue
        for parent, pg in zip(node.parents, node.vjp(g)):
            if pg is None or not parent.requires_grad:
                continue
            prev = grads.get(parent.id)
            grads[parent.id] = pg if prev is None else prev + pg

    out = {}
    for leaf in tape.leaves():
        g = grads.get(leaf.id)
        out[leaf.id] = np.zeros_like(leaf.value) if g is None else np.asarray(g, dtype=np.float64)
    return out


def grads_by_name(tape: Tape, grads: dict[int, np.ndarray]) -> dict[str, np.ndarray]:
    return {n.name: grads[n.id] for n in tape.leaves() if n.name is not None}
