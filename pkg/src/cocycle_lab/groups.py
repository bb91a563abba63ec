"""Finite groups as index tables.

Every group is a multiplication table over indices 0..order-1 with the
identity pinned at index 0.  All higher layers (length functions, group
algebra, dilations) index into these tables and never touch abstract
element objects.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional, Sequence

import numpy as np

ORDER_CAP = 4096
# Exhaustive associativity is O(order^3); past this we only sample.
EXHAUSTIVE_ASSOC_CAP = 512


class TableValidationError(ValueError):
    """A multiplication table violates a group axiom."""


class SizeCapError(ValueError):
    """Requested group exceeds the configured order cap."""


@dataclass(frozen=True)
class FiniteGroup:
    order: int
    mul: np.ndarray          # (order, order) int indices, mul[g, h] = g*h
    inv: np.ndarray          # (order,) int indices
    labels: tuple[str, ...] = ()
    metadata: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        self.mul.setflags(write=False)
        self.inv.setflags(write=False)

    @cached_property
    def conv_index(self) -> np.ndarray:
        """conv_index[s, u] = s^{-1} u; shared read-only convolution table."""
        return self.mul[self.inv]

    @cached_property
    def rep_index(self) -> np.ndarray:
        """rep_index[x, y] = x y^{-1}; regular-representation lookup."""
        return self.mul[:, self.inv]

    def label(self, g: int) -> str:
        return self.labels[g] if self.labels else str(g)

    def element_orders(self) -> np.ndarray:
        """Order of each element by iterated multiplication."""
        out = np.zeros(self.order, dtype=int)
        for g in range(self.order):
            x, k = g, 1
            while x != 0:
                x = int(self.mul[x, g])
                k += 1
            out[g] = k
        return out

    def is_abelian(self) -> bool:
        return bool(np.array_equal(self.mul, self.mul.T))


def validate_group(order: int, mul: np.ndarray, inv: np.ndarray,
                   exhaustive: Optional[bool] = None) -> None:
    """Check identity/inverse axioms and associativity.

    Associativity is verified over all order**3 triples when
    ``exhaustive`` (default: order <= EXHAUSTIVE_ASSOC_CAP), otherwise on a
    deterministic sample of triples.  Raises TableValidationError naming
    the first offending triple.
    """
    if mul.shape != (order, order):
        raise TableValidationError(f"mul table has shape {mul.shape}, expected {(order, order)}")
    if mul.min() < 0 or mul.max() >= order:
        bad = np.argwhere((mul < 0) | (mul >= order))[0]
        raise TableValidationError(
            f"mul({bad[0]},{bad[1]}) = {mul[bad[0], bad[1]]} out of range [0,{order})")
    idx = np.arange(order)
    if not np.array_equal(mul[0], idx):
        g = int(np.argmax(mul[0] != idx))
        raise TableValidationError(f"identity axiom fails: mul(0,{g}) = {mul[0, g]} != {g}")
    if not np.array_equal(mul[:, 0], idx):
        g = int(np.argmax(mul[:, 0] != idx))
        raise TableValidationError(f"identity axiom fails: mul({g},0) = {mul[g, 0]} != {g}")
    if inv.shape != (order,):
        raise TableValidationError(f"inv table has shape {inv.shape}, expected ({order},)")
    gi = mul[idx, inv]
    if not np.array_equal(gi, np.zeros(order, dtype=mul.dtype)):
        g = int(np.argmax(gi != 0))
        raise TableValidationError(
            f"inverse axiom fails: mul({g},inv({g})={inv[g]}) = {gi[g]} != 0")
    ig = mul[inv, idx]
    if not np.array_equal(ig, np.zeros(order, dtype=mul.dtype)):
        g = int(np.argmax(ig != 0))
        raise TableValidationError(
            f"inverse axiom fails: mul(inv({g})={inv[g]},{g}) = {ig[g]} != 0")

    if exhaustive is None:
        exhaustive = order <= EXHAUSTIVE_ASSOC_CAP
    if exhaustive:
        for i in range(order):
            lhs = mul[mul[i], :]       # (i*j)*k over j,k
            rhs = mul[i][mul]          # i*(j*k)
            if not np.array_equal(lhs, rhs):
                j, k = np.argwhere(lhs != rhs)[0]
                raise TableValidationError(
                    f"associativity fails at (i,j,k)=({i},{j},{k}): "
                    f"({i}*{j})*{k} = {lhs[j, k]} but {i}*({j}*{k}) = {rhs[j, k]}")
    else:
        rng = np.random.default_rng(0)
        tri = rng.integers(0, order, size=(4096, 3))
        lhs = mul[mul[tri[:, 0], tri[:, 1]], tri[:, 2]]
        rhs = mul[tri[:, 0], mul[tri[:, 1], tri[:, 2]]]
        if not np.array_equal(lhs, rhs):
            i, j, k = tri[int(np.argmax(lhs != rhs))]
            raise TableValidationError(
                f"associativity fails at (i,j,k)=({i},{j},{k})")


def _finish(order: int, mul: np.ndarray, labels: Sequence[str],
            metadata: Optional[dict] = None) -> FiniteGroup:
    inv = np.argmax(mul == 0, axis=1).astype(mul.dtype)
    g = FiniteGroup(order, mul, inv, tuple(labels), metadata or {})
    validate_group(order, mul, inv)
    return g


def build_cyclic(n: int) -> FiniteGroup:
    """Z_n with mul(i,j) = (i+j) mod n."""
    if n < 1:
        raise ValueError(f"cyclic group needs n >= 1, got {n}")
    idx = np.arange(n)
    mul = (idx[:, None] + idx[None, :]) % n
    return _finish(n, mul, [str(k) for k in range(n)], {"kind": "cyclic", "n": n})


def build_product(factors: Sequence[FiniteGroup], cap: int = ORDER_CAP) -> FiniteGroup:
    """Direct product with mixed-radix element encoding, first factor most significant."""
    if not factors:
        raise ValueError("product of zero factors")
    orders = [f.order for f in factors]
    order = int(np.prod(orders))
    if order > cap:
        raise SizeCapError(f"product order {order} exceeds cap {cap}")
    idx = np.arange(order)
    digits = []
    rem = idx
    for o in reversed(orders):
        digits.append(rem % o)
        rem = rem // o
    digits = digits[::-1]                      # digits[f][g] = coordinate of g in factor f
    mul = np.zeros((order, order), dtype=np.int64)
    for f, grp in enumerate(factors):
        comp = grp.mul[np.ix_(digits[f], digits[f])]
        mul = mul * orders[f] + comp
    labels = []
    for g in range(order):
        labels.append("(" + ",".join(factors[f].label(int(digits[f][g]))
                                     for f in range(len(factors))) + ")")
    return _finish(order, mul, labels,
                   {"kind": "product", "orders": orders})


def build_heisenberg(n: int, cap: int = ORDER_CAP) -> FiniteGroup:
    """H_3(Z_n): triples (a,b,c) with (a,b,c)*(a',b',c') = (a+a'+b c', b+b', c+c') mod n.

    This is the upper-unitriangular convention [[1,b,a],[0,1,c],[0,0,1]];
    the convention is recorded in the metadata.  Encoding (a,b,c) -> (a*n+b)*n+c,
    so the identity (0,0,0) sits at index 0.
    """
    if n < 2:
        raise ValueError(f"Heisenberg group needs n >= 2, got {n}")
    order = n ** 3
    if order > cap:
        raise SizeCapError(f"Heisenberg order {order} exceeds cap {cap}")
    idx = np.arange(order)
    a, b, c = idx // (n * n), (idx // n) % n, idx % n
    a1, b1, c1 = a[:, None], b[:, None], c[:, None]
    a2, b2, c2 = a[None, :], b[None, :], c[None, :]
    mul = ((a1 + a2 + b1 * c2) % n) * n * n + ((b1 + b2) % n) * n + (c1 + c2) % n
    labels = [f"({a[g]},{b[g]},{c[g]})" for g in range(order)]
    return _finish(order, mul, labels,
                   {"kind": "heisenberg", "n": n,
                    "convention": "matrix (a,b,c) = [[1,b,a],[0,1,c],[0,0,1]]"})


def group_to_dict(g: FiniteGroup) -> dict:
    d = {"order": g.order, "mul": g.mul.tolist()}
    if g.labels:
        d["labels"] = list(g.labels)
    return d


def save_group(g: FiniteGroup, path: str) -> None:
    with open(path, "w") as fh:
        json.dump(group_to_dict(g), fh)
        fh.write("\n")


def group_from_dict(d: dict) -> FiniteGroup:
    try:
        order = int(d["order"])
        mul = np.asarray(d["mul"], dtype=np.int64)
    except (KeyError, TypeError, ValueError) as exc:
        raise TableValidationError(f"malformed group JSON: {exc}") from exc
    labels = tuple(d.get("labels", ()))
    if labels and len(labels) != order:
        raise TableValidationError(
            f"got {len(labels)} labels for order {order}")
    if mul.shape != (order, order):
        raise TableValidationError(
            f"mul table has shape {mul.shape}, expected {(order, order)}")
    if order > ORDER_CAP:
        raise SizeCapError(f"order {order} exceeds cap {ORDER_CAP}")
    rows_ok = (np.sort(mul, axis=1) == np.arange(order)).all()
    if not rows_ok:
        r = int(np.argmin((np.sort(mul, axis=1) == np.arange(order)).all(axis=1)))
        raise TableValidationError(f"row {r} of mul is not a permutation (no inverse row)")
    inv = np.argmax(mul == 0, axis=1).astype(np.int64)
    validate_group(order, mul, inv)
    return FiniteGroup(order, mul, inv, labels, {"kind": "table"})


def load_group(path: str) -> FiniteGroup:
    """Load and fully validate a group table from JSON {"order", "mul", "labels"?}."""
    with open(path) as fh:
        try:
            d = json.load(fh)
        except json.JSONDecodeError as exc:
            raise TableValidationError(f"invalid JSON in {path}: {exc}") from exc
    return group_from_dict(d)


def build_from_spec(spec: dict) -> FiniteGroup:
    """GroupSpec dispatch: {"kind": cyclic|product|heisenberg|table, ...}."""
    kind = spec.get("kind")
    if kind == "cyclic":
        return build_cyclic(int(spec["n"]))
    if kind == "product":
        n, m = int(spec["n"]), int(spec.get("m", 1))
        return build_product([build_cyclic(n)] * m)
    if kind == "heisenberg":
        return build_heisenberg(int(spec["n"]))
    if kind == "table":
        if "path" in spec:
            return load_group(spec["path"])
        return group_from_dict(spec)
    raise ValueError(f"unknown group kind {kind!r}")
