"""Scenario files: named discrete variables, a flat joint table, and queries.

The joint table is row-major over the declared variable order (the last
variable cycles fastest).  For variables X (size 2) and Y (size 3) the
order is: (x0,y0), (x0,y1), (x0,y2), (x1,y0), (x1,y1), (x1,y2).

Each query names a quantity, a target variable, knowledge variables, and
a loss; losses are selectable per query so the same table can be probed
under log loss and square error in one run.  Square error and Bregman
losses need a per-variable numeric embedding (``real_values``).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ScenarioError
from .losses import (
    BUILTIN_CONVEX,
    LossModel,
    bregman_loss,
    log_loss,
    square_error,
    tsallis_score,
)
from .space import (
    Partition,
    RandomElement,
    SampleSpace,
    partition_join,
    trivial_partition,
)

QUANTITIES = ("H", "H_cond", "I", "I_cond", "U")
LOSS_NAMES = ("log", "square", "tsallis", "bregman")


@dataclass(frozen=True)
class Variable:
    name: str
    symbols: tuple

    @property
    def size(self) -> int:
        return len(self.symbols)


@dataclass(frozen=True)
class LossSpec:
    name: str
    params: tuple = ()  # sorted (key, value) pairs

    def param(self, key, default=None):
        return dict(self.params).get(key, default)

    def render(self) -> str:
        if not self.params:
            return self.name
        inner = ",".join(f"{k}={v}" for k, v in self.params)
        return f"{self.name}:{inner}"


@dataclass(frozen=True)
class Query:
    quantity: str
    target: str
    loss: LossSpec
    given: tuple = ()
    conditioned_on: tuple = ()
    from_vars: tuple = ()
    to_vars: tuple = ()


@dataclass(frozen=True, eq=False)
class Scenario:
    variables: tuple
    joint: np.ndarray
    queries: tuple
    real_values: dict = field(default_factory=dict)

    # -- structure ----------------------------------------------------------
    @property
    def atom_count(self) -> int:
        return int(self.joint.size)

    def variable(self, name: str) -> Variable:
        for v in self.variables:
            if v.name == name:
                return v
        raise ScenarioError("queries", f"unknown variable {name!r}")

    def space(self) -> SampleSpace:
        total = float(self.joint.sum())
        return SampleSpace(self.joint / total)

    def _symbol_columns(self) -> np.ndarray:
        """(atom_count, n_vars) matrix of symbol indices, row-major decode."""
        sizes = [v.size for v in self.variables]
        cols = np.empty((self.atom_count, len(sizes)), dtype=int)
        idx = np.arange(self.atom_count)
        for j in range(len(sizes) - 1, -1, -1):
            cols[:, j] = idx % sizes[j]
            idx //= sizes[j]
        return cols

    def variable_partition(self, name: str) -> Partition:
        j = [v.name for v in self.variables].index(self.variable(name).name)
        col = self._symbol_columns()[:, j]
        blocks = [tuple(np.flatnonzero(col == s)) for s in range(self.variable(name).size)]
        return Partition(tuple(b for b in blocks if b))

    def partition_for(self, names) -> Partition:
        part = trivial_partition(self.space())
        for name in names:
            part = partition_join(part, self.variable_partition(name))
        return part

    def symbol_element(self, name: str) -> RandomElement:
        j = [v.name for v in self.variables].index(self.variable(name).name)
        return RandomElement.real(self._symbol_columns()[:, j].astype(float))

    def real_element(self, name: str) -> RandomElement:
        var = self.variable(name)
        if name not in self.real_values:
            raise ScenarioError(
                "real_values", f"variable {name!r} has no numeric embedding"
            )
        embedding = np.asarray(self.real_values[name], dtype=float)
        j = [v.name for v in self.variables].index(var.name)
        return RandomElement.real(embedding[self._symbol_columns()[:, j]])

    def conditional_rows_element(self, target: str, given) -> RandomElement:
        """Per-atom conditional distribution of `target` given the other variables."""
        var = self.variable(target)
        j = [v.name for v in self.variables].index(var.name)
        cols = self._symbol_columns()
        probs = self.joint / float(self.joint.sum())
        rows = np.empty((self.atom_count, var.size))
        for block in self.partition_for(given).blocks:
            idx = np.asarray(block, dtype=int)
            cond = np.zeros(var.size)
            np.add.at(cond, cols[idx, j], probs[idx])
            mass = float(cond.sum())
            if mass <= 0:
                raise ScenarioError("joint", "conditioning block has zero probability")
            rows[idx] = cond / mass
        return RandomElement.distribution(rows)

    def loss_model(self, spec: LossSpec, target: str) -> LossModel:
        k = self.variable(target).size
        if spec.name == "log":
            return log_loss(k)
        if spec.name == "tsallis":
            q = float(spec.param("q", 2.0))
            return tsallis_score(k, q)
        if spec.name == "square":
            self.real_element(target)  # raises if the embedding is missing
            return square_error(1)
        if spec.name == "bregman":
            self.real_element(target)
            phi_name = spec.param("phi", "squared_norm")
            if phi_name not in BUILTIN_CONVEX:
                raise ScenarioError("queries", f"unknown bregman generator {phi_name!r}")
            return bregman_loss(BUILTIN_CONVEX[phi_name](), 1)
        raise ScenarioError("queries", f"unknown loss {spec.name!r}")

    def element_for(self, spec: LossSpec, target: str) -> RandomElement:
        if spec.name in ("log", "tsallis"):
            return self.symbol_element(target)
        return self.real_element(target)


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------


def parse_loss_string(text: str) -> LossSpec:
    """Parse ``name`` or ``name:key=value,key=value`` (CLI --loss syntax)."""
    name, _, rest = text.partition(":")
    name = name.strip()
    if name not in LOSS_NAMES:
        raise ScenarioError("loss", f"unknown loss {name!r}, expected one of {LOSS_NAMES}")
    params = []
    if rest:
        for piece in rest.split(","):
            key, sep, value = piece.partition("=")
            if not sep:
                raise ScenarioError("loss", f"malformed loss parameter {piece!r}")
            try:
                parsed: object = float(value)
            except ValueError:
                parsed = value.strip()
            params.append((key.strip(), parsed))
    return LossSpec(name, tuple(sorted(params)))


def _parse_loss(obj, where: str) -> LossSpec:
    if isinstance(obj, str):
        return parse_loss_string(obj)
    if isinstance(obj, dict):
        if "name" not in obj:
            raise ScenarioError(f"{where}.loss.name", "missing mandatory field")
        name = obj["name"]
        if name not in LOSS_NAMES:
            raise ScenarioError(f"{where}.loss.name", f"unknown loss {name!r}")
        params = tuple(sorted((k, v) for k, v in obj.items() if k != "name"))
        return LossSpec(name, params)
    raise ScenarioError(f"{where}.loss", "loss must be a string or an object")


def parse_scenario(obj: dict) -> Scenario:
    """Validate a scenario document; raises ScenarioError naming the bad field."""
    if not isinstance(obj, dict):
        raise ScenarioError("scenario", "top-level document must be an object")
    for key in ("variables", "joint", "queries"):
        if key not in obj:
            raise ScenarioError(key, "missing mandatory field")

    raw_vars = obj["variables"]
    if not isinstance(raw_vars, list) or not raw_vars:
        raise ScenarioError("variables", "must be a non-empty list")
    variables = []
    names = set()
    for i, rv in enumerate(raw_vars):
        where = f"variables[{i}]"
        if not isinstance(rv, dict):
            raise ScenarioError(where, "each variable must be an object")
        if "name" not in rv:
            raise ScenarioError(f"{where}.name", "missing mandatory field")
        if "alphabet" not in rv:
            raise ScenarioError(f"{where}.alphabet", "missing mandatory field")
        name = rv["name"]
        if not isinstance(name, str) or not name:
            raise ScenarioError(f"{where}.name", "must be a non-empty string")
        if name in names:
            raise ScenarioError(f"{where}.name", f"duplicate variable {name!r}")
        names.add(name)
        alphabet = rv["alphabet"]
        if isinstance(alphabet, int):
            if alphabet < 1:
                raise ScenarioError(f"{where}.alphabet", "size must be >= 1")
            symbols = tuple(str(s) for s in range(alphabet))
        elif isinstance(alphabet, list) and alphabet:
            symbols = tuple(str(s) for s in alphabet)
            if len(set(symbols)) != len(symbols):
                raise ScenarioError(f"{where}.alphabet", "symbols must be distinct")
        else:
            raise ScenarioError(f"{where}.alphabet", "must be a size or a symbol list")
        variables.append(Variable(name, symbols))

    expected = 1
    for v in variables:
        expected *= v.size
    raw_joint = obj["joint"]
    if not isinstance(raw_joint, list) or len(raw_joint) != expected:
        raise ScenarioError(
            "joint", f"must be a flat list of length {expected} (product of alphabet sizes)"
        )
    try:
        joint = np.asarray(raw_joint, dtype=float)
    except (TypeError, ValueError):
        raise ScenarioError("joint", "entries must be numbers") from None
    if not np.all(np.isfinite(joint)) or np.any(joint < 0):
        raise ScenarioError("joint", "entries must be finite and nonnegative")
    if abs(float(joint.sum()) - 1.0) > 1e-9:
        raise ScenarioError("joint", f"entries must sum to 1 within 1e-9, got {joint.sum()!r}")

    real_values = {}
    raw_real = obj.get("real_values", {})
    if not isinstance(raw_real, dict):
        raise ScenarioError("real_values", "must be an object mapping variable to numbers")
    for name, vals in raw_real.items():
        if name not in names:
            raise ScenarioError("real_values", f"unknown variable {name!r}")
        var = next(v for v in variables if v.name == name)
        if not isinstance(vals, list) or len(vals) != var.size:
            raise ScenarioError(
                f"real_values.{name}", f"needs one number per symbol ({var.size})"
            )
        try:
            arr = [float(x) for x in vals]
        except (TypeError, ValueError):
            raise ScenarioError(f"real_values.{name}", "entries must be numbers") from None
        real_values[name] = tuple(arr)

    raw_queries = obj["queries"]
    if not isinstance(raw_queries, list) or not raw_queries:
        raise ScenarioError("queries", "must be a non-empty list")
    queries = []
    for i, rq in enumerate(raw_queries):
        where = f"queries[{i}]"
        if not isinstance(rq, dict):
            raise ScenarioError(where, "each query must be an object")
        for key in ("quantity", "target", "loss"):
            if key not in rq:
                raise ScenarioError(f"{where}.{key}", "missing mandatory field")
        quantity = rq["quantity"]
        if quantity not in QUANTITIES:
            raise ScenarioError(
                f"{where}.quantity", f"must be one of {QUANTITIES}, got {quantity!r}"
            )
        target = rq["target"]
        if target not in names:
            raise ScenarioError(f"{where}.target", f"unknown variable {target!r}")
        loss_spec = _parse_loss(rq["loss"], where)

        def _var_list(key, required=False):
            if key not in rq:
                if required:
                    raise ScenarioError(f"{where}.{key}", "missing mandatory field")
                return ()
            val = rq[key]
            if not isinstance(val, list):
                raise ScenarioError(f"{where}.{key}", "must be a list of variable names")
            for nm in val:
                if nm not in names:
                    raise ScenarioError(f"{where}.{key}", f"unknown variable {nm!r}")
            return tuple(val)

        given = _var_list("given", required=quantity in ("H_cond", "I", "I_cond"))
        conditioned_on = _var_list("conditioned_on")
        from_vars = _var_list("from")
        to_vars = _var_list("to", required=quantity == "U")
        queries.append(
            Query(
                quantity=quantity,
                target=target,
                loss=loss_spec,
                given=given,
                conditioned_on=conditioned_on,
                from_vars=from_vars,
                to_vars=to_vars,
            )
        )

    scenario = Scenario(
        variables=tuple(variables),
        joint=joint,
        queries=tuple(queries),
        real_values=real_values,
    )
    # embeddings must exist for losses that need them; surface this at parse time
    for i, q in enumerate(scenario.queries):
        if q.loss.name in ("square", "bregman") and q.target not in real_values:
            raise ScenarioError(
                f"queries[{i}].loss",
                f"loss {q.loss.name!r} needs real_values for variable {q.target!r}",
            )
    return scenario


def load_scenario(path) -> Scenario:
    p = Path(path)
    try:
        text = p.read_text()
    except OSError as exc:
        raise ScenarioError("scenario", f"cannot read {p}: {exc}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ScenarioError("scenario", f"invalid JSON at line {exc.lineno}: {exc.msg}") from exc
    return parse_scenario(obj)
