"""Partial deterministic Mealy machines and abstract observation samples.

The machine model is deliberately minimal: states are dense integers with the
initial state fixed at 0, transitions are a partial map ``(state, input) ->
(next state, output)``, and everything is immutable after construction.
Machines are renumbered into a canonical breadth-first form when built, so
structurally equal machines compare equal and golden tests stay stable.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping, Sequence, Union

__all__ = [
    "Symbol",
    "Alphabet",
    "Observation",
    "Sample",
    "SampleSet",
    "MealyMachine",
    "RunResult",
    "UndefinedTransitionError",
    "isomorphic",
    "demo_machine",
]


@dataclass(frozen=True)
class Symbol:
    """One letter of an alphabet: a dense id plus a short human-readable label."""

    id: int
    label: str

    def __str__(self) -> str:
        return self.label


class Alphabet:
    """Ordered, immutable set of symbols.

    The construction order is canonical: it drives tie-breaking in every
    traversal (state discovery, test generation, merging).
    """

    def __init__(self, labels: Iterable[str], kind: str = "input"):
        labels = tuple(labels)
        if not labels:
            raise ValueError("alphabet must contain at least one symbol")
        if len(set(labels)) != len(labels):
            raise ValueError(f"alphabet labels must be unique, got {labels!r}")
        if kind not in ("input", "output"):
            raise ValueError(f"alphabet kind must be 'input' or 'output', got {kind!r}")
        self.kind = kind
        self.symbols: tuple[Symbol, ...] = tuple(
            Symbol(i, lab) for i, lab in enumerate(labels)
        )
        self._by_label = {s.label: s for s in self.symbols}

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(s.label for s in self.symbols)

    def symbol(self, key: Union[str, Symbol]) -> Symbol:
        """Resolve a label or foreign Symbol to this alphabet's symbol."""
        label = key.label if isinstance(key, Symbol) else key
        try:
            return self._by_label[label]
        except KeyError:
            raise ValueError(
                f"symbol {label!r} is not in {self.kind} alphabet {self.labels}"
            ) from None

    def __len__(self) -> int:
        return len(self.symbols)

    def __iter__(self) -> Iterator[Symbol]:
        return iter(self.symbols)

    def __contains__(self, key: object) -> bool:
        if isinstance(key, Symbol):
            return self._by_label.get(key.label) == key
        return key in self._by_label

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Alphabet):
            return NotImplemented
        return self.kind == other.kind and self.labels == other.labels

    def __repr__(self) -> str:
        return f"Alphabet({list(self.labels)!r}, kind={self.kind!r})"


@dataclass(frozen=True)
class Observation:
    """One input/output pair as seen at the abstract interface."""

    input: Symbol
    output: Symbol

    def __str__(self) -> str:
        return f"<{self.input.label},{self.output.label}>"


class Sample:
    """A non-empty sequence of observations from a single run, starting at q0."""

    def __init__(self, observations: Iterable[Observation]):
        obs = tuple(observations)
        if not obs:
            raise ValueError("a sample must contain at least one observation")
        self.observations = obs

    def inputs(self) -> tuple[Symbol, ...]:
        return tuple(o.input for o in self.observations)

    def outputs(self) -> tuple[Symbol, ...]:
        return tuple(o.output for o in self.observations)

    def __len__(self) -> int:
        return len(self.observations)

    def __iter__(self) -> Iterator[Observation]:
        return iter(self.observations)

    def __getitem__(self, i):
        return self.observations[i]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Sample):
            return NotImplemented
        return self.observations == other.observations

    def __repr__(self) -> str:
        return "Sample(" + "".join(str(o) for o in self.observations) + ")"


class SampleSet:
    """A collection of samples over shared input/output alphabets."""

    def __init__(
        self,
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        samples: Iterable[Sample],
        run_ids: Sequence[str] | None = None,
    ):
        self.input_alphabet = input_alphabet
        self.output_alphabet = output_alphabet
        self.samples = tuple(samples)
        for k, sample in enumerate(self.samples):
            for o in sample:
                if o.input not in input_alphabet:
                    raise ValueError(
                        f"sample {k} uses input {o.input.label!r} outside the "
                        f"declared alphabet {input_alphabet.labels}"
                    )
                if o.output not in output_alphabet:
                    raise ValueError(
                        f"sample {k} uses output {o.output.label!r} outside the "
                        f"declared alphabet {output_alphabet.labels}"
                    )
        if run_ids is not None and len(run_ids) != len(self.samples):
            raise ValueError("run_ids must match the number of samples")
        self.run_ids = tuple(run_ids) if run_ids is not None else None

    def run_id(self, index: int) -> str:
        if self.run_ids is None:
            return f"sample-{index}"
        return self.run_ids[index]

    def __len__(self) -> int:
        return len(self.samples)

    def __iter__(self) -> Iterator[Sample]:
        return iter(self.samples)


class UndefinedTransitionError(Exception):
    """A run hit a (state, input) pair the machine does not define.

    This is the normal "partial machine" outcome, distinct from usage errors
    such as foreign symbols, which raise ValueError.
    """

    def __init__(self, position: int, state: int, symbol: Symbol):
        self.position = position
        self.state = state
        self.symbol = symbol
        super().__init__(
            f"undefined transition at position {position}: "
            f"state {state} has no transition on {symbol.label!r}"
        )


@dataclass(frozen=True)
class RunResult:
    """Outcome of driving a machine with an input word."""

    outputs: tuple[Symbol, ...]
    visited: tuple[int, ...]
    traversed: frozenset[tuple[int, Symbol]]


TransitionMap = Mapping[tuple[int, Union[str, Symbol]], tuple[int, Union[str, Symbol]]]


class MealyMachine:
    """Partial deterministic Mealy machine in canonical breadth-first form.

    ``transitions`` maps ``(state, input symbol)`` to ``(next state, output
    symbol)``. On construction states are renumbered in BFS discovery order
    from the initial state (inputs expanded in alphabet order); unreachable
    states, if any, keep their relative order after the reachable ones.
    """

    def __init__(
        self,
        input_alphabet: Alphabet,
        output_alphabet: Alphabet,
        transitions: TransitionMap,
        initial: int = 0,
        states: Iterable[int] | None = None,
    ):
        self.input_alphabet = input_alphabet
        self.output_alphabet = output_alphabet

        raw: dict[tuple[int, Symbol], tuple[int, Symbol]] = {}
        state_ids = set(states) if states is not None else set()
        state_ids.add(initial)
        for (src, inp), (dst, out) in transitions.items():
            sym_in = input_alphabet.symbol(inp)
            sym_out = output_alphabet.symbol(out)
            key = (src, sym_in)
            if key in raw and raw[key] != (dst, sym_out):
                raise ValueError(
                    f"nondeterministic transitions from state {src} on "
                    f"{sym_in.label!r}"
                )
            raw[key] = (dst, sym_out)
            state_ids.add(src)
            state_ids.add(dst)
        if states is not None:
            missing = {s for pair in raw for s in (pair[0],)} - set(states)
            missing |= {d for d, _ in raw.values()} - set(states)
            if missing - {initial}:
                raise ValueError(f"transitions reference undeclared states {missing}")

        # Canonical renumbering: BFS from the initial state, inputs in
        # alphabet order; unreachable states follow in ascending old-id order.
        order: dict[int, int] = {initial: 0}
        queue = deque([initial])
        while queue:
            s = queue.popleft()
            for sym in input_alphabet:
                hit = raw.get((s, sym))
                if hit is not None and hit[0] not in order:
                    order[hit[0]] = len(order)
                    queue.append(hit[0])
        self._n_reachable = len(order)
        for s in sorted(state_ids):
            if s not in order:
                order[s] = len(order)

        self.n_states = len(order)
        self.initial = 0
        self.transitions: dict[tuple[int, Symbol], tuple[int, Symbol]] = {}
        inverse = sorted(order, key=order.get)
        for new_src, old_src in enumerate(inverse):
            for sym in input_alphabet:
                hit = raw.get((old_src, sym))
                if hit is not None:
                    self.transitions[(new_src, sym)] = (order[hit[0]], hit[1])

    @property
    def states(self) -> range:
        return range(self.n_states)

    def step(self, state: int, symbol: Union[str, Symbol]):
        """Return ``(next state, output)`` or None when undefined."""
        if state not in self.states:
            raise ValueError(f"state {state} is not in 0..{self.n_states - 1}")
        sym = self.input_alphabet.symbol(symbol)
        return self.transitions.get((state, sym))

    def run(self, symbols: Iterable[Union[str, Symbol]]) -> RunResult:
        """Drive the machine from q0; raises UndefinedTransitionError on a gap."""
        outputs: list[Symbol] = []
        visited = [self.initial]
        traversed: set[tuple[int, Symbol]] = set()
        state = self.initial
        for pos, key in enumerate(symbols):
            sym = self.input_alphabet.symbol(key)
            hit = self.transitions.get((state, sym))
            if hit is None:
                raise UndefinedTransitionError(pos, state, sym)
            traversed.add((state, sym))
            state, out = hit
            outputs.append(out)
            visited.append(state)
        return RunResult(tuple(outputs), tuple(visited), frozenset(traversed))

    def transitions_from(self, state: int) -> Iterator[tuple[Symbol, int, Symbol]]:
        """Defined transitions of one state in canonical input order."""
        for sym in self.input_alphabet:
            hit = self.transitions.get((state, sym))
            if hit is not None:
                yield sym, hit[0], hit[1]

    def reachable_states(self) -> set[int]:
        """Breadth-first closure from q0 over defined transitions."""
        seen = {self.initial}
        queue = deque([self.initial])
        while queue:
            s = queue.popleft()
            for _, dst, _ in self.transitions_from(s):
                if dst not in seen:
                    seen.add(dst)
                    queue.append(dst)
        return seen

    def defined_transitions(self) -> list[tuple[int, Symbol]]:
        """Reachable defined (state, input) pairs in (BFS state, input) order."""
        reach = sorted(self.reachable_states())
        return [
            (s, sym) for s in reach for sym, _, _ in self.transitions_from(s)
        ]

    def unreachable_transitions(self) -> list[tuple[int, Symbol]]:
        """Defined (state, input) pairs whose source q0 can never reach."""
        reach = self.reachable_states()
        return [
            (s, sym)
            for s in self.states
            if s not in reach
            for sym, _, _ in self.transitions_from(s)
        ]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, MealyMachine):
            return NotImplemented
        return (
            self.input_alphabet == other.input_alphabet
            and self.output_alphabet == other.output_alphabet
            and self.n_states == other.n_states
            and self.transitions == other.transitions
        )

    def __repr__(self) -> str:
        return (
            f"MealyMachine(states={self.n_states}, "
            f"inputs={list(self.input_alphabet.labels)}, "
            f"outputs={list(self.output_alphabet.labels)}, "
            f"transitions={len(self.transitions)})"
        )

    # -- serialization ----------------------------------------------------

    def to_json(self) -> dict:
        """JSON document: {states, initial, inputs, outputs, transitions}."""
        return {
            "states": list(self.states),
            "initial": self.initial,
            "inputs": list(self.input_alphabet.labels),
            "outputs": list(self.output_alphabet.labels),
            "transitions": [
                {"from": s, "in": sym.label, "to": dst, "out": out.label}
                for s in self.states
                for sym, dst, out in self.transitions_from(s)
            ],
        }

    @classmethod
    def from_json(cls, doc: Mapping) -> "MealyMachine":
        inputs = Alphabet(doc["inputs"], "input")
        outputs = Alphabet(doc["outputs"], "output")
        transitions = {
            (t["from"], t["in"]): (t["to"], t["out"]) for t in doc["transitions"]
        }
        return cls(
            inputs,
            outputs,
            transitions,
            initial=doc.get("initial", 0),
            states=doc.get("states"),
        )

    def to_dot(self, name: str = "mealy") -> str:
        """GraphViz export: one edge per transition labeled "in/out"."""
        lines = [f"digraph {name} {{", "  rankdir=LR;", '  __start [shape=point, label=""];']
        for s in self.states:
            lines.append(f'  q{s} [shape=circle, label="{s}"];')
        lines.append(f"  __start -> q{self.initial};")
        for s in self.states:
            for sym, dst, out in self.transitions_from(s):
                lines.append(f'  q{s} -> q{dst} [label="{sym.label}/{out.label}"];')
        lines.append("}")
        return "\n".join(lines) + "\n"


def isomorphic(a: MealyMachine, b: MealyMachine) -> bool:
    """True iff the reachable parts of a and b are identical up to state names.

    Symbols are matched by label, so the alphabets may list the same labels in
    different orders. Machines over different label sets are a usage error.
    """
    if set(a.input_alphabet.labels) != set(b.input_alphabet.labels):
        raise ValueError(
            f"input alphabets differ: {a.input_alphabet.labels} vs "
            f"{b.input_alphabet.labels}"
        )
    if set(a.output_alphabet.labels) != set(b.output_alphabet.labels):
        raise ValueError(
            f"output alphabets differ: {a.output_alphabet.labels} vs "
            f"{b.output_alphabet.labels}"
        )
    pairing = {a.initial: b.initial}
    reverse = {b.initial: a.initial}
    queue = deque([(a.initial, b.initial)])
    while queue:
        sa, sb = queue.popleft()
        for sym_a in a.input_alphabet:
            sym_b = b.input_alphabet.symbol(sym_a.label)
            hit_a = a.transitions.get((sa, sym_a))
            hit_b = b.transitions.get((sb, sym_b))
            if (hit_a is None) != (hit_b is None):
                return False
            if hit_a is None:
                continue
            (da, oa), (db, ob) = hit_a, hit_b
            if oa.label != ob.label:
                return False
            if da in pairing or db in reverse:
                if pairing.get(da) != db or reverse.get(db) != da:
                    return False
                continue
            pairing[da] = db
            reverse[db] = da
            queue.append((da, db))
    return True


def demo_machine() -> MealyMachine:
    """Three-state demo model of a localization system.

    Inputs are compass sectors (N, E, S, W; W never observed, hence
    undefined), outputs are error classes (a = non-critical, b = critical).
    Every pair of states differs on the output of at least one shared input,
    so the machine is recoverable by state-merging from rich enough samples.
    """
    inputs = Alphabet(["N", "E", "S", "W"], "input")
    outputs = Alphabet(["a", "b"], "output")
    transitions = {
        (0, "N"): (0, "a"),
        (0, "E"): (1, "b"),
        (0, "S"): (2, "a"),
        (1, "N"): (0, "a"),
        (1, "E"): (1, "b"),
        (1, "S"): (2, "b"),
        (2, "S"): (2, "a"),
        (2, "E"): (1, "a"),
    }
    return MealyMachine(inputs, outputs, transitions)
