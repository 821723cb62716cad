"""Propagation + nogood-learning search over a compiled timetabling model.

Domains are Python ints used as bitsets over global slots. Literals are
assignment equalities ``var = slot`` packed as ``var * n_slots + slot``.
Every value removal stores the set of true literals that caused it, which
gives the implication graph walked by first-UIP conflict analysis.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from enum import Enum

from .model import CompiledModel, Kind

DECISION = ("decision", -1)
ROOT = ("root", -1)
BRANCH = ("branch", -1)  # refuted decision under chronological backtracking


class Status(str, Enum):
    SAT = "SAT"
    UNSAT = "UNSAT"
    TIMEOUT = "TIMEOUT"


class RootConflict(Exception):
    """Conflict at decision level 0: the model has no solution."""


@dataclass(frozen=True)
class SolverConfig:
    learning: bool = True
    restart_policy: str = "luby"  # "luby" or "none"
    luby_base: int = 100
    heuristic: str = "minDomain"  # or "inputOrder"
    value_order: str = "lowestSlot"
    timeout_millis: int = 300_000
    seed: int = 0
    nogood_cap: int = 10_000

    def __post_init__(self):
        if self.restart_policy not in ("luby", "none"):
            raise ValueError(f"unknown restart policy {self.restart_policy!r}")
        if self.heuristic not in ("minDomain", "inputOrder"):
            raise ValueError(f"unknown heuristic {self.heuristic!r}")
        if self.value_order != "lowestSlot":
            raise ValueError("only the lowestSlot value order is supported")
        if self.luby_base < 1:
            raise ValueError("luby_base must be >= 1")
        if self.timeout_millis < 1:
            raise ValueError("timeout_millis must be >= 1")


@dataclass
class SolveStats:
    nodes: int = 0
    conflicts: int = 0
    propagations: int = 0
    learned_nogoods: int = 0
    max_backjump: int = 0
    restarts: int = 0
    wall_millis: float = 0.0

    def as_dict(self, with_time: bool = True) -> dict:
        d = {
            "nodes": self.nodes,
            "conflicts": self.conflicts,
            "propagations": self.propagations,
            "learnedNogoods": self.learned_nogoods,
            "maxBackjump": self.max_backjump,
            "restarts": self.restarts,
        }
        if with_time:
            d["wallMillis"] = round(self.wall_millis, 3)
        return d


@dataclass
class SolveOutcome:
    status: Status
    assignment: dict[int, int] | None
    stats: SolveStats

    @property
    def is_sat(self) -> bool:
        return self.status is Status.SAT


@dataclass
class Nogood:
    lits: list[int]
    source: tuple
    activity: float = 0.0
    deleted: bool = False


@dataclass(frozen=True)
class Conflict:
    """Propagation failure; ``lits`` are true literals that jointly cannot hold."""

    lits: frozenset[int]


@dataclass
class SearchState:
    domains: list[int]
    value: list[int]
    level_of: list[int]
    order_of: list[int]
    is_decision: list[bool]
    reasons: list[list]
    trail: list[tuple] = field(default_factory=list)  # (var, removed mask, source, level)
    trail_lim: list[int] = field(default_factory=list)
    assigned: list[int] = field(default_factory=list)
    assigned_lim: list[int] = field(default_factory=list)
    decisions: list[tuple[int, int, int]] = field(default_factory=list)  # (var, slot, level)
    queue: list[int] = field(default_factory=list)
    qhead: int = 0
    stamp: int = 0

    @property
    def level(self) -> int:
        return len(self.trail_lim)


def luby(i: int) -> int:
    """i-th term (1-based) of the Luby sequence 1,1,2,1,1,2,4,..."""
    k = 1
    while (1 << k) - 1 < i:
        k += 1
    while i != (1 << k) - 1:
        i -= (1 << (k - 1)) - 1
        k = 1
        while (1 << k) - 1 < i:
            k += 1
    return 1 << (k - 1)


def _bits(mask: int):
    while mask:
        low = mask & -mask
        yield low.bit_length() - 1
        mask ^= low


class Solver:
    def __init__(self, model: CompiledModel, config: SolverConfig | None = None):
        self.model = model
        self.config = config or SolverConfig()
        grid = model.grid
        self.n_slots = G = grid.global_slots
        T = grid.slots_per_day
        n = len(model.vars)
        self.n = n
        self.root = [v.mask for v in model.vars]
        self.rooms = model.room_count

        self.day_of = [g // T for g in range(G)]
        # before_day[d]: slots on days strictly before d, for d in 0..days
        self.before_day = [(1 << (d * T)) - 1 for d in range(grid.days + 1)]
        self.days = grid.days

        self.neighbors: list[list[tuple[int, tuple]]] = [[] for _ in range(n)]
        self.chain: list[tuple | None] = [None] * n  # (sibling vars, position, source)
        self.cap_source = ROOT
        class_of = [v.class_index for v in model.vars]
        seen = [set() for _ in range(n)]
        for idx, c in enumerate(model.constraints):
            src = ("constraint", idx)
            if c.kind is Kind.ENTITY_NO_OVERLAP:
                for u in c.scope:
                    for w in c.scope:
                        if class_of[u] != class_of[w] and w not in seen[u]:
                            seen[u].add(w)
                            self.neighbors[u].append((w, src))
            elif c.kind is Kind.OCCURRENCE_ORDERING:
                for pos, v in enumerate(c.scope):
                    self.chain[v] = (c.scope, pos, src)
            elif c.kind is Kind.SLOT_CARDINALITY:
                self.cap_source = src

        self.state = SearchState(
            domains=list(self.root),
            value=[-1] * n,
            level_of=[0] * n,
            order_of=[0] * n,
            is_decision=[False] * n,
            reasons=[[None] * G for _ in range(n)],
        )
        self.slot_vars: list[list[int]] = [[] for _ in range(G)]
        self.watches: list[list[Nogood]] = [[] for _ in range(n * G)]
        self.lit_var = [x // G for x in range(n * G)]
        self.lit_slot = [x % G for x in range(n * G)]
        self.nogoods: list[Nogood] = []
        self.learned: list[Nogood] = []
        self.activity_inc = 1.0
        self.stats = SolveStats()

    # ------------------------------------------------------------------
    # literal helpers
    # ------------------------------------------------------------------

    def lit(self, var: int, slot: int) -> int:
        return var * self.n_slots + slot

    def unlit(self, lit: int) -> tuple[int, int]:
        return divmod(lit, self.n_slots)

    def decode(self, lits) -> frozenset[tuple[int, int]]:
        return frozenset(divmod(x, self.n_slots) for x in lits)

    # ------------------------------------------------------------------
    # trail primitives
    # ------------------------------------------------------------------

    def _assign(self, v: int, s: int) -> None:
        st = self.state
        st.value[v] = s
        st.level_of[v] = len(st.trail_lim)
        st.stamp += 1
        st.order_of[v] = st.stamp
        st.assigned.append(v)
        st.queue.append(v)
        self.slot_vars[s].append(v)

    def _remove(self, v: int, mask: int, source: tuple, lits: tuple) -> Conflict | None:
        """Remove ``mask`` from v's domain because all of ``lits`` hold."""
        st = self.state
        dom = st.domains[v]
        rem = dom & mask
        if not rem:
            return None
        dom ^= rem
        st.domains[v] = dom
        st.trail.append((v, rem, source, len(st.trail_lim)))
        self.stats.propagations += 1
        reason = (source, lits)
        rs = st.reasons[v]
        m = rem
        while m:
            low = m & -m
            rs[low.bit_length() - 1] = reason
            m ^= low
        if not dom:
            return Conflict(frozenset(self._wipeout_lits(v)))
        if st.value[v] < 0 and not dom & (dom - 1):
            self._assign(v, dom.bit_length() - 1)
        return None

    def _wipeout_lits(self, v: int) -> set[int]:
        rs = self.state.reasons[v]
        out: set[int] = set()
        for g in _bits(self.root[v]):
            out.update(rs[g][1])
        return out

    def decide(self, v: int, s: int) -> Conflict | None:
        """Open a new decision level and set v = s (no propagation)."""
        st = self.state
        st.trail_lim.append(len(st.trail))
        st.assigned_lim.append(len(st.assigned))
        level = len(st.trail_lim)
        st.decisions.append((v, s, level))
        self._assign(v, s)
        st.is_decision[v] = True
        return self._remove(v, st.domains[v] & ~(1 << s), DECISION, (self.lit(v, s),))

    def backtrack(self, level: int) -> None:
        st = self.state
        if st.level <= level:
            return
        dom = st.domains
        tl = st.trail_lim[level]
        trail = st.trail
        for i in range(len(trail) - 1, tl - 1, -1):
            v, rem, _, _ = trail[i]
            dom[v] |= rem
        del trail[tl:]
        al = st.assigned_lim[level]
        value, is_dec, slot_vars = st.value, st.is_decision, self.slot_vars
        for i in range(len(st.assigned) - 1, al - 1, -1):
            v = st.assigned[i]
            slot_vars[value[v]].pop()
            value[v] = -1
            is_dec[v] = False
        del st.assigned[al:]
        del st.trail_lim[level:]
        del st.assigned_lim[level:]
        while st.decisions and st.decisions[-1][2] > level:
            st.decisions.pop()
        st.queue.clear()
        st.qhead = 0

    # ------------------------------------------------------------------
    # propagation
    # ------------------------------------------------------------------

    def propagate(self) -> Conflict | None:
        """Run all pending assignments to a fixpoint; return a Conflict on wipeout."""
        st = self.state
        G = self.n_slots
        value, dom = st.value, st.domains
        neighbors, chain, day_of = self.neighbors, self.chain, self.day_of
        before_day, n_days = self.before_day, self.days
        rooms, slot_vars, watches = self.rooms, self.slot_vars, self.watches
        remove = self._remove
        q = st.queue
        while st.qhead < len(q):
            v = q[st.qhead]
            st.qhead += 1
            s = value[v]
            if s < 0:
                continue
            lit = v * G + s
            bit = 1 << s
            because = (lit,)

            for u, src in neighbors[v]:
                if dom[u] & bit:
                    c = remove(u, bit, src, because)
                    if c is not None:
                        return c

            ch = chain[v]
            if ch is not None:
                sibs, pos, src = ch
                d = day_of[s]
                for j, u in enumerate(sibs):
                    if j < pos:
                        # occurrence j must sit on a day <= d - (pos - j)
                        lim = d - (pos - j)
                        mask = dom[u] & ~before_day[lim + 1] if lim >= 0 else dom[u]
                    elif j > pos:
                        # occurrence j must sit on a day >= d + (j - pos)
                        lim = d + (j - pos)
                        mask = dom[u] & before_day[lim] if lim <= n_days else dom[u]
                    else:
                        continue
                    if mask:
                        c = remove(u, mask, src, because)
                        if c is not None:
                            return c

            occupants = slot_vars[s]
            if len(occupants) > rooms:
                return Conflict(frozenset(x * G + s for x in occupants))
            if len(occupants) == rooms:
                full = tuple(x * G + s for x in occupants)
                src = self.cap_source
                for u in range(self.n):
                    if value[u] < 0 and dom[u] & bit:
                        c = remove(u, bit, src, full)
                        if c is not None:
                            return c

            ws = watches[lit]
            if ws:
                c = self._propagate_watches(lit, ws)
                if c is not None:
                    return c
        return None

    def _propagate_watches(self, lit: int, ws: list[Nogood]) -> Conflict | None:
        st = self.state
        value, dom = st.value, st.domains
        lit_var, lit_slot = self.lit_var, self.lit_slot
        watches = self.watches
        keep: list[Nogood] = []
        conflict = None
        i = 0
        n = len(ws)
        while i < n:
            ng = ws[i]
            i += 1
            if ng.deleted:
                continue
            L = ng.lits
            if L[0] == lit:
                L[0] = L[1]
                L[1] = lit
            other = L[0]
            ov = lit_var[other]
            os_ = lit_slot[other]
            if not dom[ov] >> os_ & 1:
                keep.append(ng)  # already satisfied
                continue
            for k in range(2, len(L)):
                x = L[k]
                if value[lit_var[x]] != lit_slot[x]:
                    L[1] = x
                    L[k] = lit
                    watches[x].append(ng)
                    break
            else:
                keep.append(ng)
                if value[ov] == os_:
                    conflict = Conflict(frozenset(L))
                else:
                    conflict = self._remove(ov, 1 << os_, ng.source, tuple(L[1:]))
                if conflict is not None:
                    keep.extend(ws[i:])
                    break
        watches[lit] = keep
        return conflict

    # ------------------------------------------------------------------
    # branching
    # ------------------------------------------------------------------

    def next_decision(self) -> tuple[int, int] | None:
        st = self.state
        value, dom = st.value, st.domains
        best, best_size = -1, 1 << 30
        if self.config.heuristic == "inputOrder":
            for v in range(self.n):
                if value[v] < 0:
                    best = v
                    break
        else:
            for v in range(self.n):
                if value[v] < 0:
                    size = dom[v].bit_count()
                    if size < best_size:
                        best, best_size = v, size
                        if size == 2:
                            break
        if best < 0:
            return None
        d = dom[best]
        return best, (d & -d).bit_length() - 1

    # ------------------------------------------------------------------
    # conflict analysis
    # ------------------------------------------------------------------

    def _implied_reason(self, lit: int) -> set[int]:
        v, s = divmod(lit, self.n_slots)
        rs = self.state.reasons[v]
        out: set[int] = set()
        for g in _bits(self.root[v] & ~(1 << s)):
            src, lits = rs[g]
            out.update(lits)
            self._bump_source(src)
        return out

    def _bump_source(self, src: tuple) -> None:
        if src[0] == "nogood":
            ng = self.nogoods[src[1]]
            ng.activity += self.activity_inc
            if ng.activity > 1e100:
                for x in self.learned:
                    x.activity *= 1e-100
                self.activity_inc *= 1e-100

    def analyze_conflict(self, conflict: Conflict) -> tuple[Nogood, int]:
        """First-UIP resolution over the implication graph.

        Returns the learned nogood (not yet attached) and the level to jump
        back to. Raises RootConflict if the conflict does not depend on any
        decision.
        """
        st = self.state
        G = self.n_slots
        level_of, order_of, is_dec = st.level_of, st.order_of, st.is_decision
        current = st.level
        lits = {x for x in conflict.lits if level_of[x // G] > 0}
        if current == 0 or not lits:
            raise RootConflict()
        top = max(level_of[x // G] for x in lits)
        if top < current:
            raise AssertionError("conflict explanation has no literal at the current level")
        while True:
            at_top = [x for x in lits if level_of[x // G] == current]
            if len(at_top) == 1:
                break
            p = max(at_top, key=lambda x: order_of[x // G])
            if is_dec[p // G]:
                raise AssertionError("decision literal is not the latest at its level")
            lits.discard(p)
            lits.update(x for x in self._implied_reason(p) if level_of[x // G] > 0)
        uip = at_top[0]
        rest = sorted(lits - {uip}, key=lambda x: (-level_of[x // G], x))
        back = level_of[rest[0] // G] if rest else 0
        return Nogood(lits=[uip, *rest], source=("nogood", -1)), back

    def add_nogood(self, ng: Nogood) -> Conflict | None:
        """Store a learned nogood after backjumping and assert its UIP literal."""
        idx = len(self.nogoods)
        ng.source = ("nogood", idx)
        ng.activity = self.activity_inc
        self.nogoods.append(ng)
        self.stats.learned_nogoods += 1
        uip = ng.lits[0]
        v, s = divmod(uip, self.n_slots)
        if len(ng.lits) >= 2:
            self.watches[uip].append(ng)
            self.watches[ng.lits[1]].append(ng)
            self.learned.append(ng)
        return self._remove(v, 1 << s, ng.source, tuple(ng.lits[1:]))

    def _reduce_db(self) -> None:
        live = [ng for ng in self.learned if not ng.deleted]
        if len(live) <= self.config.nogood_cap:
            self.learned = live
            return
        live.sort(key=lambda ng: ng.activity)
        cut = len(live) - self.config.nogood_cap // 2
        for ng in live[:cut]:
            ng.deleted = True
        self.learned = live[cut:]

    # ------------------------------------------------------------------
    # top level
    # ------------------------------------------------------------------

    def _root_setup(self) -> Conflict | None:
        """Level-0 bounds on occurrence days, then pick up singleton domains."""
        st = self.state
        seen = set()
        for v in range(self.n):
            ch = self.chain[v]
            if ch is None or ch[0] in seen:
                continue
            sibs, _, src = ch
            seen.add(sibs)
            k = len(sibs)
            for pos, u in enumerate(sibs):
                lo, hi = pos, self.days - k + pos
                full = self.before_day[self.days]
                mask = self.before_day[lo] | (full ^ self.before_day[hi + 1])
                c = self._remove(u, mask, ROOT, ())
                if c is not None:
                    return c
        for v in range(self.n):
            d = st.domains[v]
            if st.value[v] < 0 and d and not d & (d - 1):
                self._assign(v, d.bit_length() - 1)
        return None

    def solve(self) -> SolveOutcome:
        cfg = self.config
        stats = self.stats
        st = self.state
        start = time.perf_counter()
        deadline = start + cfg.timeout_millis / 1000.0
        restarts_on = cfg.learning and cfg.restart_policy == "luby"
        restart_idx = 1
        restart_limit = cfg.luby_base * luby(restart_idx)
        since_restart = 0

        def finish(status: Status) -> SolveOutcome:
            stats.wall_millis = (time.perf_counter() - start) * 1000.0
            assignment = None
            if status is Status.SAT:
                assignment = {v: st.value[v] for v in range(self.n)}
            return SolveOutcome(status, assignment, stats)

        if self.n == 0:
            return finish(Status.SAT)
        conflict = self._root_setup()
        while True:
            if conflict is None:
                conflict = self.propagate()
            if conflict is not None:
                stats.conflicts += 1
                since_restart += 1
                if stats.conflicts & 255 == 0 and time.perf_counter() > deadline:
                    return finish(Status.TIMEOUT)
                if st.level == 0:
                    return finish(Status.UNSAT)
                if cfg.learning:
                    try:
                        ng, back = self.analyze_conflict(conflict)
                    except RootConflict:
                        return finish(Status.UNSAT)
                    stats.max_backjump = max(stats.max_backjump, st.level - back)
                    self.backtrack(back)
                    conflict = self.add_nogood(ng)
                    self.activity_inc /= 0.95
                    if len(self.learned) > cfg.nogood_cap:
                        self._reduce_db()
                else:
                    conflict = self._refute_last_decision()
                    if conflict is False:
                        return finish(Status.UNSAT)
                continue

            if restarts_on and since_restart >= restart_limit:
                since_restart = 0
                restart_idx += 1
                restart_limit = cfg.luby_base * luby(restart_idx)
                stats.restarts += 1
                self.backtrack(0)
                continue

            choice = self.next_decision()
            if choice is None:
                return finish(Status.SAT)
            stats.nodes += 1
            if stats.nodes & 255 == 0 and time.perf_counter() > deadline:
                return finish(Status.TIMEOUT)
            conflict = self.decide(*choice)

    def _refute_last_decision(self):
        """Chronological backtracking: undo the newest level and forbid its decision."""
        st = self.state
        if st.level == 0:
            return False
        v, s, level = st.decisions[-1]
        self.backtrack(level - 1)
        return self._remove(v, 1 << s, BRANCH, ())


def solve(model: CompiledModel, config: SolverConfig | None = None) -> SolveOutcome:
    return Solver(model, config).solve()
