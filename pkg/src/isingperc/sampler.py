"""Heat-bath dynamics, the monotone grand coupling, and coupling from the past.

Randomness is organized in slots: slot ``t`` (t >= 1) holds one uniform per
updatable site for a single raster sweep.  Slots come from a Philox stream
keyed by ``(seed, replica, tag)``; each slot is padded to a multiple of four
doubles so that any slot can be reached with ``Philox.advance`` without
generating the ones before it.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .lattice import LatticeGraph, half_plane
from .model import (Configuration, ModelError, SpinModel, check_model_for_sampling,
                    site_tables, validate_H1, violations)

__all__ = [
    "BoundaryCondition", "make_dobrushin_bc", "PLUS", "MINUS", "Sampler",
    "ChainState", "CoupledPair", "NoCoalescence", "InvariantBreach",
    "SamplingError", "heatbath_sweep", "coupled_sweep", "cftp_sample",
    "sample_batch", "DEFAULT_CAP",
]

DEFAULT_CAP = 1 << 20
TAG_CFTP = 0
TAG_CHAIN = 1
_CHUNK = 64
_STARTS = ("plus", "minus", "bc")


class SamplingError(RuntimeError):
    pass


class NoCoalescence(SamplingError):
    def __init__(self, msg, diagnostics=None):
        super().__init__(msg)
        self.diagnostics = diagnostics or {}


class InvariantBreach(SamplingError):
    def __init__(self, msg, site=None):
        super().__init__(msg)
        self.site = site


# --------------------------------------------------------------------------
# boundary conditions


_ORIENTATIONS = ("up", "down", "left", "right")


@dataclass(frozen=True)
class BoundaryCondition:
    """Spins on the ring of non-interior window sites.

    ``dobrushin`` puts +1 on the ring sites of the half-plane ``x2 >= k``
    (orientation 'up') or ``x1 >= k`` ('right'); 'down' and 'left' are the
    exact negations.  With ``fill_lower`` the interior sites on the minus
    side are frozen at -1 as well.  ``custom`` takes a full-length array:
    ring entries must be +-1, nonzero interior entries are frozen and zero
    entries are free.
    """

    kind: str
    orientation: str = "up"
    k: int = 0
    values: tuple | None = None
    fill_lower: bool = False

    def __post_init__(self):
        if self.kind not in ("plus", "minus", "dobrushin", "custom"):
            raise ValueError(f"unknown boundary condition kind {self.kind!r}")
        if self.kind == "dobrushin" and self.orientation not in _ORIENTATIONS:
            raise ValueError(f"orientation must be one of {_ORIENTATIONS}")
        if self.kind == "custom" and self.values is None:
            raise ValueError("custom boundary condition needs values")

    @property
    def label(self) -> str:
        if self.kind == "dobrushin":
            fill = ",filled" if self.fill_lower else ""
            return f"dobrushin({self.orientation},{self.k}{fill})"
        return self.kind

    def plus_side(self, g: LatticeGraph) -> np.ndarray:
        """Sites on the +1 side of a Dobrushin condition."""
        if self.orientation in ("up", "down"):
            up = half_plane(g, "up", self.k).sites
        else:
            up = half_plane(g, "right", self.k).sites
        return up if self.orientation in ("up", "right") else ~up

    def spins(self, g: LatticeGraph) -> np.ndarray:
        """Full-length array; ring entries hold the boundary values.

        Interior entries hold the frozen value where applicable and 0 where
        the spin is free.
        """
        out = np.zeros(g.n_sites, dtype=np.int8)
        ring = g.ring
        if self.kind == "plus":
            out[ring] = 1
        elif self.kind == "minus":
            out[ring] = -1
        elif self.kind == "dobrushin":
            plus = self.plus_side(g)
            out[ring] = np.where(plus[ring], 1, -1)
            if self.fill_lower:
                out[~ring & ~plus] = -1
        else:
            vals = np.asarray(self.values, dtype=np.int8)
            if vals.shape != (g.n_sites,):
                raise ValueError("custom boundary values must cover every window site")
            if not np.all(np.abs(vals[ring]) == 1):
                raise ValueError("custom boundary values must be +-1 on the ring")
            if not np.all(np.abs(vals) <= 1):
                raise ValueError("custom boundary values must be -1, 0 or +1")
            out[:] = vals
        return out

    def flipped(self) -> "BoundaryCondition":
        """The spin-flipped boundary condition."""
        if self.kind == "plus":
            return MINUS
        if self.kind == "minus":
            return PLUS
        if self.kind == "dobrushin":
            opp = {"up": "down", "down": "up", "left": "right", "right": "left"}
            return BoundaryCondition("dobrushin", opp[self.orientation], self.k,
                                     fill_lower=self.fill_lower)
        return BoundaryCondition("custom", values=tuple(-np.asarray(self.values)))


PLUS = BoundaryCondition("plus")
MINUS = BoundaryCondition("minus")


def make_dobrushin_bc(g: LatticeGraph, orientation: str = "up", k: int = 0,
                      fill_lower: bool = False) -> BoundaryCondition:
    bc = BoundaryCondition("dobrushin", orientation, k, fill_lower=fill_lower)
    plus = bc.plus_side(g)
    if plus.all() or not plus.any():
        raise ValueError(f"level line {orientation} k={k} does not split the window")
    return bc


# --------------------------------------------------------------------------
# sampler


def _key(seed: int, replica: int, tag: int) -> np.ndarray:
    ss = np.random.SeedSequence([int(seed) & 0xFFFFFFFFFFFFFFFF, int(replica), int(tag)])
    return ss.generate_state(2, dtype=np.uint64)


@dataclass
class ChainState:
    config: Configuration
    t: int = 0
    seed: int = 0
    replica: int = 0


@dataclass
class CoupledPair:
    lo: Configuration
    hi: Configuration
    t: int = 0
    seed: int = 0
    replica: int = 0


@dataclass
class CFTPInfo:
    T: int
    rounds: int


class Sampler:
    """Precomputed update order and probability tables for (model, window, bc)."""

    def __init__(self, model: SpinModel, g: LatticeGraph, bc: BoundaryCondition = PLUS,
                 backend: str | None = None):
        self.model = model
        self.g = g
        self.bc = bc
        self.attractive = bool(validate_H1(model))
        self.boundary = bc.spins(g)
        free = g.interior & (self.boundary == 0)
        self.order = np.flatnonzero(free).astype(np.int32)
        self.n = len(self.order)
        self.n_pad = (self.n + 3) // 4 * 4
        self.tbl_ptr, self.table = site_tables(model, g, self.order)
        self.kern = _kernels.get(backend)
        # Start of the doubling sequence for the next CFTP call.  The output
        # does not depend on it: once the extremes coalesce from time -T they
        # coalesce from every earlier time, to the same configuration.
        self.t_hint = 1

    # --- randomness
    def slots(self, seed: int, replica: int, first: int, count: int,
              tag: int = TAG_CFTP) -> np.ndarray:
        """Uniforms for slots ``first .. first+count-1`` as a (count, n) array."""
        bg = np.random.Philox(key=_key(seed, replica, tag))
        if first > 1:
            bg.advance((first - 1) * self.n_pad // 4)
        u = np.random.Generator(bg).random(count * self.n_pad)
        return np.ascontiguousarray(u.reshape(count, self.n_pad)[:, :self.n])

    # --- configurations
    def extreme(self, sign: int) -> np.ndarray:
        s = self.boundary.copy()
        s[self.order] = sign
        return s

    def wrap(self, spins) -> Configuration:
        return Configuration(self.g, spins, self.bc.label)

    def _run(self, spins, u):
        status, site = self.kern.sweeps(spins, self.order, self.g.nbr_ptr, self.g.nbr_idx,
                                        self.tbl_ptr, self.table, u)
        self._check(status, site)

    def _run_coupled(self, lo, hi, u, check=True):
        status, site = self.kern.coupled_sweeps(lo, hi, self.order, self.g.nbr_ptr,
                                                self.g.nbr_idx, self.tbl_ptr, self.table,
                                                u, check)
        self._check(status, site)

    def _check(self, status, site):
        if status == _kernels.INADMISSIBLE:
            raise InvariantBreach(
                f"both spin values forbidden at {self.g.point(site)} (inadmissible context)", site)
        if status == _kernels.ORDER_VIOLATION:
            raise InvariantBreach(
                f"monotone coupling order violated at {self.g.point(site)}", site)

    # --- exact sampling
    def cftp(self, seed: int, replica: int = 0, cap: int = DEFAULT_CAP,
             return_info: bool = False):
        if not self.attractive:
            raise ModelError(f"{self.model.name} is not attractive; CFTP needs (H1)")
        if self.n == 0:
            c = self.wrap(self.boundary.copy())
            return (c, CFTPInfo(0, 0)) if return_info else c
        T = max(1, min(self.t_hint, cap))
        rounds = 0
        while True:
            rounds += 1
            lo, hi = self.extreme(-1), self.extreme(1)
            # slots T, T-1, ..., 1 in that order
            top = T
            while top >= 1:
                first = max(1, top - _CHUNK + 1)
                u = self.slots(seed, replica, first, top - first + 1)
                self._run_coupled(lo, hi, np.ascontiguousarray(u[::-1]))
                top = first - 1
            if np.array_equal(lo, hi):
                # decay after a first-round success so one slow sample does not
                # set the cost of every later one
                self.t_hint = max(1, T // 2) if rounds == 1 else T
                c = self.wrap(lo)
                return (c, CFTPInfo(T, rounds)) if return_info else c
            if 2 * T > cap:
                diff = int(np.count_nonzero(lo != hi))
                raise NoCoalescence(
                    f"no coalescence after T={T} sweeps ({diff} sites still differ)",
                    {"T": T, "differing_sites": diff, "n_sites": self.n,
                     "model": self.model.name, "bc": self.bc.label})
            T *= 2

    # --- approximate sampling
    def chain(self, seed: int, replica: int, sweeps: int, start: str = "plus") -> Configuration:
        """Run a forward chain for ``sweeps`` sweeps.

        ``start`` is 'plus' or 'minus' (extreme interiors) or 'bc' (every
        free site copies the side of the boundary condition it lies on).
        """
        if start not in _STARTS:
            raise ValueError(f"start must be one of {_STARTS}")
        if start == "bc" and self.bc.kind == "dobrushin":
            spins = self.boundary.copy()
            spins[self.order] = np.where(self.bc.plus_side(self.g)[self.order], 1, -1)
        elif start == "bc":
            spins = self.extreme(-1 if self.bc.kind == "minus" else 1)
        else:
            spins = self.extreme(1 if start == "plus" else -1)
        done = 0
        while done < sweeps:
            k = min(_CHUNK, sweeps - done)
            self._run(spins, self.slots(seed, replica, done + 1, k, TAG_CHAIN))
            done += k
        return self.wrap(spins)


def heatbath_sweep(state: ChainState, m: SpinModel, g: LatticeGraph,
                   bc: BoundaryCondition = PLUS, sampler: Sampler | None = None) -> ChainState:
    """One raster sweep of the free sites using the next slot of the chain stream."""
    s = sampler or Sampler(m, g, bc)
    spins = state.config.spins.copy()
    if not np.array_equal(spins[g.ring], s.boundary[g.ring]):
        raise ValueError("state ring does not match the boundary condition")
    s._run(spins, s.slots(state.seed, state.replica, state.t + 1, 1, TAG_CHAIN))
    return ChainState(Configuration(g, spins, state.config.label), state.t + 1,
                      state.seed, state.replica)


def coupled_sweep(pair: CoupledPair, m: SpinModel, g: LatticeGraph,
                  bc: BoundaryCondition = PLUS, sampler: Sampler | None = None,
                  n_sweeps: int = 1) -> CoupledPair:
    """Advance both chains with shared uniforms; raise on any order violation."""
    check_model_for_sampling(m)
    if np.any(pair.lo.spins > pair.hi.spins):
        raise ValueError("coupled pair must start with lo <= hi")
    s = sampler or Sampler(m, g, bc)
    lo, hi = pair.lo.spins.copy(), pair.hi.spins.copy()
    done = 0
    while done < n_sweeps:
        k = min(_CHUNK, n_sweeps - done)
        s._run_coupled(lo, hi, s.slots(pair.seed, pair.replica, pair.t + done + 1, k, TAG_CHAIN))
        done += k
    return CoupledPair(Configuration(g, lo), Configuration(g, hi), pair.t + n_sweeps,
                       pair.seed, pair.replica)


def cftp_sample(m: SpinModel, g: LatticeGraph, bc: BoundaryCondition, seed: int,
                replica: int = 0, cap: int = DEFAULT_CAP) -> Configuration:
    return Sampler(m, g, bc).cftp(seed, replica, cap)


@dataclass(frozen=True)
class Mode:
    """Sampling mode: exact CFTP, or a fixed sweep budget from an extreme start."""

    kind: str = "exact"
    sweeps: int = 0
    start: str = "plus"
    cap: int = DEFAULT_CAP

    def __post_init__(self):
        if self.kind not in ("exact", "sweeps"):
            raise ValueError("mode must be 'exact' or 'sweeps'")
        if self.start not in _STARTS:
            raise ValueError(f"start must be one of {_STARTS}")
        if self.kind == "sweeps" and self.sweeps < 1:
            raise ValueError("sweep budget must be positive")

    @property
    def label(self) -> str:
        return "exact" if self.kind == "exact" else f"sweeps={self.sweeps},start={self.start}"


EXACT = Mode()


def sample_batch(m: SpinModel, g: LatticeGraph, bc: BoundaryCondition, n_samples: int,
                 mode: Mode = EXACT, seed: int = 0, first: int = 0,
                 workers: int | None = None, sampler: Sampler | None = None,
                 check_admissible: bool = True) -> list:
    """Samples ``first .. first+n_samples-1``; sample i depends only on (seed, i)."""
    if n_samples <= 0:
        return []
    s = sampler or Sampler(m, g, bc)

    def one(i):
        if mode.kind == "exact":
            c = s.cftp(seed, i, mode.cap)
        else:
            c = s.chain(seed, i, mode.sweeps, mode.start)
        if check_admissible and m.has_hard_constraints:
            bad = violations(m, c)
            interior_bad = [e for e in bad if g.interior[e[0]] or g.interior[e[1]]]
            if interior_bad:
                raise InvariantBreach(f"sample {i} violates the exclusion at {interior_bad[0]}",
                                      interior_bad[0][0])
        return c

    idx = range(first, first + n_samples)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as ex:
            return list(ex.map(one, idx))
    return [one(i) for i in idx]


__all__ += ["Mode", "EXACT", "CFTPInfo"]
