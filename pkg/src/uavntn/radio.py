"""Association, power control, scheduling, per-PRB SINR and achievable rate.

Cell indexing is global within a drop: TN cells occupy ``[0, n_tn)`` and NTN
beams ``[n_tn, n_tn + n_ntn)``. Gains passed around here are *linear* power
gains unless a name ends in ``_db``. Powers are in mW.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

BOLTZMANN_DBM = 10.0 * math.log10(1.380649e-23) + 30.0  # dBm/K/Hz


def db_to_lin(x):
    return 10.0 ** (np.asarray(x, dtype=float) / 10.0)


def lin_to_db(x):
    return 10.0 * np.log10(np.asarray(x, dtype=float))


# ---------------------------------------------------------------- cells and association


@dataclass(frozen=True)
class CellSet:
    """Band bookkeeping for the TN cells followed by the NTN beams."""

    n_tn: int
    ntn_bands: np.ndarray = field(default_factory=lambda: np.zeros(0, dtype=int))
    # optional (n_cells, n_cells) mask: neighbors[x, y] is True when y may interfere at x
    neighbors: np.ndarray | None = None

    @property
    def n_ntn(self) -> int:
        return len(self.ntn_bands)

    @property
    def n_cells(self) -> int:
        return self.n_tn + self.n_ntn

    def is_ntn(self, x) -> np.ndarray:
        return np.asarray(x) >= self.n_tn

    @property
    def channel(self) -> np.ndarray:
        """Channel id per cell: TN cells share 0, NTN beams use 1 + band."""
        return np.concatenate([np.zeros(self.n_tn, dtype=int), 1 + np.asarray(self.ntn_bands, dtype=int)])

    def co_channel(self, x: int) -> np.ndarray:
        """Cells other than ``x`` transmitting on ``x``'s channel."""
        ch = self.channel
        ok = ch == ch[x]
        if self.neighbors is not None:
            ok &= self.neighbors[x]
        same = np.flatnonzero(ok)
        return same[same != x]


@dataclass(frozen=True)
class Association:
    serving: np.ndarray  # (n_users,) global cell index
    cells: CellSet

    @property
    def n_users(self) -> int:
        return len(self.serving)

    @property
    def ntn_mask(self) -> np.ndarray:
        return self.cells.is_ntn(self.serving)

    @property
    def tn_served(self) -> np.ndarray:
        return np.flatnonzero(~self.ntn_mask)

    @property
    def ntn_served(self) -> np.ndarray:
        return np.flatnonzero(self.ntn_mask)

    def users_of(self, x: int) -> np.ndarray:
        return np.flatnonzero(self.serving == x)

    def load(self) -> np.ndarray:
        return np.bincount(self.serving, minlength=self.cells.n_cells)


def associate_standalone_tn(gain_tn, cells: CellSet | None = None) -> Association:
    """Serve every user from the TN cell with the largest large-scale gain."""
    gain_tn = np.asarray(gain_tn, dtype=float)
    if gain_tn.ndim != 2 or gain_tn.shape[1] == 0:
        raise ValueError("association needs at least one TN cell")
    cells = cells or CellSet(n_tn=gain_tn.shape[1])
    serving = np.argmax(gain_tn, axis=1) if len(gain_tn) else np.zeros(0, dtype=int)
    return Association(serving=serving.astype(int), cells=cells)


def associate_offloaded(is_uav, gain_tn, gain_ntn, cells: CellSet | None = None) -> Association:
    """GUEs to their best TN cell, UAVs to their best NTN beam."""
    gain_tn = np.asarray(gain_tn, dtype=float)
    gain_ntn = np.asarray(gain_ntn, dtype=float)
    is_uav = np.asarray(is_uav, dtype=bool)
    if gain_tn.shape[1] == 0:
        raise ValueError("association needs at least one TN cell")
    if is_uav.any() and gain_ntn.shape[1] == 0:
        raise ValueError("offloading needs at least one NTN beam")
    n_tn = gain_tn.shape[1]
    cells = cells or CellSet(n_tn=n_tn, ntn_bands=np.zeros(gain_ntn.shape[1], dtype=int))
    serving = np.argmax(gain_tn, axis=1) if len(gain_tn) else np.zeros(0, dtype=int)
    if is_uav.any():
        serving = np.where(is_uav, n_tn + np.argmax(gain_ntn, axis=1), serving)
    return Association(serving=serving.astype(int), cells=cells)


# ---------------------------------------------------------------- power


@dataclass(frozen=True)
class PowerControl:
    p0: float = -85.0  # dBm
    alpha: float = 0.8
    p_max: float = 23.0  # dBm

    def __post_init__(self):
        if not 0.0 <= self.alpha <= 1.0:
            raise ValueError(f"alpha must lie in [0, 1], got {self.alpha}")


def ul_power(serving_gain_db, served_by_ntn=False, pc: PowerControl = PowerControl(), *, cap=True):
    """Open-loop fractional power control in dBm; NTN-served users use full power."""
    g = np.asarray(serving_gain_db, dtype=float)
    p = pc.p0 - pc.alpha * g
    if cap:
        p = np.minimum(pc.p_max, p)
    return np.where(served_by_ntn, pc.p_max, p)


@dataclass(frozen=True)
class PowerAllocation:
    dl_power_dbm: np.ndarray  # (n_cells,)
    ul_power_dbm: np.ndarray  # (n_users,)

    @property
    def dl_mw(self) -> np.ndarray:
        return db_to_lin(self.dl_power_dbm)

    @property
    def ul_mw(self) -> np.ndarray:
        return db_to_lin(self.ul_power_dbm)


# ---------------------------------------------------------------- noise


@dataclass(frozen=True)
class NoiseParams:
    density: float = -174.0  # dBm/Hz
    ue_noise_figure: float = 9.0
    bs_noise_figure: float = 7.0
    sat_g_over_t: float = 1.1  # dB/K
    sat_max_gain: float = 30.0  # dBi

    @property
    def sat_noise_temperature(self) -> float:
        return 10.0 ** ((self.sat_max_gain - self.sat_g_over_t) / 10.0)


def thermal_noise_dbm(bandwidth, noise_figure, density=-174.0):
    return density + 10.0 * np.log10(np.asarray(bandwidth, dtype=float)) + noise_figure


def satellite_noise_dbm(bandwidth, noise: NoiseParams = NoiseParams()):
    """Satellite receiver noise k*T*B with T implied by G/T and peak gain."""
    return BOLTZMANN_DBM + 10.0 * math.log10(noise.sat_noise_temperature) + 10.0 * np.log10(
        np.asarray(bandwidth, dtype=float)
    )


# ---------------------------------------------------------------- scheduling


@dataclass(frozen=True)
class Schedule:
    dl_eta: np.ndarray
    dl_bw: np.ndarray
    ul_eta: np.ndarray
    ul_bw: np.ndarray
    n_simultaneous: np.ndarray  # (n_cells,) UL users per time slot
    ul_slot: np.ndarray  # (n_users,) PRB group used in UL
    ul_cosched: np.ndarray  # (n_slots, n_cells) user on each PRB group, -1 if none

    def ul_interferers(self, k: int, assoc: Association) -> np.ndarray:
        """Users co-scheduled with ``k`` on its PRB in the other co-channel cells."""
        x = assoc.serving[k]
        others = assoc.cells.co_channel(x)
        users = self.ul_cosched[self.ul_slot[k], others]
        return users[users >= 0]


def schedule(
    assoc: Association,
    cell_bw,
    ul_prb_bw: float = 360e3,
    rng: np.random.Generator | None = None,
    *,
    ul_queue: np.ndarray | None = None,
) -> Schedule:
    """Round-robin DL (whole band, time shared) and multi-user UL (fixed PRB width).

    ``cell_bw`` gives B_x per cell. ``ul_queue`` optionally restricts which
    users may be drawn as UL co-schedulees (defaults to all).
    """
    rng = rng or np.random.default_rng(0)
    cell_bw = np.broadcast_to(np.asarray(cell_bw, dtype=float), (assoc.cells.n_cells,))
    n_cells = assoc.cells.n_cells
    load = assoc.load()
    serving = assoc.serving
    n_users = len(serving)

    dl_eta = np.zeros(n_users)
    has = load[serving] > 0
    dl_eta[has] = 1.0 / load[serving][has]
    dl_bw = cell_bw[serving].copy() if n_users else np.zeros(0)

    n_slots = np.floor(cell_bw / ul_prb_bw + 1e-9).astype(int)
    n_sim = np.minimum(n_slots, load)
    ul_eta = np.zeros(n_users)
    ul_eta[has] = n_sim[serving][has] / load[serving][has]
    ul_bw = np.full(n_users, float(ul_prb_bw))

    # random round-robin order inside each cell: slot = rank mod n_slots
    order = np.lexsort((rng.random(n_users), serving))
    rank = np.empty(n_users, dtype=int)
    starts = np.concatenate([[0], np.cumsum(load)])
    rank[order] = np.arange(n_users) - starts[serving[order]]
    ul_slot = np.where(n_users > 0, rank % np.maximum(n_slots[serving], 1), 0) if n_users else np.zeros(0, dtype=int)

    max_slots = int(n_slots.max()) if n_cells else 0
    cosched = np.full((max_slots, n_cells), -1, dtype=int)
    queue = np.arange(n_users) if ul_queue is None else np.asarray(ul_queue)
    if len(queue):
        q_serving = serving[queue]
        q_order = np.argsort(q_serving, kind="stable")
        q_sorted = queue[q_order]
        q_load = np.bincount(q_serving, minlength=n_cells)
        q_start = np.concatenate([[0], np.cumsum(q_load)])[:-1]
        pick = np.floor(rng.random((max_slots, n_cells)) * np.maximum(q_load, 1)).astype(int)
        cand = q_sorted[np.minimum(q_start + pick, len(q_sorted) - 1)]
        valid = (q_load > 0)[None, :] & (np.arange(max_slots)[:, None] < n_slots[None, :])
        cosched = np.where(valid, cand, -1)
    return Schedule(
        dl_eta=dl_eta,
        dl_bw=dl_bw,
        ul_eta=ul_eta,
        ul_bw=ul_bw,
        n_simultaneous=n_sim,
        ul_slot=ul_slot.astype(int),
        ul_cosched=cosched,
    )


# ---------------------------------------------------------------- SINR (reference form)


def sinr_prb(
    k: int,
    direction: str,
    assoc: Association,
    sched: Schedule,
    powers: PowerAllocation,
    gains,
    fading=None,
    *,
    noise_mw,
    muted=(),
) -> float:
    """Per-PRB SINR of user ``k`` by direct summation over its interferers.

    ``gains`` and ``fading`` (|h|^2) are (n_users, n_cells) linear arrays.
    ``noise_mw`` is the noise power over B_k at the receiver of this link.
    """
    gains = np.asarray(gains, dtype=float)
    fad = np.ones_like(gains) if fading is None else np.asarray(fading, dtype=float)
    x = int(assoc.serving[k])
    if direction == "DL":
        if sched.dl_eta[k] <= 0:
            raise ValueError(f"user {k} is not scheduled in DL")
        p = powers.dl_mw
        signal = p[x] * gains[k, x] * fad[k, x]
        interf = 0.0
        for y in assoc.cells.co_channel(x):
            if y in muted:
                continue
            interf += p[y] * gains[k, y] * fad[k, y]
        return signal / (interf + noise_mw)
    if direction == "UL":
        if sched.ul_eta[k] <= 0:
            raise ValueError(f"user {k} is not scheduled in UL")
        p = powers.ul_mw
        signal = p[k] * gains[k, x] * fad[k, x]
        interf = 0.0
        for l in sched.ul_interferers(k, assoc):
            interf += p[l] * gains[l, x] * fad[l, x]
        return signal / (interf + noise_mw)
    raise ValueError(f"direction must be 'DL' or 'UL', got {direction!r}")


# ---------------------------------------------------------------- SINR (vectorised)


def downlink_terms(rx_mw, serving_col, muted=None):
    """Split per-cell received powers into the serving signal and interferer terms.

    ``rx_mw`` is (n, m) received power from each co-channel cell; the serving
    column and any ``muted`` (n, m) entries are zeroed in the returned terms.
    """
    rx_mw = np.asarray(rx_mw, dtype=float)
    rows = np.arange(len(rx_mw))
    signal = rx_mw[rows, serving_col]
    terms = rx_mw.copy()
    terms[rows, serving_col] = 0.0
    if muted is not None:
        terms[muted] = 0.0
    return signal, terms


def uplink_terms(ul_mw, gains, users, serving_col, slot, cosched, co_channel_cols):
    """Signal and interferer terms of each UL user (co-scheduled users in other cells).

    ``co_channel_cols`` lists the cells of the channel (global indices), and
    ``serving_col`` indexes into that list.
    Returns (signal, terms, interferer_ids) with ``interferer_ids`` -1 where empty.
    """
    cols = np.asarray(co_channel_cols)
    ids = cosched[slot][:, cols]  # (n, m)
    own = np.arange(len(cols))[None, :] == serving_col[:, None]
    ids = np.where(own, -1, ids)
    x = cols[serving_col]
    safe = np.maximum(ids, 0)
    terms = np.where(ids >= 0, ul_mw[safe] * gains[safe, x[:, None]], 0.0)
    signal = ul_mw[users] * gains[users, x]
    return signal, terms, ids


def sinr_realizations(
    signal,
    terms,
    noise_mw,
    n_samples: int,
    rng: np.random.Generator,
    *,
    signal_rayleigh=False,
    term_rayleigh=False,
    n_faded: int | None = None,
):
    """Per-PRB SINR realizations, shape (n, n_samples).

    Rayleigh links get independent unit-mean exponential power draws. When
    ``n_faded`` is set only the strongest ``n_faded`` interferers per user are
    faded; the remainder enters at its mean.
    """
    signal = np.asarray(signal, dtype=float)
    terms = np.asarray(terms, dtype=float)
    n, m = terms.shape
    noise_mw = np.broadcast_to(np.asarray(noise_mw, dtype=float), (n,))
    sig_ray = np.broadcast_to(np.asarray(signal_rayleigh, dtype=bool), (n,))
    term_ray = np.broadcast_to(np.asarray(term_rayleigh, dtype=bool), (n, m))
    if n == 0:
        return np.zeros((0, n_samples))

    total = terms.sum(axis=1)
    if n_faded is not None and n_faded < m:
        idx = np.argpartition(-terms, n_faded - 1, axis=1)[:, :n_faded]
        top = np.take_along_axis(terms, idx, axis=1)
        top_ray = np.take_along_axis(term_ray, idx, axis=1)
        rest = np.maximum(total - top.sum(axis=1), 0.0)
    else:
        top, top_ray, rest = terms, term_ray, np.zeros(n)

    h_sig = np.where(sig_ray[:, None], rng.exponential(size=(n, n_samples)), 1.0)
    h_int = np.where(top_ray[:, :, None], rng.exponential(size=top.shape + (n_samples,)), 1.0)
    interference = np.einsum("nk,nks->ns", top, h_int) + rest[:, None]
    return signal[:, None] * h_sig / (interference + noise_mw[:, None])


def rate(eta, bandwidth, sinr):
    """Achievable rate eta*B*E[log2(1+SINR)]; the expectation runs over the last axis."""
    sinr = np.asarray(sinr, dtype=float)
    se = np.log2(1.0 + sinr)
    if se.ndim >= 1 and np.ndim(eta) < se.ndim:
        se = se.mean(axis=-1)
    return np.asarray(eta, dtype=float) * np.asarray(bandwidth, dtype=float) * se


# ---------------------------------------------------------------- TN baselines


def tn_interference_relief(signal_mw, interferer_mw, noise_mw, threshold_db: float = -5.0):
    """Greedily mute the strongest interferers until SINR reaches the threshold.

    Returns (muted indices into ``interferer_mw`` in muting order, final SINR).
    """
    interferer_mw = np.asarray(interferer_mw, dtype=float)
    thr = 10.0 ** (threshold_db / 10.0)
    order = np.argsort(-interferer_mw, kind="stable")
    remaining = float(interferer_mw.sum())
    muted = []
    sinr = signal_mw / (remaining + noise_mw)
    for j in order:
        if sinr >= thr or interferer_mw[j] <= 0:
            break
        muted.append(int(j))
        remaining -= interferer_mw[j]
        remaining = max(remaining, 0.0)
        sinr = signal_mw / (remaining + noise_mw)
    return muted, sinr


def relief_muting_counts(signal_mw, terms, noise_mw, threshold_db: float = -5.0):
    """Vectorised :func:`tn_interference_relief` over rows of ``terms``.

    Returns (muted mask (n, m), muted count (n,), SINR after muting (n,)).
    """
    terms = np.asarray(terms, dtype=float)
    n, m = terms.shape
    thr = 10.0 ** (threshold_db / 10.0)
    order = np.argsort(-terms, axis=1, kind="stable")
    sorted_terms = np.take_along_axis(terms, order, axis=1)
    # remaining interference after muting the top j terms, j = 0..m
    csum = np.concatenate([np.zeros((n, 1)), np.cumsum(sorted_terms, axis=1)], axis=1)
    remaining = np.maximum(terms.sum(axis=1, keepdims=True) - csum, 0.0)
    sinr = np.asarray(signal_mw, dtype=float)[:, None] / (remaining + np.asarray(noise_mw, dtype=float).reshape(-1, 1))
    ok = sinr >= thr
    # positive terms only can be muted; cap at the number of positive interferers
    n_pos = (terms > 0).sum(axis=1)
    count = np.where(ok.any(axis=1), ok.argmax(axis=1), n_pos)
    count = np.minimum(count, n_pos)
    final = sinr[np.arange(n), count]
    mask = np.zeros((n, m), dtype=bool)
    rank = np.empty_like(order)
    np.put_along_axis(rank, order, np.arange(m)[None, :].repeat(n, axis=0), axis=1)
    mask = rank < count[:, None]
    return mask, count, final


@dataclass(frozen=True)
class PartitionResult:
    reserved_fraction: np.ndarray  # (n_cells,)
    saturated: np.ndarray  # (n_cells,) bool
    uav_share: np.ndarray  # (n_uav,) time-frequency share eta*B_k in Hz


def ul_resource_partition(
    uav_cell,
    uav_spectral_eff,
    n_cells: int,
    cell_bw,
    target_rate: float = 100e3,
    max_share=None,
) -> PartitionResult:
    """Reserve per cell the smallest UL share giving each UAV ``target_rate``.

    Rates are linear in the time-frequency share at fixed per-PRB spectral
    efficiency, so UAV k needs ``target / SE_k`` Hz. ``max_share`` caps what a
    single UAV can occupy (its PRB width). Cells whose demand exceeds the band
    or the cap, or holding a UAV with zero spectral efficiency, are marked
    saturated and shares are scaled down to fit.
    """
    if target_rate <= 0:
        raise ValueError("target rate must be > 0")
    uav_cell = np.asarray(uav_cell, dtype=int)
    se = np.asarray(uav_spectral_eff, dtype=float)
    cell_bw = np.broadcast_to(np.asarray(cell_bw, dtype=float), (n_cells,))
    with np.errstate(divide="ignore"):
        need = np.where(se > 0, target_rate / se, np.inf)
    capped = need if max_share is None else np.minimum(need, max_share)
    per_uav_sat = (capped < need) | ~np.isfinite(need)
    demand = np.bincount(uav_cell, weights=np.where(np.isfinite(capped), capped, 0.0), minlength=n_cells)
    frac = demand / cell_bw
    saturated = (frac > 1.0) | (np.bincount(uav_cell, weights=per_uav_sat, minlength=n_cells) > 0)
    scale = np.where(frac > 1.0, 1.0 / np.maximum(frac, 1e-300), 1.0)
    share = np.where(np.isfinite(capped), capped, 0.0) * scale[uav_cell]
    return PartitionResult(
        reserved_fraction=np.minimum(frac, 1.0),
        saturated=saturated,
        uav_share=share,
    )
