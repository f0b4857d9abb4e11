"""Compiled batch kernels for the selection hot paths.

Each kernel replays the exact splitmix64 stream of rng.RandomSource: given a
starting state it consumes raw words precisely as the scalar loop would and
returns the final state so the caller can resume the source. Keeping the two
paths stream-identical is load-bearing; tests assert it draw for draw.
"""

import numpy as np
from numba import njit

_U64_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_U64_MIX_A = np.uint64(0xBF58476D1CE4E5B9)
_U64_MIX_B = np.uint64(0x94D049BB133111EB)
_U64_S30 = np.uint64(30)
_U64_S27 = np.uint64(27)
_U64_S31 = np.uint64(31)
_U64_ZERO = np.uint64(0)


@njit(cache=True, inline="always")
def _mix64(z):
    z = (z ^ (z >> _U64_S30)) * _U64_MIX_A
    z = (z ^ (z >> _U64_S27)) * _U64_MIX_B
    return z ^ (z >> _U64_S31)


@njit(cache=True, inline="always")
def _rejection_threshold(bound):
    # (2**64 - bound) % bound, using wrapping negation in uint64.
    return (_U64_ZERO - bound) % bound


@njit(cache=True)
def locate_linear_batch(prefix, us, out):
    # Leftmost i with us[j] < prefix[i]; callers guarantee us[j] < total.
    n = prefix.shape[0]
    for j in range(us.shape[0]):
        u = us[j]
        idx = n - 1
        for i in range(n):
            if u < prefix[i]:
                idx = i
                break
        out[j] = idx


@njit(cache=True)
def locate_binary_batch(prefix, us, out):
    n = prefix.shape[0]
    for j in range(us.shape[0]):
        u = us[j]
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) >> 1
            if prefix[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        out[j] = lo


@njit(cache=True)
def select_linear_batch(prefix, total, state, count, out_idx):
    n = prefix.shape[0]
    threshold = _rejection_threshold(total)
    for j in range(count):
        while True:
            state = state + _U64_GOLDEN
            raw = _mix64(state)
            if raw >= threshold:
                break
        u = raw % total
        idx = n - 1
        for i in range(n):
            if u < prefix[i]:
                idx = i
                break
        out_idx[j] = idx
    return state


@njit(cache=True)
def select_binary_batch(prefix, total, state, count, out_idx):
    n = prefix.shape[0]
    threshold = _rejection_threshold(total)
    for j in range(count):
        while True:
            state = state + _U64_GOLDEN
            raw = _mix64(state)
            if raw >= threshold:
                break
        u = raw % total
        lo = 0
        hi = n
        while lo < hi:
            mid = (lo + hi) >> 1
            if prefix[mid] <= u:
                lo = mid + 1
            else:
                hi = mid
        out_idx[j] = lo
    return state


@njit(cache=True)
def select_sa_batch(weights, n_peers, max_weight, state, count, attempt_cap,
                    out_idx, out_attempts):
    # Returns (state, completed); completed < count means the acceptance
    # loop for draw `completed` hit the cap and the caller must raise.
    t_cand = _rejection_threshold(n_peers)
    t_accept = _rejection_threshold(max_weight)
    for j in range(count):
        attempts = 0
        accepted = False
        while attempts < attempt_cap:
            attempts += 1
            while True:
                state = state + _U64_GOLDEN
                raw = _mix64(state)
                if raw >= t_cand:
                    break
            cand = raw % n_peers
            while True:
                state = state + _U64_GOLDEN
                raw = _mix64(state)
                if raw >= t_accept:
                    break
            r = raw % max_weight
            if r < np.uint64(weights[cand]):
                out_idx[j] = np.int64(cand)
                out_attempts[j] = attempts
                accepted = True
                break
        if not accepted:
            return state, j
    return state, count


def warm_up():
    """Trigger compilation (or cache load) of every kernel."""
    prefix = np.array([1, 3, 6, 10], dtype=np.uint64)
    weights = np.array([1, 2, 3, 4], dtype=np.uint32)
    us = np.array([0, 9], dtype=np.uint64)
    out2 = np.empty(2, dtype=np.int64)
    locate_linear_batch(prefix, us, out2)
    locate_binary_batch(prefix, us, out2)
    att = np.empty(2, dtype=np.int64)
    state = np.uint64(1)
    state = select_linear_batch(prefix, np.uint64(10), state, 2, out2)
    state = select_binary_batch(prefix, np.uint64(10), state, 2, out2)
    select_sa_batch(weights, np.uint64(4), np.uint64(4), state, 2, 1 << 20,
                    out2, att)
