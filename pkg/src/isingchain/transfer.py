"""O(N) solver for log Z, site means, pair expectations, and covariances.

Messages are the relative weights of sigma_x = +1 / -1 once everything on one
side of site x has been summed out. They are propagated in log domain and
renormalized at every site, so the recursion survives |J|, |h| up to ~1e3 and
chains of 1e6 sites without overflow or total underflow.

The covariance is NOT computed as pair_expectation minus the product of site
means: that difference cancels catastrophically once the covariance is
exponentially small. The chain measure is Markov, so the covariance telescopes
into a product of adjacent-pair covariances divided by interior variances, and
each adjacent covariance has the cancellation-free form

    cov(sigma_k, sigma_{k+1}) = 8 A+ A- B+ B- sinh(2 J_k) / Z_loc^2

where A (B) are the left (right) weights with the local fields absorbed and
Z_loc is the local normalization. Every factor is a positive product, so the
result keeps full relative precision however small it is.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .chain import ChainParams, _check_site
from .errors import DecayRateUndefinedError, PreconditionError
from .numeric import log_add_exp, log_cosh, log_sinh_abs


@dataclass(frozen=True)
class MessageState:
    """One renormalized message: weights (w_plus, w_minus) with max = 1."""

    weights: tuple[float, float]
    log_scale: float


def _forward_sweep(params: ChainParams, stop: int) -> list[tuple[float, float]]:
    """Log-weight pairs of the message into sites 0..stop.

    Entry x is the message into site x with sites < x summed out (their fields
    absorbed, h_x not). Pairs are shifted so the larger component is 0.
    """
    out = [(0.0, 0.0)]
    lp = lm = 0.0
    for y in range(stop):
        hy = params.fields[y]
        jy = params.couplings[y]
        ap, am = lp + hy, lm - hy
        lp = log_add_exp(ap + jy, am - jy)
        lm = log_add_exp(ap - jy, am + jy)
        shift = lp if lp >= lm else lm
        lp, lm = lp - shift, lm - shift
        out.append((lp, lm))
    return out


def _backward_sweep(params: ChainParams, start: int) -> list[tuple[float, float]]:
    """Log-weight pairs of the message into sites start..N, mirrored.

    Entry x - start is the message into site x with sites > x summed out.
    """
    n = params.n_sites
    out = [(0.0, 0.0)] * (n - start)
    lp = lm = 0.0
    for y in range(n - 2, start - 1, -1):
        hy = params.fields[y + 1]
        jy = params.couplings[y]
        ap, am = lp + hy, lm - hy
        lp = log_add_exp(jy + ap, -jy + am)
        lm = log_add_exp(-jy + ap, jy + am)
        shift = lp if lp >= lm else lm
        lp, lm = lp - shift, lm - shift
        out[y - start] = (lp, lm)
    return out


def _as_message(pair: tuple[float, float], log_scale: float = 0.0) -> MessageState:
    lp, lm = pair
    return MessageState((math.exp(lp), math.exp(lm)), log_scale)


def forward_message(params: ChainParams, x: int) -> MessageState:
    """Renormalized message into site x from the left (fields < x absorbed)."""
    x = _check_site(params, x)
    scale = 0.0
    lp = lm = 0.0
    for y in range(x):
        hy = params.fields[y]
        jy = params.couplings[y]
        ap, am = lp + hy, lm - hy
        nlp = log_add_exp(ap + jy, am - jy)
        nlm = log_add_exp(ap - jy, am + jy)
        shift = nlp if nlp >= nlm else nlm
        lp, lm = nlp - shift, nlm - shift
        scale += shift
    return _as_message((lp, lm), scale)


def backward_message(params: ChainParams, x: int) -> MessageState:
    """Renormalized message into site x from the right (fields > x absorbed)."""
    x = _check_site(params, x)
    scale = 0.0
    lp = lm = 0.0
    for y in range(params.n_sites - 2, x - 1, -1):
        hy = params.fields[y + 1]
        jy = params.couplings[y]
        ap, am = lp + hy, lm - hy
        nlp = log_add_exp(jy + ap, -jy + am)
        nlm = log_add_exp(-jy + ap, jy + am)
        shift = nlp if nlp >= nlm else nlm
        lp, lm = nlp - shift, nlm - shift
        scale += shift
    return _as_message((lp, lm), scale)


def log_partition(params: ChainParams) -> float:
    """log Z, exact up to rounding, finite for any finite parameters."""
    scale = 0.0
    lp = lm = 0.0
    for y in range(params.n_edges):
        hy = params.fields[y]
        jy = params.couplings[y]
        ap, am = lp + hy, lm - hy
        nlp = log_add_exp(ap + jy, am - jy)
        nlm = log_add_exp(ap - jy, am + jy)
        shift = nlp if nlp >= nlm else nlm
        lp, lm = nlp - shift, nlm - shift
        scale += shift
    h_last = params.fields[-1]
    return scale + log_add_exp(lp + h_last, lm - h_last)


def _site_delta(
    params: ChainParams,
    x: int,
    fwd: tuple[float, float],
    bwd: tuple[float, float],
) -> float:
    """Log-weight gap of sigma_x = +1 over -1 given both messages into x."""
    hx = params.fields[x]
    return (fwd[0] + hx + bwd[0]) - (fwd[1] - hx + bwd[1])


def site_mean(params: ChainParams, x: int) -> float:
    """<sigma_x>; strictly inside (-1, 1) for finite parameters."""
    x = _check_site(params, x)
    fwd = _forward_sweep(params, x)[x]
    bwd = _backward_sweep(params, x)[0]
    return math.tanh(0.5 * _site_delta(params, x, fwd, bwd))


def pair_expectation(params: ChainParams, i: int, j: int) -> float:
    """<sigma_i sigma_j> for i < j."""
    i = _check_site(params, i, "i")
    j = _check_site(params, j, "j")
    if i >= j:
        raise PreconditionError("pair_expectation needs i < j")
    fwd = _forward_sweep(params, i)[i]
    bwd = _backward_sweep(params, j)[0]
    # 2x2 log-weight table over (sigma_i, sigma_x), propagated from x = i to j.
    hi = params.fields[i]
    g = [[fwd[0] + hi, -math.inf], [-math.inf, fwd[1] - hi]]
    for x in range(i, j):
        jx = params.couplings[x]
        hx = params.fields[x + 1] if x + 1 < j else 0.0
        nxt = [[0.0, 0.0], [0.0, 0.0]]
        for s in range(2):
            nxt[s][0] = log_add_exp(g[s][0] + jx, g[s][1] - jx) + hx
            nxt[s][1] = log_add_exp(g[s][0] - jx, g[s][1] + jx) - hx
        shift = max(nxt[0][0], nxt[0][1], nxt[1][0], nxt[1][1])
        g = [[v - shift for v in row] for row in nxt]
    hj = params.fields[j]
    vals = [
        [g[0][0] + hj + bwd[0], g[0][1] - hj + bwd[1]],
        [g[1][0] + hj + bwd[0], g[1][1] - hj + bwd[1]],
    ]
    top = max(max(row) for row in vals)
    num = den = 0.0
    for s, sgn_s in ((0, 1.0), (1, -1.0)):
        for u, sgn_u in ((0, 1.0), (1, -1.0)):
            w = math.exp(vals[s][u] - top)
            num += sgn_s * sgn_u * w
            den += w
    return num / den


def _adjacent_log_cov(
    params: ChainParams,
    k: int,
    fwd: tuple[float, float],
    bwd: tuple[float, float],
) -> float:
    """log |cov(sigma_k, sigma_{k+1})| from the messages into k and k+1."""
    jk = params.couplings[k]
    ap, am = fwd[0] + params.fields[k], fwd[1] - params.fields[k]
    bp, bm = bwd[0] + params.fields[k + 1], bwd[1] - params.fields[k + 1]
    log_z = log_add_exp(
        log_add_exp(ap + jk + bp, ap - jk + bm),
        log_add_exp(am - jk + bp, am + jk + bm),
    )
    return math.log(8.0) + ap + am + bp + bm + log_sinh_abs(2.0 * jk) - 2.0 * log_z


def covariance(params: ChainParams, i: int, j: int) -> float:
    """cov(sigma_i, sigma_j) = <sigma_i sigma_j> - <sigma_i><sigma_j>.

    Symmetric in i, j. Evaluated through the telescoping product over the
    window (see module docstring), which keeps relative precision even when
    the covariance is exponentially small.
    """
    i = _check_site(params, i, "i")
    j = _check_site(params, j, "j")
    if i == j:
        raise PreconditionError("covariance needs two distinct sites")
    if i > j:
        i, j = j, i
    fwd = _forward_sweep(params, j)
    bwd = _backward_sweep(params, i)
    log_total = 0.0
    negative = False
    for k in range(i, j):
        if params.couplings[k] == 0.0:
            return 0.0
        if params.couplings[k] < 0.0:
            negative = not negative
        log_total += _adjacent_log_cov(params, k, fwd[k], bwd[k + 1 - i])
    for k in range(i + 1, j):
        delta = _site_delta(params, k, fwd[k], bwd[k - i])
        # divide by var(sigma_k) = sech^2(delta/2)
        log_total += 2.0 * log_cosh(0.5 * delta)
    value = math.exp(log_total)
    return -value if negative else value


def finite_decay_rate(params: ChainParams, i: int, j: int) -> float:
    """-log(cov(sigma_i, sigma_j)) / (j - i) for i < j; needs positive cov."""
    i = _check_site(params, i, "i")
    j = _check_site(params, j, "j")
    if j - i < 1:
        raise PreconditionError("finite_decay_rate needs j - i >= 1")
    cov = covariance(params, i, j)
    if cov <= 0.0:
        raise DecayRateUndefinedError(
            f"covariance {cov!r} at pair ({i}, {j}) is not positive"
        )
    return -math.log(cov) / (j - i)
