"""The progressive noise update and per-site noise scales."""

import logging
from typing import Dict, Iterable

import numpy as np

from ..core.exceptions import DomainError
from ..core.types import Tensor
from ..nn.network import Network, forward
from ..tensor.ops import NormLike, normalize_lp, normalize_lp_batch, parse_norm

logger = logging.getLogger(__name__)


def noise_update(
    r: Tensor,
    g: Tensor,
    eta: float,
    eps: float,
    k: int,
    p: NormLike,
    per_example: bool = False,
) -> Tensor:
    """
    r <- (1 - eta) r + (eps / k) g / ||g||_p

    With ``per_example`` every leading-axis slice of ``g`` is normalized on its
    own, so each example receives an eps/k step. A zero gradient leaves only the
    decay.
    """
    r = np.asarray(r, dtype=np.float64)
    g = np.asarray(g, dtype=np.float64)
    if r.shape != g.shape:
        raise DomainError(
            f"Noise shape {r.shape} does not match gradient shape {g.shape}"
        )
    direction = normalize_lp_batch(g, p) if per_example else normalize_lp(g, p)
    return (1.0 - eta) * r + (eps / k) * direction


def calibrate_site_scales(
    net: Network, x: Tensor, sites: Iterable[int], p: NormLike
) -> Dict[int, float]:
    """
    Noise unit per site: the RMS of the site's pre-activation on ``x`` times
    d^(1/p), i.e. the lp norm of a constant vector at RMS level.
    """
    order = parse_norm(p)
    trace = forward(net, x)
    scales = {}
    for m in sites:
        z = trace.pre_activation(m)
        per_example = z[0].size
        rms = float(np.sqrt(np.mean(z**2)))
        factor = 1.0 if order == np.inf else per_example ** (1.0 / order)
        scales[m] = rms * factor
        logger.debug(
            f"Site {m}: pre-activation RMS {rms:.4g}, noise unit {scales[m]:.4g}"
        )
    return scales
