"""Symmetric link functions for the cumulative model."""

from dataclasses import dataclass, field

import numpy as np
from scipy import special

LINK_LOGIT = 0
LINK_PROBIT = 1

_SQRT2 = np.sqrt(2.0)
_SQRT2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class LinkFunction:
    """A symmetric response distribution F with cdf / pdf / quantile.

    Only symmetric links are supported (cdf(0) = 0.5), which is what makes
    the latent-variable motivation of the cumulative model consistent.
    """

    kind: str
    link_id: int = field(repr=False)

    def cdf(self, eta):
        if self.link_id == LINK_LOGIT:
            return special.expit(eta)
        return special.ndtr(eta)

    def pdf(self, eta):
        if self.link_id == LINK_LOGIT:
            p = special.expit(eta)
            return p * (1.0 - p)
        return np.exp(-0.5 * np.asarray(eta) ** 2) / _SQRT2PI

    def sf(self, eta):
        """Survival 1 - cdf, computed without cancellation in the upper tail."""
        if self.link_id == LINK_LOGIT:
            return special.expit(-np.asarray(eta))
        return special.ndtr(-np.asarray(eta))

    def inverse_cdf(self, p):
        if self.link_id == LINK_LOGIT:
            return special.logit(p)
        return special.ndtri(p)


LOGIT = LinkFunction("logit", LINK_LOGIT)
PROBIT = LinkFunction("probit", LINK_PROBIT)

_BY_NAME = {"logit": LOGIT, "probit": PROBIT}


def get_link(name):
    """Look up a link function by name ('logit' or 'probit')."""
    if isinstance(name, LinkFunction):
        return name
    try:
        return _BY_NAME[name]
    except KeyError:
        raise ValueError(f"unknown link {name!r}; choose from {sorted(_BY_NAME)}")
