"""Artificial molecules with the coefficient statistics of real ones.

Every particle-number-conserving term over the requested orbitals is drawn:
diagonal one-body energies from Uniform[-10, 0], hoppings from
Uniform[-1, 1], density-density couplings from Uniform[-0.5, 0.5], and the
three- and four-index interaction classes from Laplace distributions with
scales 0.2 and 0.1.  A fraction of the non-diagonal terms is then removed to
mimic symmetry-forbidden integrals; the diagonal one-body terms are kept so
the spectrum stays bounded like a mean-field reference.

Laplace draws go through the inverse CDF so a seed defines the same stream
on every platform with the same 64-bit PRNG (PCG64).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .hamiltonian import (
    FermionHamiltonian,
    FermionTerm,
    TermKind,
    full_term_census,
)

DEFAULT_REMOVAL_FRACTION = 0.25

#: (distribution, parameters) per term kind
_DISTRIBUTIONS = {
    TermKind.HPP: ("uniform", -10.0, 0.0),
    TermKind.HPQ: ("uniform", -1.0, 1.0),
    TermKind.HPQQP: ("uniform", -0.5, 0.5),
    TermKind.HPQQR_ORDERED: ("laplace", 0.2),
    TermKind.HPQQR_UNORDERED: ("laplace", 0.2),
    TermKind.HPQRS: ("laplace", 0.1),
}


@dataclass(frozen=True)
class SynthConfig:
    """Size, filling, sparsity and seed of one artificial molecule."""

    n_spin_orbitals: int
    inverse_filling: float = 2.0
    removal_fraction: float = DEFAULT_REMOVAL_FRACTION
    seed: int = 0

    def __post_init__(self):
        if self.n_spin_orbitals < 4:
            raise ValidationError("need at least 4 spin orbitals")
        if self.inverse_filling < 1.0:
            raise ValidationError("inverse filling r = N_so / N_e must be >= 1")
        if not 0.0 <= self.removal_fraction < 1.0:
            raise ValidationError("removal_fraction must lie in [0, 1)")
        if self.n_electrons < 1:
            raise ValidationError("derived electron count must be >= 1")

    @property
    def n_electrons(self) -> int:
        return int(round(self.n_spin_orbitals / self.inverse_filling))

    def to_dict(self) -> dict:
        return {
            "n_spin_orbitals": self.n_spin_orbitals,
            "inverse_filling": self.inverse_filling,
            "removal_fraction": self.removal_fraction,
            "seed": self.seed,
        }


def laplace_inverse_cdf(u: float, scale: float) -> float:
    """Quantile function of the zero-mean Laplace distribution."""
    if not 0.0 <= u < 1.0:
        raise ValidationError(f"uniform draw must lie in [0, 1), got {u}")
    half = u - 0.5
    if half == 0.0:
        return 0.0
    # keep the u=0 endpoint finite (quantile diverges only at measure zero)
    magnitude = min(abs(half), 0.5 - 1e-16)
    return -scale * math.copysign(1.0, half) * math.log1p(-2.0 * magnitude)


def coefficient_from_uniform(kind: TermKind, u: float) -> float:
    """Map one uniform draw to a coefficient of the kind's distribution."""
    spec = _DISTRIBUTIONS[kind]
    if spec[0] == "uniform":
        _, lo, hi = spec
        return lo + (hi - lo) * u
    return laplace_inverse_cdf(u, spec[1])


def sample_coefficient(kind: TermKind, rng: np.random.Generator) -> float:
    """One coefficient draw from the kind's distribution."""
    return coefficient_from_uniform(kind, float(rng.random()))


def generate_molecule(cfg: SynthConfig) -> FermionHamiltonian:
    """Draw a full synthetic Hamiltonian; deterministic for a fixed seed.

    Terms are visited in canonical order; each draws its coefficient and, for
    the removable kinds, one removal decision, so the retained coefficients
    depend only on the seed.
    """
    rng = np.random.Generator(np.random.PCG64(cfg.seed))
    terms = []
    for template in full_term_census(cfg.n_spin_orbitals):
        coefficient = sample_coefficient(template.kind, rng)
        if template.kind is not TermKind.HPP:
            if float(rng.random()) < cfg.removal_fraction:
                continue
        terms.append(FermionTerm(template.kind, template.indices, coefficient))
    return FermionHamiltonian(
        n_spin_orbitals=cfg.n_spin_orbitals,
        n_electrons=cfg.n_electrons,
        terms=tuple(terms),
        energy_shift=0.0,
    )


def census_size(n_spin_orbitals: int) -> int:
    """Number of conserving terms before removal (grows as the fourth power)."""
    n = n_spin_orbitals
    pairs = n * (n - 1) // 2
    subsets4 = math.comb(n, 4)
    return n + 2 * pairs + pairs * (n - 2) + 3 * subsets4
