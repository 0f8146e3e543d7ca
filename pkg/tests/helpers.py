"""Shared scenario builders for the test suite."""

from __future__ import annotations

import numpy as np

from ecolab import (
    IntegratorConfig,
    InteractionKind,
    InteractionSpec,
    LinearResponse,
    Role,
    Scenario,
    SpeciesSpec,
)


def predation_scenario(
    prey_growth=1.0,
    encounter=0.1,
    predator_decline=0.5,
    conversion=0.2,
    initial=(30.0, 8.0),
    horizon=10.0,
    step=0.01,
    method="rk4_fixed",
) -> Scenario:
    return Scenario(
        species=(
            SpeciesSpec(id="prey", role=Role.PRODUCER, growth_rate=prey_growth),
            SpeciesSpec(id="pred", role=Role.CONSUMER, trophic_level=1, growth_rate=predator_decline),
        ),
        interactions=(
            InteractionSpec(
                species_i="pred",
                species_j="prey",
                kind=InteractionKind.PREDATION,
                coeff_i=conversion,
                response=LinearResponse(encounter),
            ),
        ),
        initial_densities={"prey": initial[0], "pred": initial[1]},
        integrator=IntegratorConfig(method=method, step=step),
        horizon=horizon,
    )


def single_species(growth=1.0, limit=0.0, initial=5.0, role=Role.PRODUCER, horizon=10.0, step=0.01) -> Scenario:
    return Scenario(
        species=(SpeciesSpec(id="only", role=role, growth_rate=growth, self_limitation=limit),),
        interactions=(),
        initial_densities={"only": initial},
        integrator=IntegratorConfig(step=step),
        horizon=horizon,
    )


def chain_scenario(initial=(6.0, 2.0, 1.0), horizon=60.0) -> Scenario:
    """Three-level chain with a positive interior equilibrium."""
    return Scenario(
        species=(
            SpeciesSpec(id="plant", role=Role.PRODUCER, growth_rate=1.0, self_limitation=0.1),
            SpeciesSpec(id="grazer", role=Role.CONSUMER, trophic_level=1, growth_rate=0.2, self_limitation=0.05),
            SpeciesSpec(id="top", role=Role.CONSUMER, trophic_level=2, growth_rate=0.1, self_limitation=0.05),
        ),
        interactions=(
            InteractionSpec(
                species_i="grazer",
                species_j="plant",
                kind=InteractionKind.PREDATION,
                coeff_i=0.5,
                response=LinearResponse(0.2),
            ),
            InteractionSpec(
                species_i="top",
                species_j="grazer",
                kind=InteractionKind.PREDATION,
                coeff_i=0.4,
                response=LinearResponse(0.25),
            ),
        ),
        initial_densities={"plant": initial[0], "grazer": initial[1], "top": initial[2]},
        integrator=IntegratorConfig(step=0.01),
        horizon=horizon,
    )


def chain_equilibrium_oracle() -> np.ndarray:
    """Interior equilibrium of chain_scenario from a direct linear solve.

    Per-capita balance of the chain gives a linear system in the three
    densities; solving it is independent of the Newton path under test.
    """
    a = np.array(
        [
            [-0.1, -0.2, 0.0],
            [0.5 * 0.2, -0.05, -0.25],
            [0.0, 0.4 * 0.25, -0.05],
        ]
    )
    b = np.array([-1.0, 0.2, 0.1])
    return np.linalg.solve(a, b)
