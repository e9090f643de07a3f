import numpy as np
import pytest

from clhjlab.problems import DiffusionModel, Domain, FluxModel, ProblemSpec


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


def burgers_flux():
    return FluxModel(
        f=lambda x, u: 0.5 * np.asarray(u, dtype=float) ** 2,
        f_u=lambda x, u: np.asarray(u, dtype=float),
        f_x=lambda x, u: np.zeros_like(np.asarray(u, dtype=float)),
        x_independent=True,
        convexity_tag="strictly-convex",
    )


def riemann_spec(uL, uR, half_width=2.0, jump_at=0.0, pad=1.0):
    """Step initial data on a truncated line (for shock/rarefaction oracles)."""
    def u0(x):
        x = np.asarray(x, dtype=float)
        return np.where(x < jump_at, uL, uR).astype(float)

    lo = min(uL, uR) - pad
    hi = max(uL, uR) + pad
    return ProblemSpec(
        flux=burgers_flux(),
        diffusion=DiffusionModel.zero(),
        u0=u0,
        domain=Domain("truncated-line", half_width=half_width),
        working_range=(lo, hi),
        name=f"riemann({uL},{uR})",
    )


def smooth_random_field(rng, n_modes=3, amplitude=0.5, mean=0.0):
    """Random zero-mean trigonometric polynomial on the torus, as a callable."""
    coeffs = amplitude * rng.standard_normal(n_modes) / np.arange(1, n_modes + 1)
    phases = 2.0 * np.pi * rng.random(n_modes)

    def u0(x):
        x = np.asarray(x, dtype=float)
        out = np.full_like(x, mean)
        for k, (c, p) in enumerate(zip(coeffs, phases), start=1):
            out = out + c * np.sin(2.0 * np.pi * k * x + p)
        return out

    return u0
