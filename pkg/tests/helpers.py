import numpy as np

import sdebridge as sb


def make_ou_model(alpha_bounds=(0.01, 5.0), beta_bounds=(0.05, 5.0)):
    """Scalar Ornstein-Uhlenbeck family dX = -alpha X dt + beta dW."""

    def drift(x, alpha):
        return -float(alpha[0]) * np.asarray(x, dtype=float)

    def sigma_diag(x, beta):
        x = np.asarray(x, dtype=float)
        return np.broadcast_to(float(beta[0]), x.shape).copy()

    def diffusion(x, beta):
        s = sigma_diag(x, beta)
        return s[..., :, None] * np.eye(1)

    return sb.SdeModel(
        name="ou1d",
        dim_state=1,
        dim_noise=1,
        p1=1,
        p2=1,
        drift=drift,
        diffusion=diffusion,
        bounds_alpha=[list(alpha_bounds)],
        bounds_beta=[list(beta_bounds)],
        diagonal_noise=True,
        sigma_diag=sigma_diag,
    )
