"""handsim: a desk-scale hand-conditioned residual video world model.

Subpackages: worldsim (procedural simulator), codec (video latents),
diffusion (conditioned denoiser + training), data (records and manifests),
eval (metrics, probe, ranking), plus a config-driven CLI.
"""

__version__ = "0.1.0"
