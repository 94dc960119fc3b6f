"""Desk-scale latent video diffusion with structure and identity alignment supervision."""

__version__ = "0.1.0"
