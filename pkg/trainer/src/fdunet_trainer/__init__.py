"""FD-UNet training and evaluation for learned PAT reconstruction.

Consumes datasets written in the toolkit's container format (a
manifest.json plus raw little-endian float32 blobs) and trains one
network per (preprocessing mode, sensor count) configuration.
"""

__version__ = "0.1.0"
