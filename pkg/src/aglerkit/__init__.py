"""Agler kernels, model spaces and compressed shifts on the bidisk."""
