"""Bandits with Knapsacks: UCB-Simplex policies, environments and a Monte-Carlo harness."""

__version__ = "0.1.0"
