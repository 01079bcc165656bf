"""Numerical core: phase-space grids, Wigner transforms, Moyal algebra, dynamics and diagnostics."""
