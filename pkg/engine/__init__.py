"""Numerical core: rough paths, rough drivers, SPDE solvers and CLT/MDP machinery."""
