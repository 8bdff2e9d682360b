"""Rigorous p-adic transfer operators, dynamical zeta functions and Julia-set dimensions."""
