"""Desk-scale laboratory for online bug triage under uncertainty.

Simulates stochastic bug arrivals and developer availability, trains an
approximate-dynamic-programming assignment policy from LP dual prices, and
benchmarks it against a myopic assign-now baseline and an exact
backward-induction oracle on tiny instances.
"""

__version__ = "0.1.0"
